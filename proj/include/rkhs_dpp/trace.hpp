#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace rdpp {

enum class Monotone { Decreasing, Increasing, None };

std::string to_string(Monotone m);

struct TracePoint {
  std::string label;
  std::size_t n_sites = 0;
  double value = 0.0;
};

/// Sequence of (window, value) pairs. Values are stored raw; monotonicity and
/// convergence are separate judgments made on request.
class ConvergenceTrace {
 public:
  void push(std::string label, std::size_t n_sites, double value);

  const std::vector<TracePoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  double value(std::size_t i) const { return points_.at(i).value; }
  double final_value() const;
  /// value[last] - value[last-1]; 0 for traces shorter than two points.
  double last_increment() const;

  /// Largest step against `dir`: max(v[i]-v[i-1]) for Decreasing, max(v[i-1]-v[i])
  /// for Increasing. Nonpositive means monotone. 0 for short traces.
  double worst_step_against(Monotone dir) const;
  bool is_monotone(Monotone dir, double slack) const;
  /// Observed direction with a relative slack of 1e-12 on each step.
  Monotone direction() const;

  /// Successive values differ by < rel_tol * max(1, |v|) over the last two
  /// steps (three points).
  bool converged(double rel_tol = 1e-8) const;

  /// Columns window_label,n_sites,value,delta; 17 significant digits.
  void write_csv(std::ostream& os) const;

 private:
  std::vector<TracePoint> points_;
};

/// "%.17g" formatting used for every numeric artifact.
std::string format_double(double v);

}  // namespace rdpp
