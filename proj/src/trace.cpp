#include "rkhs_dpp/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace rdpp {

std::string to_string(Monotone m) {
  switch (m) {
    case Monotone::Decreasing: return "decreasing";
    case Monotone::Increasing: return "increasing";
    case Monotone::None: return "none";
  }
  return "none";
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ConvergenceTrace::push(std::string label, std::size_t n_sites, double value) {
  points_.push_back({std::move(label), n_sites, value});
}

double ConvergenceTrace::final_value() const {
  return points_.empty() ? std::numeric_limits<double>::quiet_NaN() : points_.back().value;
}

double ConvergenceTrace::last_increment() const {
  if (points_.size() < 2) return 0.0;
  return points_.back().value - points_[points_.size() - 2].value;
}

double ConvergenceTrace::worst_step_against(Monotone dir) const {
  double worst = -std::numeric_limits<double>::infinity();
  if (points_.size() < 2) return 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double step = points_[i].value - points_[i - 1].value;
    switch (dir) {
      case Monotone::Decreasing: worst = std::max(worst, step); break;
      case Monotone::Increasing: worst = std::max(worst, -step); break;
      case Monotone::None: return 0.0;
    }
  }
  return worst;
}

bool ConvergenceTrace::is_monotone(Monotone dir, double slack) const {
  return dir == Monotone::None || worst_step_against(dir) <= slack;
}

Monotone ConvergenceTrace::direction() const {
  bool down = true;
  bool up = true;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double a = points_[i - 1].value;
    const double b = points_[i].value;
    const double slack = 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
    if (b > a + slack) down = false;
    if (b < a - slack) up = false;
  }
  if (down) return Monotone::Decreasing;
  if (up) return Monotone::Increasing;
  return Monotone::None;
}

bool ConvergenceTrace::converged(double rel_tol) const {
  if (points_.size() < 3) return false;
  for (std::size_t i = points_.size() - 2; i < points_.size(); ++i) {
    const double a = points_[i - 1].value;
    const double b = points_[i].value;
    if (std::abs(b - a) >= rel_tol * std::max(1.0, std::abs(b))) return false;
  }
  return true;
}

void ConvergenceTrace::write_csv(std::ostream& os) const {
  os << "window_label,n_sites,value,delta\n";
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double delta = i == 0 ? 0.0 : points_[i].value - points_[i - 1].value;
    os << points_[i].label << ',' << points_[i].n_sites << ',' << format_double(points_[i].value)
       << ',' << format_double(delta) << '\n';
  }
}

}  // namespace rdpp
