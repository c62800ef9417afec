#include "rkhs_dpp/variational.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "rkhs_dpp/errors.hpp"

namespace rdpp {

namespace {

void check_problem(const KernelMatrix& c, SiteIndex x0, const Window& lambda) {
  c.window().require_index(x0);
  if (lambda.contains(x0)) {
    throw Error(ErrorKind::OverlappingSets, "x0 must not belong to the optimized set");
  }
  if (!lambda.is_subset_of(c.window())) {
    throw Error(ErrorKind::SiteNotInWindow,
                lambda.label() + " not inside " + c.window().label());
  }
}

VariationalResult minimize(const KernelMatrix& c, SiteIndex x0, const Window& lambda) {
  check_problem(c, x0, lambda);
  VariationalResult out;
  out.support = lambda;
  const Window x0_only({x0});
  const double c00 = c.at(x0, x0);
  if (lambda.empty()) {
    out.value = c00;
    out.minimizer = Eigen::VectorXd(0);
    return out;
  }
  const KernelMatrix ll = submatrix(c, lambda);
  const Eigen::VectorXd rhs = block(c, lambda, x0_only).col(0);
  out.minimizer = ll.cholesky().solve(rhs);
  const Eigen::VectorXd half = ll.cholesky().matrixL().solve(rhs);
  out.value = c00 - half.squaredNorm();
  return out;
}

double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

ReductionForms forms(const KernelMatrix& c, SiteIndex x0, const Window& lambda) {
  check_problem(c, x0, lambda);
  const Window with_x0 = lambda.with(x0);
  const KernelMatrix big = submatrix(c, with_x0);
  ReductionForms f;
  f.determinant_ratio =
      std::exp(log_det(big) - (lambda.empty() ? 0.0 : log_det(submatrix(c, lambda))));
  f.inverse_entry = 1.0 / inverse(big).at(x0, x0);
  f.schur = schur_complement(big, Window({x0})).entries()(0, 0);
  return f;
}

}  // namespace

void TriplePartition::validate(const Window& host) const {
  if (r1.contains(x0) || r2.contains(x0) || !disjoint(r1, r2)) {
    throw Error(ErrorKind::OverlappingSets, "partition parts overlap");
  }
  const Window all = set_union(set_union(r1, r2), Window({x0}));
  if (!(all == host)) {
    throw Error(ErrorKind::SiteNotInWindow, "partition does not cover " + host.label());
  }
}

VariationalResult finite_a(const KernelMatrix& c, SiteIndex x0, const Window& lambda1) {
  return minimize(c, x0, lambda1);
}

VariationalResult finite_b(const KernelMatrix& c, SiteIndex x0, const Window& lambda2) {
  check_problem(c, x0, lambda2);
  return minimize(inverse(c), x0, lambda2);
}

double quadratic_form_at(const KernelMatrix& m, SiteIndex x0, const VariationalResult& result) {
  const Window sites = result.support.with(x0);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sites.size()));
  v(static_cast<Eigen::Index>(sites.require_index(x0))) = 1.0;
  for (std::size_t i = 0; i < result.support.size(); ++i) {
    v(static_cast<Eigen::Index>(sites.require_index(result.support[i]))) -=
        result.minimizer(static_cast<Eigen::Index>(i));
  }
  return v.dot(block(m, sites, sites) * v);
}

double ReductionForms::max_pairwise_relative_difference() const {
  return std::max({rel_diff(determinant_ratio, inverse_entry), rel_diff(determinant_ratio, schur),
                   rel_diff(inverse_entry, schur)});
}

ReductionForms a_forms(const KernelMatrix& c, SiteIndex x0, const Window& lambda1) {
  return forms(c, x0, lambda1);
}

ReductionForms b_forms(const KernelMatrix& c, SiteIndex x0, const Window& lambda2) {
  check_problem(c, x0, lambda2);
  return forms(inverse(c), x0, lambda2);
}

double verify_ab(const KernelMatrix& c, const TriplePartition& part) {
  part.validate(c.window());
  const double a = finite_a(c, part.x0, part.r1).value;
  const double b = finite_b(c, part.x0, part.r2).value;
  return std::abs(a * b - 1.0);
}

ConvergenceTrace alpha_trace(const OperatorSpec& spec, SiteIndex x0, const SitePredicate& r1,
                             const std::vector<Window>& schedule) {
  if (r1(x0)) throw Error(ErrorKind::OverlappingSets, "x0 belongs to R1");
  if (!is_nested_increasing(schedule)) {
    throw Error(ErrorKind::ScheduleNotNested, "alpha schedule must be nested");
  }
  ConvergenceTrace trace;
  for (const Window& w : schedule) {
    w.require_index(x0);
    const Window lambda1 = w.filter(r1);
    // Only x0 u lambda1 enters the problem; materialize the whole window so
    // the positive-definiteness check covers it.
    const KernelMatrix c = materialize(spec, w);
    trace.push(w.label(), w.size(), finite_a(c, x0, lambda1).value);
  }
  return trace;
}

ConvergenceTrace beta_trace(const OperatorSpec& spec, SiteIndex x0, const SitePredicate& r2,
                            const std::vector<Window>& schedule, int ambient_factor,
                            AmbientMode mode) {
  if (r2(x0)) throw Error(ErrorKind::OverlappingSets, "x0 belongs to R2");
  if (!is_nested_increasing(schedule)) {
    throw Error(ErrorKind::ScheduleNotNested, "beta schedule must be nested");
  }
  ConvergenceTrace trace;
  if (schedule.empty()) return trace;
  std::optional<KernelMatrix> fixed_inverse;
  if (mode == AmbientMode::Fixed) {
    fixed_inverse = inverse(materialize(spec, enlarge(schedule.back(), ambient_factor)));
  }
  for (const Window& w : schedule) {
    w.require_index(x0);
    const Window lambda2 = w.filter(r2);
    const Window sites = lambda2.with(x0);
    const KernelMatrix b_hat =
        mode == AmbientMode::Fixed
            ? submatrix(*fixed_inverse, sites)
            : submatrix(inverse(materialize(spec, enlarge(w, ambient_factor))), sites);
    // finite_a on the approximate inverse kernel is the + norm problem.
    trace.push(w.label(), w.size(), finite_a(b_hat, x0, lambda2).value);
  }
  return trace;
}

LimitCheck alpha_beta_limit_check(const OperatorSpec& spec, SiteIndex x0, const SitePredicate& r1,
                                  const std::vector<Window>& schedule, int ambient_factor) {
  const SitePredicate r2 = [&r1, x0](SiteIndex s) { return s != x0 && !r1(s); };
  LimitCheck out;
  out.alpha = alpha_trace(spec, x0, r1, schedule);
  out.beta = beta_trace(spec, x0, r2, schedule, ambient_factor);
  out.residual = std::abs(out.alpha.final_value() * out.beta.final_value() - 1.0);
  return out;
}

double a2_support_leak(const OperatorSpec& spec, SiteIndex x0, const SitePredicate& r1,
                       const Window& window, int ambient_factor) {
  const Window ambient = enlarge(window, ambient_factor);
  const KernelMatrix a_window = materialize(spec, window);
  const VariationalResult f0 = finite_a(a_window, x0, window.filter(r1));
  const KernelMatrix a_ambient = materialize(spec, ambient);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ambient.size()));
  v(static_cast<Eigen::Index>(ambient.require_index(x0))) = 1.0;
  for (std::size_t i = 0; i < f0.support.size(); ++i) {
    v(static_cast<Eigen::Index>(ambient.require_index(f0.support[i]))) -=
        f0.minimizer(static_cast<Eigen::Index>(i));
  }
  const Eigen::VectorXd a2 = a_ambient.entries() * v;
  double leak = 0.0;
  for (std::size_t i = 0; i < ambient.size(); ++i) {
    if (r1(ambient[i])) leak = std::max(leak, std::abs(a2(static_cast<Eigen::Index>(i))));
  }
  return leak;
}

}  // namespace rdpp
