#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rkhs_dpp/kernel_matrix.hpp"
#include "rkhs_dpp/trace.hpp"

namespace rdpp {

/// Host window split as {x0} u r1 u r2, pairwise disjoint.
struct TriplePartition {
  SiteIndex x0 = 0;
  Window r1;
  Window r2;

  /// Throws OverlappingSets / SiteNotInWindow unless the parts partition `host`.
  void validate(const Window& host) const;
};

/// Minimum value of a projection problem and its minimizer, indexed by `support`.
struct VariationalResult {
  double value = 0.0;
  Eigen::VectorXd minimizer;
  Window support;
};

/// a = inf_{f on lambda1} ||e_x0 - f||_-^2 under the quadratic form of C.
/// The value is the Schur complement of C(x0 lambda1) onto x0 and the minimizer
/// is C(l1,l1)^{-1} C(l1,x0).
VariationalResult finite_a(const KernelMatrix& c, SiteIndex x0, const Window& lambda1);

/// b = inf_{g on lambda2} ||e_x0 - g||_+^2, the same problem for C^{-1}.
VariationalResult finite_b(const KernelMatrix& c, SiteIndex x0, const Window& lambda2);

/// (e_x0 - f)^T M (e_x0 - f) for f supported on `result.support`.
double quadratic_form_at(const KernelMatrix& m, SiteIndex x0, const VariationalResult& result);

/// The three closed forms of the minimum value: determinant ratio, reciprocal
/// of the x0 entry of the inverse, and the Schur complement.
struct ReductionForms {
  double determinant_ratio = 0.0;
  double inverse_entry = 0.0;
  double schur = 0.0;

  double max_pairwise_relative_difference() const;
};

ReductionForms a_forms(const KernelMatrix& c, SiteIndex x0, const Window& lambda1);
ReductionForms b_forms(const KernelMatrix& c, SiteIndex x0, const Window& lambda2);

/// |a * b - 1| for a partition of C's window.
double verify_ab(const KernelMatrix& c, const TriplePartition& part);

/// alpha_Lambda over a nested schedule: finite_a on A_Lambda with
/// lambda1 = Lambda n R1. Throws OverlappingSets if r1(x0).
ConvergenceTrace alpha_trace(const OperatorSpec& spec, SiteIndex x0, const SitePredicate& r1,
                             const std::vector<Window>& schedule);

enum class AmbientMode {
  /// Each window uses its own enlargement (a double limit).
  PerWindow,
  /// Every window uses the enlargement of the last window, so the trace is
  /// a pure window limit and nonincreasing.
  Fixed,
};

/// beta_Lambda over a nested schedule, with the + norm realized through the
/// inverse of A on the enlarged ambient window.
ConvergenceTrace beta_trace(const OperatorSpec& spec, SiteIndex x0, const SitePredicate& r2,
                            const std::vector<Window>& schedule, int ambient_factor,
                            AmbientMode mode = AmbientMode::PerWindow);

struct LimitCheck {
  ConvergenceTrace alpha;
  ConvergenceTrace beta;
  /// |alpha_hat * beta_hat - 1| on the final values.
  double residual = 0.0;
};

/// alpha and beta traces with R2 = complement of R1 u {x0}.
LimitCheck alpha_beta_limit_check(const OperatorSpec& spec, SiteIndex x0, const SitePredicate& r1,
                                  const std::vector<Window>& schedule, int ambient_factor);

/// Largest |a2(x)| over x in R1 of the ambient, where
/// a2 = A_Delta (e_x0 - f0) - alpha e_x0 and f0 is the window minimizer.
/// The infinite-volume vector is supported on R2; at finite truncation the
/// leak onto R1 is a diagnostic only.
double a2_support_leak(const OperatorSpec& spec, SiteIndex x0, const SitePredicate& r1,
                       const Window& window, int ambient_factor);

}  // namespace rdpp
