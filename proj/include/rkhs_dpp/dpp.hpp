#pragma once

#include <cstdint>
#include <utility>

#include <Eigen/Dense>

#include "rkhs_dpp/kernel_matrix.hpp"
#include "rkhs_dpp/trace.hpp"

namespace rdpp {

/// DPP restricted to a window: K_Lambda and A_[Lambda] = K_Lambda (I - K_Lambda)^{-1}.
class DppWindowModel {
 public:
  /// Checks 0 <= K, max eigenvalue < 1 - 1e-12 (SpectrumAtOne), and the
  /// determinant identity det(I-K) det(I+A_[Lambda]) = 1.
  DppWindowModel(Window window, Window ambient, Eigen::MatrixXd k_matrix, KernelMatrix a_bracket);

  const Window& window() const { return window_; }
  /// Window used for the truncation of A (equal to window() for models built from K).
  const Window& ambient() const { return ambient_; }
  const Eigen::MatrixXd& k_matrix() const { return k_; }
  const KernelMatrix& a_bracket() const { return a_bracket_; }
  /// log det(I - K_Lambda) = -log det(I + A_[Lambda]).
  double log_det_i_minus_k() const { return log_det_i_minus_k_; }

 private:
  Window window_;
  Window ambient_;
  Eigen::MatrixXd k_;
  KernelMatrix a_bracket_;
  double log_det_i_minus_k_ = 0.0;
};

/// K = A_Delta (I + A_Delta)^{-1} on Delta = enlarge(window, ambient_factor),
/// restricted to window.
DppWindowModel build_model(const OperatorSpec& spec, const Window& window, int ambient_factor);

/// Model from an explicit K with spectrum in [0, 1).
DppWindowModel model_from_kernel(const Window& window, const Eigen::MatrixXd& k);

/// Max-norm difference of K_Lambda between ambient factors f1 and f2.
double ambient_discrepancy(const OperatorSpec& spec, const Window& window, int f1, int f2);

/// det K(X, X).
double correlation(const DppWindowModel& model, const Configuration& x);

/// det(I - K_Lambda) det A_[Lambda](xi, xi).
double marginal(const DppWindowModel& model, const Configuration& xi);
double log_marginal(const DppWindowModel& model, const Configuration& xi);

/// Schur complement of A_[Lambda](x0 xi, x0 xi) onto x0.
double papangelou(const DppWindowModel& model, SiteIndex x0, const Configuration& xi);

struct PapangelouStudy {
  /// alpha_[Lambda] with xi = the rule's sites in each window.
  ConvergenceTrace papangelou;
  /// alpha_Lambda with R1 = xi.
  ConvergenceTrace alpha;
  /// beta_[Lambda] = 1 / (A_[Lambda]^{-1} restricted to x0 u (Lambda \ xi), Schur onto x0).
  ConvergenceTrace beta_bracket;
  /// beta_Lambda with R2 = Lambda \ (xi u x0), + norm through the same ambient.
  ConvergenceTrace beta;

  /// min over schedule of alpha - papangelou, relative to alpha (>= 0 when the bound holds).
  double worst_alpha_sandwich() const;
  double worst_beta_sandwich() const;
  /// |papangelou - alpha| / alpha at each schedule point.
  ConvergenceTrace gap() const;
};

PapangelouStudy papangelou_trace(const OperatorSpec& spec, SiteIndex x0,
                                 const SitePredicate& xi_rule,
                                 const std::vector<Window>& schedule, int ambient_factor);

/// Exact chain-rule sample over window order.
Configuration sample(const DppWindowModel& model, std::uint64_t seed);

/// Most negative eigenvalues of (A_Lambda - A_[Lambda]) and (B_hat_Lambda - B_[Lambda]),
/// each divided by the max-norm of the larger side. B_hat uses the model's ambient.
std::pair<double, double> check_bracket_bounds(const OperatorSpec& spec, const Window& window,
                                        int ambient_factor);

}  // namespace rdpp
