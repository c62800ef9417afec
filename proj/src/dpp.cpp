#include "rkhs_dpp/dpp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "rkhs_dpp/errors.hpp"
#include "rkhs_dpp/rng.hpp"
#include "rkhs_dpp/variational.hpp"

namespace rdpp {

namespace {

constexpr double kSpectrumGuard = 1e-12;

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void require_subset(const Window& sub, const Window& host) {
  if (!sub.is_subset_of(host)) {
    throw Error(ErrorKind::SiteNotInWindow, sub.label() + " not inside " + host.label());
  }
}

Eigen::MatrixXd k_from_a_bracket(const KernelMatrix& a_bracket) {
  const auto n = static_cast<Eigen::Index>(a_bracket.size());
  const Eigen::MatrixXd i_plus_a = Eigen::MatrixXd::Identity(n, n) + a_bracket.entries();
  return symmetrized(i_plus_a.llt().solve(a_bracket.entries()));
}

}  // namespace

DppWindowModel::DppWindowModel(Window window, Window ambient, Eigen::MatrixXd k_matrix,
                               KernelMatrix a_bracket)
    : window_(std::move(window)),
      ambient_(std::move(ambient)),
      k_(std::move(k_matrix)),
      a_bracket_(std::move(a_bracket)) {
  const auto n = static_cast<Eigen::Index>(window_.size());
  if (k_.rows() != n || k_.cols() != n || !(a_bracket_.window() == window_)) {
    throw Error(ErrorKind::InvalidArgument, "model parts do not match window " + window_.label());
  }
  if (!window_.is_subset_of(ambient_)) {
    throw Error(ErrorKind::SiteNotInWindow, "ambient does not contain the window");
  }
  if (n == 0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k_, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (hi >= 1.0 - kSpectrumGuard) {
    throw Error(ErrorKind::SpectrumAtOne,
                "max eigenvalue of K is " + format_double(hi) + " on " + window_.label());
  }
  if (lo < -1e-12) {
    throw Error(ErrorKind::InvariantViolation, "K has negative eigenvalue " + format_double(lo));
  }
  const Eigen::LLT<Eigen::MatrixXd> i_minus_k(Eigen::MatrixXd::Identity(n, n) - k_);
  if (i_minus_k.info() != Eigen::Success) {
    throw Error(ErrorKind::SpectrumAtOne, "I - K is not positive definite");
  }
  double ld = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) ld += 2.0 * std::log(i_minus_k.matrixL()(i, i));
  const KernelMatrix i_plus_a(window_, Eigen::MatrixXd::Identity(n, n) + a_bracket_.entries());
  const double product_log = ld + log_det(i_plus_a);
  if (std::abs(std::expm1(product_log)) > 1e-10) {
    throw Error(ErrorKind::InvariantViolation,
                "det(I-K) det(I+A_[L]) = " + format_double(std::exp(product_log)));
  }
  log_det_i_minus_k_ = -log_det(i_plus_a);
}

DppWindowModel build_model(const OperatorSpec& spec, const Window& window, int ambient_factor) {
  if (window.empty()) throw Error(ErrorKind::InvalidWindow, "model window must be nonempty");
  const Window ambient = enlarge(window, ambient_factor);
  const KernelMatrix a = materialize(spec, ambient);
  // A_[L] = Schur_L(I + A_Delta) - I, written without the identity shift so
  // that small entries keep their relative accuracy.
  const Window outside = set_difference(ambient, window);
  Eigen::MatrixXd a_bracket = block(a, window, window);
  if (!outside.empty()) {
    const auto m = static_cast<Eigen::Index>(outside.size());
    const Eigen::MatrixXd shifted = Eigen::MatrixXd::Identity(m, m) + block(a, outside, outside);
    const Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    const Eigen::MatrixXd half = llt.matrixL().solve(block(a, outside, window));
    a_bracket -= half.transpose() * half;
  }
  KernelMatrix bracket(window, symmetrized(a_bracket));
  Eigen::MatrixXd k = k_from_a_bracket(bracket);
  return DppWindowModel(window, ambient, std::move(k), std::move(bracket));
}

DppWindowModel model_from_kernel(const Window& window, const Eigen::MatrixXd& k) {
  const auto n = static_cast<Eigen::Index>(window.size());
  if (k.rows() != n || k.cols() != n) {
    throw Error(ErrorKind::InvalidArgument, "K does not match window " + window.label());
  }
  const Eigen::MatrixXd ks = symmetrized(k);
  const Eigen::LLT<Eigen::MatrixXd> i_minus_k(Eigen::MatrixXd::Identity(n, n) - ks);
  if (i_minus_k.info() != Eigen::Success) {
    throw Error(ErrorKind::SpectrumAtOne, "I - K is not positive definite");
  }
  KernelMatrix bracket(window, symmetrized(i_minus_k.solve(ks)));
  return DppWindowModel(window, window, ks, std::move(bracket));
}

double ambient_discrepancy(const OperatorSpec& spec, const Window& window, int f1, int f2) {
  const DppWindowModel m1 = build_model(spec, window, f1);
  const DppWindowModel m2 = build_model(spec, window, f2);
  return max_abs(m1.k_matrix() - m2.k_matrix());
}

double correlation(const DppWindowModel& model, const Configuration& x) {
  require_subset(x, model.window());
  if (x.empty()) return 1.0;
  const auto idx = model.window().indices_of(x);
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd sub(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      sub(i, j) = model.k_matrix()(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                                   static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
    }
  }
  return sub.determinant();
}

double log_marginal(const DppWindowModel& model, const Configuration& xi) {
  require_subset(xi, model.window());
  return model.log_det_i_minus_k() + log_det(submatrix(model.a_bracket(), xi));
}

double marginal(const DppWindowModel& model, const Configuration& xi) {
  return std::exp(log_marginal(model, xi));
}

double papangelou(const DppWindowModel& model, SiteIndex x0, const Configuration& xi) {
  model.window().require_index(x0);
  if (xi.contains(x0)) {
    throw Error(ErrorKind::SiteInConfiguration, "x0 = " + std::to_string(x0) + " is in xi");
  }
  require_subset(xi, model.window());
  return finite_a(submatrix(model.a_bracket(), xi.with(x0)), x0, xi).value;
}

double PapangelouStudy::worst_alpha_sandwich() const {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    worst = std::min(worst, (alpha.value(i) - papangelou.value(i)) / std::abs(alpha.value(i)));
  }
  return worst;
}

double PapangelouStudy::worst_beta_sandwich() const {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < beta.size(); ++i) {
    worst = std::min(worst, (beta.value(i) - beta_bracket.value(i)) / std::abs(beta.value(i)));
  }
  return worst;
}

ConvergenceTrace PapangelouStudy::gap() const {
  ConvergenceTrace out;
  for (std::size_t i = 0; i < papangelou.size(); ++i) {
    const TracePoint& p = papangelou.points()[i];
    out.push(p.label, p.n_sites, std::abs(p.value - alpha.value(i)));
  }
  return out;
}

PapangelouStudy papangelou_trace(const OperatorSpec& spec, SiteIndex x0,
                                 const SitePredicate& xi_rule,
                                 const std::vector<Window>& schedule, int ambient_factor) {
  if (xi_rule(x0)) throw Error(ErrorKind::SiteInConfiguration, "xi rule selects x0");
  const SitePredicate r2 = [&xi_rule, x0](SiteIndex s) { return s != x0 && !xi_rule(s); };
  PapangelouStudy study;
  study.alpha = alpha_trace(spec, x0, xi_rule, schedule);
  study.beta = beta_trace(spec, x0, r2, schedule, ambient_factor, AmbientMode::PerWindow);
  for (const Window& w : schedule) {
    const DppWindowModel model = build_model(spec, w, ambient_factor);
    const Configuration xi(w.filter(xi_rule));
    study.papangelou.push(w.label(), w.size(), papangelou(model, x0, xi));
    const Window lambda2 = w.filter(r2);
    const KernelMatrix b_bracket = submatrix(inverse(model.a_bracket()), lambda2.with(x0));
    study.beta_bracket.push(w.label(), w.size(), finite_a(b_bracket, x0, lambda2).value);
  }
  return study;
}

Configuration sample(const DppWindowModel& model, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Eigen::MatrixXd k = model.k_matrix();
  const auto n = k.rows();
  std::vector<SiteIndex> chosen;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = std::clamp(k(i, i), 0.0, 1.0);
    const bool take = rng.uniform() < p;
    if (take) chosen.push_back(model.window()[static_cast<std::size_t>(i)]);
    const Eigen::Index rest = n - i - 1;
    if (rest == 0) break;
    const double pivot = take ? k(i, i) : k(i, i) - 1.0;
    if (pivot == 0.0) continue;
    const Eigen::VectorXd col = k.col(i).tail(rest);
    k.bottomRightCorner(rest, rest) -= col * col.transpose() / pivot;
  }
  return Configuration(Window(std::move(chosen)));
}

std::pair<double, double> check_bracket_bounds(const OperatorSpec& spec, const Window& window,
                                        int ambient_factor) {
  const DppWindowModel model = build_model(spec, window, ambient_factor);
  const KernelMatrix a = materialize(spec, window);
  const Eigen::MatrixXd d_a = a.entries() - model.a_bracket().entries();
  const double first = min_eigenvalue(d_a) / std::max(max_abs(a.entries()), 1e-300);

  const KernelMatrix b_hat = submatrix(inverse(materialize(spec, model.ambient())), window);
  const KernelMatrix b_bracket = inverse(model.a_bracket());
  const Eigen::MatrixXd d_b = b_hat.entries() - b_bracket.entries();
  const double second = min_eigenvalue(d_b) / std::max(max_abs(b_hat.entries()), 1e-300);
  return {first, second};
}

}  // namespace rdpp
