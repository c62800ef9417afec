#include "rkhs_dpp/kernel_matrix.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "rkhs_dpp/errors.hpp"

namespace rdpp {

namespace {

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    }
  }
  return out;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

EpsilonShift::EpsilonShift(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorKind::InvalidArgument, "epsilon shift must be finite and >= 0");
  }
}

KernelMatrix::KernelMatrix(Window window, Eigen::MatrixXd entries)
    : window_(std::move(window)), entries_(std::move(entries)) {
  const auto n = static_cast<Eigen::Index>(window_.size());
  if (entries_.rows() != n || entries_.cols() != n) {
    throw Error(ErrorKind::InvalidArgument, "matrix dimension does not match window");
  }
  if (n == 0) return;
  if (!entries_.allFinite()) {
    throw Error(ErrorKind::FamilyEvaluation, "matrix has non-finite entries");
  }
  const double scale = entries_.cwiseAbs().maxCoeff();
  if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorKind::InvalidArgument, "matrix is not symmetric on " + window_.label());
  }
  llt_.compute(entries_);
  if (llt_.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite,
                "Cholesky failed on window " + window_.label());
  }
  const auto diag = llt_.matrixLLT().diagonal();
  if (!(diag.array() > 0.0).all() || !diag.allFinite()) {
    throw Error(ErrorKind::NotPositiveDefinite,
                "nonpositive Cholesky pivot on window " + window_.label());
  }
}

double KernelMatrix::at(SiteIndex x, SiteIndex y) const {
  return entries_(static_cast<Eigen::Index>(window_.require_index(x)),
                  static_cast<Eigen::Index>(window_.require_index(y)));
}

KernelMatrix materialize(const OperatorSpec& spec, const Window& window, EpsilonShift shift) {
  if (window.empty()) {
    throw Error(ErrorKind::InvalidArgument, "materialize needs a nonempty window");
  }
  const auto n = static_cast<Eigen::Index>(window.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = spec.entry(window[static_cast<std::size_t>(i)],
                                  window[static_cast<std::size_t>(j)]);
      m(i, j) = v;
      m(j, i) = v;
    }
    m(i, i) += shift.epsilon();
  }
  return KernelMatrix(window, std::move(m));
}

Eigen::MatrixXd block(const KernelMatrix& m, const Window& rows, const Window& cols) {
  return gather(m.entries(), m.window().indices_of(rows), m.window().indices_of(cols));
}

KernelMatrix submatrix(const KernelMatrix& m, const Window& sub) {
  if (sub == m.window()) return m;
  return KernelMatrix(sub, block(m, sub, sub));
}

double log_det(const KernelMatrix& m) {
  if (m.size() == 0) return 0.0;
  return 2.0 * m.cholesky().matrixLLT().diagonal().array().log().sum();
}

KernelMatrix schur_complement(const KernelMatrix& m, const Window& keep) {
  if (!keep.is_subset_of(m.window())) {
    throw Error(ErrorKind::SiteNotInWindow,
                "keep set " + keep.label() + " not inside " + m.window().label());
  }
  const Window elim = set_difference(m.window(), keep);
  Eigen::MatrixXd kk = block(m, keep, keep);
  if (elim.empty() || keep.empty()) return KernelMatrix(keep, std::move(kk));
  const KernelMatrix ee = submatrix(m, elim);
  // X = L^{-1} M(elim,keep), so M(keep,elim) M(elim,elim)^{-1} M(elim,keep) = X^T X.
  const Eigen::MatrixXd x = ee.cholesky().matrixL().solve(block(m, elim, keep));
  return KernelMatrix(keep, symmetrized(kk - x.transpose() * x));
}

KernelMatrix inverse(const KernelMatrix& m) {
  if (m.size() == 0) return m;
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd inv = m.cholesky().solve(Eigen::MatrixXd::Identity(n, n));
  return KernelMatrix(m.window(), symmetrized(inv));
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  if (symmetric.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(symmetric),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double InverseTrace::last_relative_change() const {
  if (blocks.size() < 2) return std::numeric_limits<double>::infinity();
  const auto& a = blocks[blocks.size() - 2].entries();
  const auto& b = blocks.back().entries();
  const double scale = std::max(b.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  return (b - a).cwiseAbs().maxCoeff() / scale;
}

double InverseTrace::worst_loewner_step() const {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    const auto& next = blocks[i].entries();
    const double scale = std::max(next.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    worst = std::min(worst, min_eigenvalue(next - blocks[i - 1].entries()) / scale);
  }
  return worst;
}

InverseTrace approx_B(const OperatorSpec& spec, const Window& target,
                      const std::vector<Window>& ambient_schedule) {
  if (ambient_schedule.empty()) {
    throw Error(ErrorKind::ScheduleNotNested, "empty ambient schedule");
  }
  if (!is_nested_increasing(ambient_schedule)) {
    throw Error(ErrorKind::ScheduleNotNested, "ambient windows must be strictly nested");
  }
  if (!target.is_subset_of(ambient_schedule.front())) {
    throw Error(ErrorKind::ScheduleNotNested,
                "target " + target.label() + " not inside first ambient window");
  }
  InverseTrace out;
  for (const Window& ambient : ambient_schedule) {
    const KernelMatrix inv = inverse(materialize(spec, ambient));
    out.ambients.push_back(ambient);
    out.blocks.push_back(submatrix(inv, target));
  }
  return out;
}

}  // namespace rdpp
