#pragma once

#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "rkhs_dpp/operator_spec.hpp"
#include "rkhs_dpp/window.hpp"

namespace rdpp {

/// Nonnegative diagonal shift A(eps) = A + eps * I.
class EpsilonShift {
 public:
  EpsilonShift() = default;
  /// Throws InvalidArgument for negative or non-finite epsilon.
  explicit EpsilonShift(double epsilon);
  double epsilon() const { return epsilon_; }

 private:
  double epsilon_ = 0.0;
};

/// Symmetric positive-definite matrix on a window, with its Cholesky factor.
///
/// Construction checks symmetry (1e-12 relative) and factors the matrix; a
/// nonpositive pivot raises NotPositiveDefinite. There is no jitter. The 0x0
/// matrix on the empty window is valid.
class KernelMatrix {
 public:
  KernelMatrix(Window window, Eigen::MatrixXd entries);

  const Window& window() const { return window_; }
  const Eigen::MatrixXd& entries() const { return entries_; }
  const Eigen::LLT<Eigen::MatrixXd>& cholesky() const { return llt_; }
  std::size_t size() const { return window_.size(); }

  /// Entry addressed by site labels.
  double at(SiteIndex x, SiteIndex y) const;

 private:
  Window window_;
  Eigen::MatrixXd entries_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// entries[i][j] = A(w[i], w[j]) + eps * delta_ij.
KernelMatrix materialize(const OperatorSpec& spec, const Window& window,
                         EpsilonShift shift = EpsilonShift{});

/// Principal submatrix on `sub`; SiteNotInWindow if `sub` is not contained.
KernelMatrix submatrix(const KernelMatrix& m, const Window& sub);

/// 2 * sum(log diag(L)); 0 for the empty matrix.
double log_det(const KernelMatrix& m);

/// M(keep,keep) - M(keep,elim) M(elim,elim)^{-1} M(elim,keep), elim = window \ keep.
KernelMatrix schur_complement(const KernelMatrix& m, const Window& keep);

KernelMatrix inverse(const KernelMatrix& m);

/// Smallest eigenvalue of a symmetric matrix (+inf for 0x0).
double min_eigenvalue(const Eigen::MatrixXd& symmetric);

/// Raw block M(rows, cols) addressed by sites.
Eigen::MatrixXd block(const KernelMatrix& m, const Window& rows, const Window& cols);

/// Nested-ambient approximations ((A_Delta)^{-1})_target of the inverse kernel B.
struct InverseTrace {
  std::vector<Window> ambients;
  std::vector<KernelMatrix> blocks;

  const KernelMatrix& final() const { return blocks.back(); }
  /// Max-norm change between the last two blocks (relative to the last block's max-norm).
  double last_relative_change() const;
  bool converged(double rel_tol = 1e-8) const { return blocks.size() >= 2 && last_relative_change() < rel_tol; }
  /// Min over consecutive pairs of min-eig(next - prev) / max-norm(next); >= 0 up
  /// to roundoff when the sequence is Loewner nondecreasing.
  double worst_loewner_step() const;
};

/// Throws ScheduleNotNested unless the ambients are strictly nested and each
/// contains `target`.
InverseTrace approx_B(const OperatorSpec& spec, const Window& target,
                      const std::vector<Window>& ambient_schedule);

}  // namespace rdpp
