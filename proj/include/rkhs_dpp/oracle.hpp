#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "rkhs_dpp/dpp.hpp"
#include "rkhs_dpp/variational.hpp"

/// Brute-force reference implementations. Nothing here calls the Cholesky,
/// Schur or determinant code of the main library.
namespace rdpp::oracle {

/// Row-major dense matrix with its own elimination routines.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  static DenseMatrix from_eigen(const Eigen::MatrixXd& m);
  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  DenseMatrix select(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Laplace expansion along the first row for n <= 6, partial-pivot LU beyond.
/// det of the 0x0 matrix is 1.
double determinant(const DenseMatrix& m);
double cofactor_determinant(const DenseMatrix& m);
double lu_determinant(DenseMatrix m);

/// Gaussian elimination with partial pivoting; throws InvalidArgument if singular.
std::vector<double> solve(DenseMatrix m, std::vector<double> rhs);

/// All 2^n window configurations with probabilities, indexed by bitmask
/// (bit i set iff window[i] is present).
class ExactDistribution {
 public:
  static constexpr std::size_t kMaxSites = 20;

  ExactDistribution(Window window, std::vector<double> probs);

  const Window& window() const { return window_; }
  const std::vector<double>& probs() const { return probs_; }
  double probability(const Configuration& xi) const;
  double total() const;

  /// Columns config,probability with the bitmask in the first column.
  void write_csv(std::ostream& os) const;

 private:
  Window window_;
  std::vector<double> probs_;
};

/// Every marginal through det(P_xi K + P_{xi^c}(I - K)). Throws WindowTooLarge
/// above kMaxSites and InvariantViolation if the total misses 1 by 1e-12.
ExactDistribution enumerate_distribution(const DppWindowModel& model);

/// Sum of probabilities of configurations containing X.
double oracle_correlation(const ExactDistribution& dist, const Configuration& x);

/// Normal equations C(l1,l1) f = C(l1,x0), then the quadratic form at f.
VariationalResult oracle_minimize(const KernelMatrix& c, SiteIndex x0, const Window& lambda1);

/// Sum over X of det M(X, X). Exponential; intended for n <= 16.
double subset_sum_determinants(const DenseMatrix& m);

/// -log(det A(zeta u b) / det A(b)) with b the boundary sites, by direct determinants.
double energy_by_determinants(const OperatorSpec& spec, const Window& zeta, const Window& boundary);

}  // namespace rdpp::oracle
