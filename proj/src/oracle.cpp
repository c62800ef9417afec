#include "rkhs_dpp/oracle.hpp"

#include <cmath>
#include <ostream>
#include <utility>

#include "rkhs_dpp/errors.hpp"
#include "rkhs_dpp/trace.hpp"

namespace rdpp::oracle {

namespace {

std::vector<std::size_t> positions(const Window& host, const Window& sub) {
  return host.indices_of(sub);
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix DenseMatrix::from_eigen(const Eigen::MatrixXd& m) {
  DenseMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) {
      out(i, j) = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

DenseMatrix DenseMatrix::select(const std::vector<std::size_t>& rows,
                                const std::vector<std::size_t>& cols) const {
  DenseMatrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = (*this)(rows[i], cols[j]);
  }
  return out;
}

double cofactor_determinant(const DenseMatrix& m) {
  const std::size_t n = m.rows();
  if (n == 0) return 1.0;
  if (n == 1) return m(0, 0);
  if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  double det = 0.0;
  double sign = 1.0;
  std::vector<std::size_t> rest_rows(n - 1);
  for (std::size_t i = 1; i < n; ++i) rest_rows[i - 1] = i;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::size_t> rest_cols;
    for (std::size_t c = 0; c < n; ++c) {
      if (c != j) rest_cols.push_back(c);
    }
    if (m(0, j) != 0.0) det += sign * m(0, j) * cofactor_determinant(m.select(rest_rows, rest_cols));
    sign = -sign;
  }
  return det;
}

double lu_determinant(DenseMatrix m) {
  const std::size_t n = m.rows();
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
    }
    if (m(p, k) == 0.0) return 0.0;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
      det = -det;
    }
    det *= m(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m(i, k) / m(k, k);
      for (std::size_t j = k; j < n; ++j) m(i, j) -= f * m(k, j);
    }
  }
  return det;
}

double determinant(const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::InvalidArgument, "determinant of non-square matrix");
  return m.rows() <= 6 ? cofactor_determinant(m) : lu_determinant(m);
}

std::vector<double> solve(DenseMatrix m, std::vector<double> rhs) {
  const std::size_t n = m.rows();
  if (m.cols() != n || rhs.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "solve: dimension mismatch");
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
    }
    if (m(p, k) == 0.0) throw Error(ErrorKind::InvalidArgument, "solve: singular matrix");
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
      std::swap(rhs[k], rhs[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m(i, k) / m(k, k);
      for (std::size_t j = k; j < n; ++j) m(i, j) -= f * m(k, j);
      rhs[i] -= f * rhs[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= m(i, j) * x[j];
    x[i] = s / m(i, i);
  }
  return x;
}

ExactDistribution::ExactDistribution(Window window, std::vector<double> probs)
    : window_(std::move(window)), probs_(std::move(probs)) {
  if (window_.size() > kMaxSites) {
    throw Error(ErrorKind::WindowTooLarge, std::to_string(window_.size()) + " sites");
  }
  if (probs_.size() != (std::size_t{1} << window_.size())) {
    throw Error(ErrorKind::InvalidArgument, "need 2^n probabilities");
  }
}

double ExactDistribution::probability(const Configuration& xi) const {
  return probs_[to_bitmask(window_, xi)];
}

double ExactDistribution::total() const {
  double s = 0.0;
  for (double p : probs_) s += p;
  return s;
}

void ExactDistribution::write_csv(std::ostream& os) const {
  os << "config,probability\n";
  for (std::size_t mask = 0; mask < probs_.size(); ++mask) {
    os << mask << ',' << format_double(probs_[mask]) << '\n';
  }
}

ExactDistribution enumerate_distribution(const DppWindowModel& model) {
  const std::size_t n = model.window().size();
  if (n > ExactDistribution::kMaxSites) {
    throw Error(ErrorKind::WindowTooLarge, std::to_string(n) + " sites exceeds the oracle cap");
  }
  const DenseMatrix k = DenseMatrix::from_eigen(model.k_matrix());
  std::vector<double> probs(std::size_t{1} << n);
  for (std::size_t mask = 0; mask < probs.size(); ++mask) {
    DenseMatrix mixed(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const bool in = (mask >> i) & 1U;
      for (std::size_t j = 0; j < n; ++j) {
        mixed(i, j) = in ? k(i, j) : (i == j ? 1.0 : 0.0) - k(i, j);
      }
    }
    probs[mask] = determinant(mixed);
  }
  ExactDistribution dist(model.window(), std::move(probs));
  if (std::abs(dist.total() - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvariantViolation,
                "oracle distribution sums to " + format_double(dist.total()));
  }
  return dist;
}

double oracle_correlation(const ExactDistribution& dist, const Configuration& x) {
  const std::uint64_t need = to_bitmask(dist.window(), x);
  double s = 0.0;
  for (std::size_t mask = 0; mask < dist.probs().size(); ++mask) {
    if ((mask & need) == need) s += dist.probs()[mask];
  }
  return s;
}

VariationalResult oracle_minimize(const KernelMatrix& c, SiteIndex x0, const Window& lambda1) {
  const std::size_t i0 = c.window().require_index(x0);
  if (lambda1.contains(x0)) throw Error(ErrorKind::OverlappingSets, "x0 in lambda1");
  if (!lambda1.is_subset_of(c.window())) {
    throw Error(ErrorKind::SiteNotInWindow, lambda1.label() + " not inside " + c.window().label());
  }
  const DenseMatrix full = DenseMatrix::from_eigen(c.entries());
  const auto idx = positions(c.window(), lambda1);
  VariationalResult out;
  out.support = lambda1;
  std::vector<double> f;
  if (!idx.empty()) {
    std::vector<double> rhs(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) rhs[i] = full(idx[i], i0);
    f = solve(full.select(idx, idx), rhs);
  }
  // (e - f)^T C (e - f) expanded term by term.
  double q = full(i0, i0);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    q -= 2.0 * f[i] * full(idx[i], i0);
    for (std::size_t j = 0; j < idx.size(); ++j) q += f[i] * full(idx[i], idx[j]) * f[j];
  }
  out.value = q;
  out.minimizer = Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
  return out;
}

double subset_sum_determinants(const DenseMatrix& m) {
  const std::size_t n = m.rows();
  double s = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> sel;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1U) sel.push_back(i);
    }
    s += determinant(m.select(sel, sel));
  }
  return s;
}

double energy_by_determinants(const OperatorSpec& spec, const Window& zeta, const Window& boundary) {
  const Window all = set_union(zeta, boundary);
  const DenseMatrix a = DenseMatrix::from_eigen(materialize(spec, all).entries());
  const double num = determinant(a);
  const double den = determinant(a.select(positions(all, boundary), positions(all, boundary)));
  return -std::log(num / den);
}

}  // namespace rdpp::oracle
