#include "rkhs_dpp/gibbs.hpp"

#include <algorithm>
#include <cmath>

#include "rkhs_dpp/errors.hpp"

namespace rdpp {

Window BoundaryCondition::exterior(const Window& ambient) const {
  return set_difference(set_intersection(xi, ambient), lambda);
}

double potential(const OperatorSpec& spec, const Configuration& xi) {
  if (xi.empty()) return 0.0;
  return -log_det(materialize(spec, xi));
}

double mutual_energy(const OperatorSpec& spec, const Configuration& xi1, const Configuration& xi2) {
  if (!disjoint(xi1, xi2)) throw Error(ErrorKind::OverlappingSets, "xi1 and xi2 intersect");
  if (xi1.empty() || xi2.empty()) return 0.0;
  const Configuration both(set_union(xi1, xi2));
  return potential(spec, both) - potential(spec, xi1) - potential(spec, xi2);
}

PhiMatrix phi_matrix(const OperatorSpec& spec, const BoundaryCondition& bc, const Window& ambient) {
  if (!bc.lambda.is_subset_of(ambient)) {
    throw Error(ErrorKind::SiteNotInWindow, bc.lambda.label() + " not inside " + ambient.label());
  }
  const Window outer = bc.exterior(ambient);
  const KernelMatrix a = materialize(spec, set_union(bc.lambda, outer));
  return PhiMatrix{schur_complement(a, bc.lambda)};
}

namespace {

KernelMatrix phi_on(const OperatorSpec& spec, const Configuration& zeta, const BoundaryCondition& bc,
                    const Window& ambient) {
  if (!zeta.is_subset_of(bc.lambda)) {
    throw Error(ErrorKind::SiteNotInWindow, zeta.label() + " not inside " + bc.lambda.label());
  }
  if (!bc.lambda.is_subset_of(ambient)) {
    throw Error(ErrorKind::SiteNotInWindow, bc.lambda.label() + " not inside " + ambient.label());
  }
  // Phi(zeta, zeta) only needs zeta and the exterior boundary.
  const KernelMatrix a = materialize(spec, set_union(zeta, bc.exterior(ambient)));
  return schur_complement(a, zeta);
}

}  // namespace

double energy_at(const OperatorSpec& spec, const Configuration& zeta, const BoundaryCondition& bc,
                 const Window& ambient) {
  if (zeta.empty()) return 0.0;
  return -log_det(phi_on(spec, zeta, bc, ambient));
}

double boltzmann_factor(const OperatorSpec& spec, const Configuration& zeta,
                        const BoundaryCondition& bc, const Window& ambient) {
  if (zeta.empty()) return 1.0;
  const KernelMatrix phi = phi_on(spec, zeta, bc, ambient);
  if (phi.size() == 1) return phi.entries()(0, 0);
  return std::exp(log_det(phi));
}

ConvergenceTrace energy(const OperatorSpec& spec, const Configuration& zeta,
                        const BoundaryCondition& bc, const std::vector<Window>& ambient_schedule) {
  if (!is_nested_increasing(ambient_schedule)) {
    throw Error(ErrorKind::ScheduleNotNested, "energy ambients must be nested");
  }
  ConvergenceTrace trace;
  for (const Window& ambient : ambient_schedule) {
    trace.push(ambient.label(), ambient.size(), energy_at(spec, zeta, bc, ambient));
  }
  return trace;
}

double log_partition_function(const OperatorSpec& spec, const BoundaryCondition& bc,
                              const Window& ambient) {
  const PhiMatrix phi = phi_matrix(spec, bc, ambient);
  const auto n = static_cast<Eigen::Index>(phi.matrix.size());
  return log_det(KernelMatrix(bc.lambda, Eigen::MatrixXd::Identity(n, n) + phi.matrix.entries()));
}

double partition_function(const OperatorSpec& spec, const BoundaryCondition& bc,
                          const Window& ambient) {
  return std::exp(log_partition_function(spec, bc, ambient));
}

double specification_density(const OperatorSpec& spec, const Configuration& zeta,
                             const BoundaryCondition& bc, const Window& ambient) {
  if (!zeta.is_subset_of(bc.lambda)) {
    throw Error(ErrorKind::SiteNotInWindow, zeta.label() + " not inside " + bc.lambda.label());
  }
  const PhiMatrix phi = phi_matrix(spec, bc, ambient);
  const auto n = static_cast<Eigen::Index>(phi.matrix.size());
  const double log_z =
      log_det(KernelMatrix(bc.lambda, Eigen::MatrixXd::Identity(n, n) + phi.matrix.entries()));
  return std::exp(log_det(submatrix(phi.matrix, zeta)) - log_z);
}

DlrReport dlr_residual(const OperatorSpec& spec, SiteIndex x0, const Configuration& xi,
                       const Window& window, int ambient_factor) {
  if (xi.contains(x0)) {
    throw Error(ErrorKind::SiteInConfiguration, "x0 = " + std::to_string(x0) + " is in xi");
  }
  DlrReport r;
  r.x0 = x0;
  r.window = window;
  const DppWindowModel model = build_model(spec, window, ambient_factor);
  r.ambient = model.ambient();
  const Configuration xi_window(set_intersection(xi, window));
  r.papangelou = papangelou(model, x0, xi_window);
  const BoundaryCondition bc{xi_window, Window({x0})};
  r.boltzmann = boltzmann_factor(spec, Configuration(Window({x0})), bc, window);
  r.residual = std::abs(r.papangelou - r.boltzmann) / std::max(r.papangelou, r.boltzmann);
  return r;
}

double uniqueness_identity_check(const DppWindowModel& model, const Window& lambda0,
                                 const Configuration& x) {
  if (!lambda0.is_subset_of(model.window()) || !x.is_subset_of(lambda0)) {
    throw Error(ErrorKind::SiteNotInWindow, "need X inside lambda0 inside the model window");
  }
  const auto idx = model.window().indices_of(lambda0);
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd k0(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k0(i, j) = model.k_matrix()(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                                  static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
    }
  }
  const DppWindowModel restricted = model_from_kernel(lambda0, k0);
  const double lhs =
      std::exp(restricted.log_det_i_minus_k() + log_det(submatrix(restricted.a_bracket(), x)));

  Eigen::MatrixXd mixed = Eigen::MatrixXd::Identity(n, n) - k0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x.contains(lambda0[static_cast<std::size_t>(i)])) mixed.row(i) = k0.row(i);
  }
  const double rhs = mixed.determinant();
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  return std::abs(lhs - rhs) / scale;
}

}  // namespace rdpp
