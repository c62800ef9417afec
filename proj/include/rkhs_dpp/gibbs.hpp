#pragma once

#include <vector>

#include "rkhs_dpp/dpp.hpp"
#include "rkhs_dpp/kernel_matrix.hpp"
#include "rkhs_dpp/trace.hpp"

namespace rdpp {

/// Boundary configuration xi, read only outside the interior window lambda.
struct BoundaryCondition {
  Configuration xi;
  Window lambda;

  /// xi restricted to ambient \ lambda.
  Window exterior(const Window& ambient) const;
};

/// Phi = A(L,L) - A(L,xi') A(xi',xi')^{-1} A(xi',L) with xi' = xi on ambient \ L.
struct PhiMatrix {
  KernelMatrix matrix;
};

/// V(xi) = -log det A(xi, xi); V(empty) = 0.
double potential(const OperatorSpec& spec, const Configuration& xi);

/// V(xi1 u xi2) - V(xi1) - V(xi2). Throws OverlappingSets.
double mutual_energy(const OperatorSpec& spec, const Configuration& xi1, const Configuration& xi2);

/// Requires bc.lambda inside ambient.
PhiMatrix phi_matrix(const OperatorSpec& spec, const BoundaryCondition& bc, const Window& ambient);

/// -log det Phi(zeta, zeta) at one ambient.
double energy_at(const OperatorSpec& spec, const Configuration& zeta, const BoundaryCondition& bc,
                 const Window& ambient);

/// exp(-H) = det Phi(zeta, zeta), read off the Schur complement without a log.
double boltzmann_factor(const OperatorSpec& spec, const Configuration& zeta,
                        const BoundaryCondition& bc, const Window& ambient);

/// energy_at over a nested ambient schedule. Eliminating more boundary sites
/// can only shrink Phi in Loewner order, so the trace is nondecreasing.
ConvergenceTrace energy(const OperatorSpec& spec, const Configuration& zeta,
                        const BoundaryCondition& bc, const std::vector<Window>& ambient_schedule);

/// det(I + Phi).
double partition_function(const OperatorSpec& spec, const BoundaryCondition& bc,
                          const Window& ambient);
double log_partition_function(const OperatorSpec& spec, const BoundaryCondition& bc,
                              const Window& ambient);

/// det Phi(zeta, zeta) / det(I + Phi).
double specification_density(const OperatorSpec& spec, const Configuration& zeta,
                             const BoundaryCondition& bc, const Window& ambient);

struct DlrReport {
  SiteIndex x0 = 0;
  Window window;
  Window ambient;
  double papangelou = 0.0;
  double boltzmann = 0.0;
  double residual = 0.0;
};

/// Compares the Papangelou intensity of the window model (built with
/// ambient_factor) against exp(-H_{x0}({x0}; xi)) with boundary xi on the window.
DlrReport dlr_residual(const OperatorSpec& spec, SiteIndex x0, const Configuration& xi,
                       const Window& window, int ambient_factor);

/// Relative difference between det(I-K_L0) det A_[L0](X, X) and the determinant
/// of the matrix with rows of K_L0 on X and rows of I - K_L0 elsewhere. A_[L0] is
/// rebuilt from K restricted to lambda0.
double uniqueness_identity_check(const DppWindowModel& model, const Window& lambda0,
                                 const Configuration& x);

}  // namespace rdpp
