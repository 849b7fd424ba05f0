#pragma once
// Electrostatic field: -Laplace(phi) = rho with rho = int sqrt(mu) f dv,
// on the 1-D slab or the 2-D disk, Dirichlet (phi = 0) or Neumann
// (d phi / dn = 0, zero-mean, requires a neutral source).  E = -grad phi.
// Boundary flux is evaluated with the same face gradients the discrete
// Laplacian uses, so the Green identity  -sum Lap(phi) dV = flux  is exact.

#include <span>
#include <vector>

#include "vpl/grid.hpp"

namespace vpl {

// rho_c = int sqrt(mu) f(x_c, v) dv per cell.
std::vector<double> charge_density(const DistributionField& f);

struct PoissonSolution {
  std::vector<double> phi;   // per cell
  std::vector<double> E;     // per cell, dim components (slab: E_x; disk: E_x, E_y)
  double boundary_flux = 0;  // sum over boundary faces of (E . n) dS
};

PoissonSolution solve_poisson(const SpatialMesh& mesh,
                              std::span<const double> rho, PoissonBC bc);

// || E ||_{W^{1,p}} / || rho ||_{L^p}; the discrete embedding factor.
struct FieldBound {
  double e_w1p;
  double rho_lp;
  double ratio;
};
FieldBound field_bound_report(const SpatialMesh& mesh,
                              std::span<const double> rho, PoissonBC bc,
                              double p);

}  // namespace vpl
