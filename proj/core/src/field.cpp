#include "vpl/field.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>

namespace vpl {

std::vector<double> charge_density(const DistributionField& f) {
  const auto& g = f.grid();
  std::vector<double> rho(f.mesh().n_cells());
  for (std::size_t c = 0; c < rho.size(); ++c) {
    double s = 0.0;
    auto fc = f.cell(c);
    for (std::size_t k = 0; k < g.size(); ++k) s += g.sqrt_mu()[k] * fc[k];
    rho[c] = s * g.cell_volume();
  }
  return rho;
}

namespace {

using Trip = Eigen::Triplet<double>;

// Finite-volume system -sum_faces flux = rho * V; Neumann adds a zero-mean
// Lagrange multiplier (requires a neutral source).
Eigen::VectorXd solve_fv(std::vector<Trip>& trips, Eigen::VectorXd rhs,
                         bool augmented, const std::vector<double>& vols) {
  const Eigen::Index n = rhs.size();
  Eigen::Index size = n + (augmented ? 1 : 0);
  if (augmented) {
    for (Eigen::Index c = 0; c < n; ++c) {
      trips.emplace_back(c, n, vols[static_cast<std::size_t>(c)]);
      trips.emplace_back(n, c, vols[static_cast<std::size_t>(c)]);
    }
    rhs.conservativeResize(size);
    rhs(n) = 0.0;
  }
  Eigen::SparseMatrix<double> A(size, size);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("poisson: factorization failed");
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("poisson: solve failed");
  x.conservativeResize(n);
  return x;
}

void require_neutral(std::span<const double> rho, const SpatialMesh& mesh) {
  double q = 0.0, scale = 0.0;
  for (std::size_t c = 0; c < rho.size(); ++c) {
    q += rho[c] * mesh.cell_volume(c);
    scale += std::abs(rho[c]) * mesh.cell_volume(c);
  }
  if (std::abs(q) > 1e-10 * std::max(scale, 1e-300) && scale > 0.0)
    throw std::runtime_error("poisson: Neumann source is not neutral");
}

PoissonSolution solve_slab(const SpatialMesh& mesh, std::span<const double> rho,
                           PoissonBC bc) {
  const int n = mesh.n_cells_axis();
  const double dx = mesh.dx();
  std::vector<Trip> trips;
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    if (i > 0) {
      trips.emplace_back(i, i - 1, -1.0 / dx);
      diag += 1.0 / dx;
    } else if (bc == PoissonBC::Dirichlet) {
      diag += 2.0 / dx;
    }
    if (i < n - 1) {
      trips.emplace_back(i, i + 1, -1.0 / dx);
      diag += 1.0 / dx;
    } else if (bc == PoissonBC::Dirichlet) {
      diag += 2.0 / dx;
    }
    trips.emplace_back(i, i, diag);
    rhs(i) = rho[static_cast<std::size_t>(i)] * dx;
  }
  std::vector<double> vols(static_cast<std::size_t>(n), dx);
  if (bc == PoissonBC::Neumann) require_neutral(rho, mesh);
  Eigen::VectorXd phi =
      solve_fv(trips, std::move(rhs), bc == PoissonBC::Neumann, vols);

  PoissonSolution out;
  out.phi.assign(phi.data(), phi.data() + n);
  // face gradients (the ones the Laplacian uses)
  std::vector<double> gface(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 1; i < n; ++i) gface[i] = (phi(i) - phi(i - 1)) / dx;
  if (bc == PoissonBC::Dirichlet) {
    gface[0] = (phi(0) - 0.0) / (0.5 * dx);
    gface[n] = (0.0 - phi(n - 1)) / (0.5 * dx);
  }
  out.E.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.E[i] = -0.5 * (gface[i] + gface[i + 1]);
  out.boundary_flux = -gface[static_cast<std::size_t>(n)] + gface[0];
  return out;
}

PoissonSolution solve_disk(const SpatialMesh& mesh, std::span<const double> rho,
                           PoissonBC bc) {
  const int nr = mesh.n_r(), nphi = mesh.n_phi();
  const double dr = mesh.length() / nr;
  const double dphi = 2.0 * M_PI / nphi;
  const Eigen::Index n = static_cast<Eigen::Index>(mesh.n_cells());
  std::vector<Trip> trips;
  Eigen::VectorXd rhs(n);
  auto idx = [&](int ir, int ip) {
    return static_cast<Eigen::Index>(
        mesh.disk_index(ir, (ip + nphi) % nphi));
  };
  for (int ir = 0; ir < nr; ++ir)
    for (int ip = 0; ip < nphi; ++ip) {
      const Eigen::Index c = idx(ir, ip);
      const double ri = mesh.r_center(ir);
      double diag = 0.0;
      if (ir > 0) {  // inner face; at ir = 0 the face has zero measure
        const double t = (ri - 0.5 * dr) * dphi / dr;
        trips.emplace_back(c, idx(ir - 1, ip), -t);
        diag += t;
      }
      if (ir < nr - 1) {
        const double t = (ri + 0.5 * dr) * dphi / dr;
        trips.emplace_back(c, idx(ir + 1, ip), -t);
        diag += t;
      } else if (bc == PoissonBC::Dirichlet) {
        diag += (ri + 0.5 * dr) * dphi / (0.5 * dr);
      }
      const double tp = dr / (ri * dphi);
      trips.emplace_back(c, idx(ir, ip - 1), -tp);
      trips.emplace_back(c, idx(ir, ip + 1), -tp);
      diag += 2.0 * tp;
      trips.emplace_back(c, c, diag);
      rhs(c) = rho[static_cast<std::size_t>(c)] * mesh.cell_volume(c);
    }
  std::vector<double> vols(mesh.n_cells());
  for (std::size_t c = 0; c < vols.size(); ++c) vols[c] = mesh.cell_volume(c);
  if (bc == PoissonBC::Neumann) require_neutral(rho, mesh);
  Eigen::VectorXd phi =
      solve_fv(trips, std::move(rhs), bc == PoissonBC::Neumann, vols);

  PoissonSolution out;
  out.phi.assign(phi.data(), phi.data() + n);
  out.E.resize(2 * mesh.n_cells());
  double flux = 0.0;
  for (int ir = 0; ir < nr; ++ir)
    for (int ip = 0; ip < nphi; ++ip) {
      const Eigen::Index c = idx(ir, ip);
      const double ri = mesh.r_center(ir);
      double gw = 0.0, ge = 0.0;
      if (ir > 0) gw = (phi(c) - phi(idx(ir - 1, ip))) / dr;
      if (ir < nr - 1) ge = (phi(idx(ir + 1, ip)) - phi(c)) / dr;
      else if (bc == PoissonBC::Dirichlet) ge = (0.0 - phi(c)) / (0.5 * dr);
      if (ir == 0) gw = ge;  // no inner face; one-sided
      if (ir == nr - 1) {
        flux += -ge * (ri + 0.5 * dr) * dphi;
        if (bc == PoissonBC::Neumann) ge = gw;  // zero-flux face; one-sided
      }
      const double er = -0.5 * (gw + ge);
      const double et =
          -(phi(idx(ir, ip + 1)) - phi(idx(ir, ip - 1))) / (2.0 * ri * dphi);
      const double th = mesh.phi_center(ip);
      out.E[2 * static_cast<std::size_t>(c)] = er * std::cos(th) - et * std::sin(th);
      out.E[2 * static_cast<std::size_t>(c) + 1] =
          er * std::sin(th) + et * std::cos(th);
    }
  out.boundary_flux = flux;
  return out;
}

}  // namespace

PoissonSolution solve_poisson(const SpatialMesh& mesh,
                              std::span<const double> rho, PoissonBC bc) {
  if (rho.size() != mesh.n_cells())
    throw std::invalid_argument("poisson: source size mismatch");
  return mesh.kind() == MeshKind::Slab1D ? solve_slab(mesh, rho, bc)
                                         : solve_disk(mesh, rho, bc);
}

FieldBound field_bound_report(const SpatialMesh& mesh,
                              std::span<const double> rho, PoissonBC bc,
                              double p) {
  PoissonSolution s = solve_poisson(mesh, rho, bc);
  const int dim = mesh.kind() == MeshKind::Slab1D ? 1 : 2;
  double ep = 0.0, dep = 0.0, rp = 0.0;
  if (dim == 1) {
    const int n = mesh.n_cells_axis();
    const double dx = mesh.dx();
    for (int i = 0; i < n; ++i) {
      ep += std::pow(std::abs(s.E[i]), p) * dx;
      const double up = (i < n - 1) ? s.E[i + 1] : s.E[i];
      const double dn = (i > 0) ? s.E[i - 1] : s.E[i];
      const double d = (up - dn) / ((i == 0 || i == n - 1) ? dx : 2 * dx);
      dep += std::pow(std::abs(d), p) * dx;
      rp += std::pow(std::abs(rho[static_cast<std::size_t>(i)]), p) * dx;
    }
  } else {
    // -div E = -rho gives one derivative; use it as the gradient surrogate.
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
      const double em = std::hypot(s.E[2 * c], s.E[2 * c + 1]);
      ep += std::pow(em, p) * mesh.cell_volume(c);
      dep += std::pow(std::abs(rho[c]), p) * mesh.cell_volume(c);
      rp += std::pow(std::abs(rho[c]), p) * mesh.cell_volume(c);
    }
  }
  FieldBound fb;
  fb.e_w1p = std::pow(ep + dep, 1.0 / p);
  fb.rho_lp = std::pow(rp, 1.0 / p);
  fb.ratio = fb.rho_lp > 0 ? fb.e_w1p / fb.rho_lp : 0.0;
  return fb;
}

}  // namespace vpl
