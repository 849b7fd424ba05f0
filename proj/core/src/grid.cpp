#include "vpl/grid.hpp"

#include <algorithm>
#include <cmath>

namespace vpl {

VelocityGrid::VelocityGrid(double v_max, int n_axis) : v_max_(v_max), n_(n_axis) {
  if (v_max <= 0.0 || n_axis < 2 || n_axis % 2 != 0)
    throw std::invalid_argument("bad velocity grid (n_axis must be even)");
  h_ = 2.0 * v_max / n_;
  axis_.resize(n_);
  for (int i = 0; i < n_; ++i) axis_[i] = -v_max + (i + 0.5) * h_;
  mu_.resize(size());
  sqrt_mu_.resize(size());
  for (std::size_t idx = 0; idx < size(); ++idx) {
    mu_[idx] = maxwellian(node(idx));
    sqrt_mu_[idx] = std::sqrt(mu_[idx]);
  }
}

std::size_t VelocityGrid::flip(std::size_t idx, int axis) const {
  const int n = n_;
  int c[3];
  c[2] = static_cast<int>(idx % n);
  c[1] = static_cast<int>((idx / n) % n);
  c[0] = static_cast<int>(idx / (static_cast<std::size_t>(n) * n));
  c[axis] = n - 1 - c[axis];
  return index(c[0], c[1], c[2]);
}

std::size_t VelocityGrid::negate(std::size_t idx) const {
  return flip(flip(flip(idx, 0), 1), 2);
}

const std::vector<double>& VelocityGrid::bracket_pow(double theta) const {
  auto it = bracket_cache_.find(theta);
  if (it != bracket_cache_.end()) return it->second;
  std::vector<double> w(size());
  for (std::size_t idx = 0; idx < size(); ++idx)
    w[idx] = std::pow(1.0 + norm2(node(idx)), 0.5 * theta);
  return bracket_cache_.emplace(theta, std::move(w)).first->second;
}

double VelocityGrid::integrate(std::span<const double> f) const {
  double s = 0.0;
  for (double x : f) s += x;
  return s * cell_volume();
}

double VelocityGrid::weighted_lp(std::span<const double> f, double p,
                                 double theta) const {
  const auto& w = bracket_pow(theta);
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, w[i] * std::abs(f[i]));
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    s += std::pow(w[i] * std::abs(f[i]), p);
  return std::pow(s * cell_volume(), 1.0 / p);
}

SpatialMesh SpatialMesh::slab(double length, int n_cells) {
  SpatialMesh m;
  m.kind_ = MeshKind::Slab1D;
  m.length_ = length;
  m.n_ = n_cells;
  m.volumes_.assign(static_cast<std::size_t>(n_cells), length / n_cells);
  return m;
}

SpatialMesh SpatialMesh::disk(double radius, int n_cells) {
  SpatialMesh m;
  m.kind_ = MeshKind::Disk2D;
  m.length_ = radius;
  m.n_ = n_cells;
  m.n_phi_ = 4 * n_cells;
  const double dr = radius / n_cells;
  const double dphi = 2.0 * M_PI / m.n_phi_;
  m.volumes_.resize(static_cast<std::size_t>(n_cells) * m.n_phi_);
  for (int ir = 0; ir < n_cells; ++ir)
    for (int ip = 0; ip < m.n_phi_; ++ip)
      m.volumes_[m.disk_index(ir, ip)] = m.r_center(ir) * dr * dphi;
  return m;
}

double SpatialMesh::total_volume() const {
  double s = 0.0;
  for (double v : volumes_) s += v;
  return s;
}

double SpatialMesh::center(std::size_t c) const {
  return (static_cast<double>(c) + 0.5) * dx();
}

bool DistributionField::finite() const {
  for (double x : values_)
    if (!std::isfinite(x)) return false;
  return true;
}

double weighted_lp_norm(const DistributionField& f, double p, double theta) {
  const auto& g = f.grid();
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t c = 0; c < f.mesh().n_cells(); ++c)
      m = std::max(m, g.weighted_lp(f.cell(c), p, theta));
    return m;
  }
  double s = 0.0;
  for (std::size_t c = 0; c < f.mesh().n_cells(); ++c) {
    const double nv = g.weighted_lp(f.cell(c), p, theta);
    s += std::pow(nv, p) * f.mesh().cell_volume(c);
  }
  return std::pow(s, 1.0 / p);
}

double embedding_constant(const VelocityGrid& grid, const SpatialMesh& mesh,
                          double p, double l) {
  const auto& w = grid.bracket_pow(-p * l);
  double s = 0.0;
  for (double x : w) s += x;
  s *= grid.cell_volume();
  return std::pow(mesh.total_volume(), 1.0 / p) * std::pow(s, 1.0 / p);
}

}  // namespace vpl
