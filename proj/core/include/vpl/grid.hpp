#pragma once
// Phase-space discretization: truncated velocity box, spatial mesh,
// distribution storage, and weighted-norm quadrature.

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace vpl {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm2(const Vec3& a) { return dot(a, a); }

// <v> = sqrt(1 + |v|^2)
inline double jbracket(const Vec3& v) { return std::sqrt(1.0 + norm2(v)); }

// Normalized so that mu(0) = 1; sqrt(mu) = exp(-|v|^2 / 2).
inline double maxwellian(const Vec3& v) { return std::exp(-norm2(v)); }

// Cell-centered uniform grid on [-v_max, v_max]^3.  Nodes sit at
// v_i = -v_max + (i + 1/2) h, so the lattice is symmetric under v -> -v
// and never contains the origin.  Node index = (i*n + j)*n + k.
class VelocityGrid {
 public:
  VelocityGrid(double v_max, int n_axis);

  double v_max() const { return v_max_; }
  int n_axis() const { return n_; }
  double h() const { return h_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  double cell_volume() const { return h_ * h_ * h_; }

  double axis(int i) const { return axis_[static_cast<std::size_t>(i)]; }
  Vec3 node(std::size_t idx) const {
    const int n = n_;
    const int k = static_cast<int>(idx % n), j = static_cast<int>((idx / n) % n),
              i = static_cast<int>(idx / (static_cast<std::size_t>(n) * n));
    return {axis_[i], axis_[j], axis_[k]};
  }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }

  // Index of the node with component `axis` negated (exact on this lattice).
  std::size_t flip(std::size_t idx, int axis) const;
  // Index of -v.
  std::size_t negate(std::size_t idx) const;

  const std::vector<double>& mu() const { return mu_; }
  const std::vector<double>& sqrt_mu() const { return sqrt_mu_; }

  // Cached <v>^theta per node.
  const std::vector<double>& bracket_pow(double theta) const;

  double integrate(std::span<const double> f) const;

  // int <v>^(2 theta) |f|^p dv, p-th root; p = inf -> sup <v>^theta |f|.
  double weighted_lp(std::span<const double> f, double p, double theta) const;

 private:
  double v_max_;
  int n_;
  double h_;
  std::vector<double> axis_;
  std::vector<double> mu_, sqrt_mu_;
  mutable std::map<double, std::vector<double>> bracket_cache_;
};

enum class MeshKind { Slab1D, Disk2D };
enum class PoissonBC { Dirichlet, Neumann };

// Spatial mesh: 1-D interval [0, L] with n cells, or a 2-D disk of radius L
// in polar cells (n_r = n_cells, n_phi = 4 n_cells).
class SpatialMesh {
 public:
  static SpatialMesh slab(double length, int n_cells);
  static SpatialMesh disk(double radius, int n_cells);

  MeshKind kind() const { return kind_; }
  double length() const { return length_; }
  int n_cells_axis() const { return n_; }
  std::size_t n_cells() const { return volumes_.size(); }
  double cell_volume(std::size_t c) const { return volumes_[c]; }
  double total_volume() const;

  // 1-D accessors
  double dx() const { return length_ / n_; }
  double center(std::size_t c) const;  // 1-D cell center

  // 2-D (disk) accessors
  int n_r() const { return n_; }
  int n_phi() const { return n_phi_; }
  std::size_t disk_index(int ir, int ip) const {
    return static_cast<std::size_t>(ir) * n_phi_ + ip;
  }
  double r_center(int ir) const { return (ir + 0.5) * length_ / n_; }
  double phi_center(int ip) const { return (ip + 0.5) * 2.0 * M_PI / n_phi_; }

 private:
  SpatialMesh() = default;
  MeshKind kind_ = MeshKind::Slab1D;
  double length_ = 1.0;
  int n_ = 1;
  int n_phi_ = 0;
  std::vector<double> volumes_;
};

// f(x, v) stored cell-major: values[c * grid.size() + node].
class DistributionField {
 public:
  DistributionField(std::shared_ptr<const VelocityGrid> grid,
                    std::shared_ptr<const SpatialMesh> mesh)
      : grid_(std::move(grid)),
        mesh_(std::move(mesh)),
        values_(mesh_->n_cells() * grid_->size(), 0.0) {}

  const VelocityGrid& grid() const { return *grid_; }
  const SpatialMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const VelocityGrid> grid_ptr() const { return grid_; }
  std::shared_ptr<const SpatialMesh> mesh_ptr() const { return mesh_; }

  std::span<double> cell(std::size_t c) {
    return {values_.data() + c * grid_->size(), grid_->size()};
  }
  std::span<const double> cell(std::size_t c) const {
    return {values_.data() + c * grid_->size(), grid_->size()};
  }
  std::vector<double>& raw() { return values_; }
  const std::vector<double>& raw() const { return values_; }

  double time = 0.0;
  long step = 0;

  bool finite() const;

 private:
  std::shared_ptr<const VelocityGrid> grid_;
  std::shared_ptr<const SpatialMesh> mesh_;
  std::vector<double> values_;
};

// || <v>^theta f ||_{L^p(dx dv)}; p = inf -> essential sup.
double weighted_lp_norm(const DistributionField& f, double p, double theta);

// Constant C_p with ||f||_{p,theta} <= C_p ||f||_{inf,theta+l}:
// C_p = |Omega|^{1/p} (int <v>^{-p l} dv)^{1/p}, integral on the truncated box.
double embedding_constant(const VelocityGrid& grid, const SpatialMesh& mesh,
                          double p, double l);

}  // namespace vpl
