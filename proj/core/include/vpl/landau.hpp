#pragma once
// Collision kernel Phi^{ij}(w) = (delta_ij - w_i w_j / |w|^2) |w|^{gamma+2},
// tabulated on the velocity lattice, and convolution machinery for the
// diffusion/drift coefficient fields.
//
// The singular cell at w = 0 is handled by a Gaussian-reference rule: the
// origin entry of the table carries (M - S)/h^3 * I, where M is the exact
// integral of Phi against exp(-tau |w|^2) and S its lattice sum over the
// nonzero offsets.  This keeps the plain lattice sum second order with a
// small constant instead of stalling on the 1/|w| singularity.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vpl/grid.hpp"

namespace vpl {

Eigen::Matrix3d phi_kernel(const Vec3& w, double gamma);

// Component order xx, xy, xz, yy, yz, zz.
inline constexpr int kTensorIdx[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};

using TensorField = std::array<std::vector<double>, 6>;
using VectorField = std::array<std::vector<double>, 3>;

class KernelTable {
 public:
  KernelTable(double gamma, std::shared_ptr<const VelocityGrid> grid,
              double tau = 0.5);
  ~KernelTable();
  KernelTable(const KernelTable&) = delete;
  KernelTable& operator=(const KernelTable&) = delete;

  double gamma() const { return gamma_; }
  double tau() const { return tau_; }
  const VelocityGrid& grid() const { return *grid_; }
  std::shared_ptr<const VelocityGrid> grid_ptr() const { return grid_; }
  // Diagonal value of the corrected origin entry (off-diagonals are zero).
  double origin_entry() const { return origin_; }

  // out_{ij} = sum_m T^{ij}(w_m) u(v - w_m) h^3  (zero-padded, FFT path)
  void conv_tensor(std::span<const double> u, TensorField& out) const;
  // out_i = sum_j sum_m T^{ij}(w_m) q_j(v - w_m) h^3
  void conv_contract(const VectorField& q, VectorField& out) const;

  // O(N^2) reference path, same quadrature; for cross-checking the FFT.
  void conv_tensor_direct(std::span<const double> u, TensorField& out) const;

  // Binary cache: header (magic, version, gamma, v_max, n_axis; little-endian
  // 64-bit fields) followed by the six padded tables as row-major f64.
  void write_cache(const std::filesystem::path& p) const;
  static std::unique_ptr<KernelTable> load_cache(
      const std::filesystem::path& p, double gamma,
      std::shared_ptr<const VelocityGrid> grid, double tau = 0.5);

 private:
  KernelTable() = default;
  void build_tables(std::vector<double>* keep_real) const;
  void init_plans(const std::vector<double>* preloaded);

  double gamma_ = -3.0;
  double tau_ = 0.5;
  std::shared_ptr<const VelocityGrid> grid_;
  double origin_ = 0.0;
  int np_ = 0;                  // padded extent = 2 n_axis
  std::size_t spec_size_ = 0;   // np*np*(np/2+1)
  std::vector<std::vector<std::complex<double>>> khat_;  // 6 spectra
  struct Fft;
  std::unique_ptr<Fft> fft_;
};

// sigma_u(v) at an arbitrary point by direct quadrature over the node
// lattice, with the same Gaussian-reference correction.
Eigen::Matrix3d sigma_direct_at(const VelocityGrid& g, double gamma,
                                const Vec3& v,
                                const std::function<double(const Vec3&)>& u,
                                double tau = 0.5);

// Diffusion coefficients of the reference Maxwellian and friends.
struct CoefficientSet {
  TensorField sigma;     // Phi * mu
  VectorField sigma_i;   // Phi^{ij} * [v_j mu]
};
CoefficientSet build_mu_coefficients(const KernelTable& table);

// sigma_G = Phi * (mu + sqrt(mu) g); throws if min eigenvalue <= 0.
TensorField build_sigma_G(const KernelTable& table, std::span<const double> g);

// Drift a_g^i = -Phi^{ij} * [v_j sqrt(mu) g + sqrt(mu) d_j g]
// (centered differences, one-sided at the box boundary).
VectorField build_drift(const KernelTable& table, std::span<const double> g);

// Eigenvalue range of a tensor field over all nodes.
struct EigRange { double min_eig; double max_eig; };
EigRange tensor_eig_range(const VelocityGrid& g, const TensorField& t);

Eigen::Matrix3d tensor_at(const TensorField& t, std::size_t idx);

// Spectral-gap integrals: lambda1 multiplies the projection onto v, lambda2
// the orthogonal part.  Quadrature uses the same corrected lattice rule.
struct LambdaPair { double lambda1; double lambda2; };
LambdaPair lambda_formulas(const VelocityGrid& g, double gamma, const Vec3& v,
                           double tau = 0.5);

}  // namespace vpl
