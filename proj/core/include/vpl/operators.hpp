#pragma once
// Linearized collision operator L = -A - K, the bilinear remainder
// Gamma[g, f], the rearranged diffusion/drift/compact splitting used by the
// time stepper, the hydrodynamic projection P, and the sigma-weighted inner
// product.
//
// Discretization notes.  D_i is the centered difference with zero padding,
// hence exactly antisymmetric.  T_i = D_i + vt_i with
// vt_i = -(D_i sqrt(mu)) / sqrt(mu)  (= exp(-h^2/2) sinh(v_i h) / h away
// from the box edge), chosen so that T_i sqrt(mu) vanishes identically; with A = -sum T_i^t sigma^{ij} T_j
// and K = sum T_i^t sqrt(mu) Phi^{ij} * (sqrt(mu) T_j f) the discrete L is
// exactly symmetric positive semidefinite (the same lattice quadrature
// appears on both sides of the symmetrization), and collision steps conserve
// mass to the size of sqrt(mu) at the box edge.

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "vpl/grid.hpp"
#include "vpl/landau.hpp"

namespace vpl {

// Per-axis first derivative, centered with zero padding (antisymmetric).
void apply_D(const VelocityGrid& g, std::span<const double> f, int axis,
             std::span<double> out);

class CollisionOperators {
 public:
  explicit CollisionOperators(std::shared_ptr<const KernelTable> table);

  const VelocityGrid& grid() const { return *grid_; }
  const KernelTable& table() const { return *table_; }
  const TensorField& sigma() const { return mu_coeffs_.sigma; }
  const VectorField& sigma_i() const { return mu_coeffs_.sigma_i; }
  double vt(int axis_pos) const { return vt_axis_[axis_pos]; }

  void apply_T(std::span<const double> f, int axis, std::span<double> out) const;
  void apply_Tdag(std::span<const double> f, int axis,
                  std::span<double> out) const;

  // A f = -sum_{ij} T_i^t sigma^{ij} T_j f for a given tensor field.
  void apply_A(std::span<const double> f, const TensorField& sigma,
               std::span<double> out) const;
  // K f = sum_i T_i^t [ sqrt(mu) Phi^{ij} * (sqrt(mu) T_j f) ]
  void apply_K(std::span<const double> f, std::span<double> out) const;
  // L = -A - K with the Maxwellian sigma.
  void apply_L(std::span<const double> f, std::span<double> out) const;

  // Gamma[g, f] = -sum_i T_i^t [ b_{ij} T_j f - c_i f ],
  // b = Phi * (sqrt(mu) g), c_i = Phi^{ij} * (sqrt(mu) T_j g).
  struct GammaCoeffs {
    TensorField b;
    VectorField c;
  };
  GammaCoeffs build_gamma_coeffs(std::span<const double> g) const;
  void apply_Gamma(const GammaCoeffs& gc, std::span<const double> f,
                   std::span<double> out) const;

  // -L f + Gamma[g, f] split into a diffusion/drift part
  //   Abar f = -sum_i T_i^t [ sigma_G^{ij} T_j f - c_i f ]
  // and a compact part Kbar f = K f; the two applicators sum to
  // -apply_L + apply_Gamma exactly (up to FFT roundoff).
  struct Rearranged {
    TensorField sigma_G;
    VectorField a_g;  // drift coefficient (diagnostic / time-step bound)
    GammaCoeffs gc;
  };
  Rearranged build_rearranged(std::span<const double> g) const;
  void apply_Abar(const Rearranged& r, std::span<const double> f,
                  std::span<double> out) const;
  void apply_Kbar(std::span<const double> f, std::span<double> out) const;

 private:
  std::shared_ptr<const KernelTable> table_;
  std::shared_ptr<const VelocityGrid> grid_;
  CoefficientSet mu_coeffs_;
  std::vector<double> vt_axis_;   // per axis position
  std::vector<double> vt_node_[3];  // per node, per component
};

// <f, g>_sigma with weight <v>^{2 theta}:
// sum <v>^{2theta} [ sigma^{ij} D_i f D_j g + sigma^{ij} v_i v_j f g ] h^3.
double sigma_inner(const CollisionOperators& ops, std::span<const double> f,
                   std::span<const double> g, double theta = 0.0);
inline double sigma_norm(const CollisionOperators& ops,
                         std::span<const double> f, double theta = 0.0) {
  return std::sqrt(sigma_inner(ops, f, f, theta));
}

// Orthonormal basis of the collision invariants
// span{ sqrt(mu), v_i sqrt(mu), |v|^2 sqrt(mu) } and the projection P onto it.
class MacroBasis {
 public:
  explicit MacroBasis(std::shared_ptr<const VelocityGrid> grid);

  const std::vector<double>& e(int i) const { return e_[i]; }

  struct Moments {
    double a;
    Vec3 b;
    double c;
  };
  // P f = (a + b.v + c |v|^2) sqrt(mu)
  Moments moments(std::span<const double> f) const;
  void project(std::span<const double> f, std::span<double> pf) const;
  void reconstruct(const Moments& m, std::span<double> pf) const;

 private:
  std::shared_ptr<const VelocityGrid> grid_;
  std::vector<double> e_[5];       // orthonormal basis
  std::vector<double> raw_[5];     // raw generators
  Eigen::Matrix<double, 5, 5> gram_inv_;
};

}  // namespace vpl
