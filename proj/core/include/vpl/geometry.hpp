#pragma once
// Implicit domains with specular reflection, and the boundary-flattening
// chart y = psi(x) for a graph boundary x3 = rho(x1, x2):
//   psi^{-1}(y) = eta(y1,y2) + y3 * n(y1,y2),  n = <-rho_1, -rho_2, 1>,
// together with its exact Jacobians A^{-1}, A (adjugate closed form),
// B = d v / d y, C = A^{-T} A^{-1}, the specular commutation identity at
// y3 = 0, the mirror extension across the wall, and the transformed
// diffusion coefficients on both sides.

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vpl/grid.hpp"
#include "vpl/landau.hpp"

namespace vpl {

struct ImplicitDomain {
  std::function<double(const Vec3&)> zeta;       // Omega = { zeta < 0 }
  std::function<Vec3(const Vec3&)> grad_zeta;
  // parametric boundary sampler over (u, v) in [0,1)^2
  std::function<Vec3(double, double)> boundary_sample;
  // signed distance to the boundary (negative inside); used by the
  // partition of unity
  std::function<double(const Vec3&)> boundary_distance;
  Vec3 bb_lo{0, 0, 0}, bb_hi{0, 0, 0};

  static ImplicitDomain ball(double radius);
  static ImplicitDomain slab(double length);          // 0 < x1 < L
  static ImplicitDomain cylinder(double radius);      // about the z axis
  static ImplicitDomain box(const Vec3& half_sizes);  // |x_i| < h_i
};

Vec3 outward_normal(const ImplicitDomain& d, const Vec3& x);

Vec3 specular_reflect(const Vec3& n, const Vec3& v);

enum class GammaClass { Outgoing, Incoming, Grazing };
GammaClass classify_gamma(const ImplicitDomain& d, const Vec3& x, const Vec3& v,
                          double tol_grazing_rel = 1e-12);

// max over sampled boundary points of |[(x - x0) x omega] . n_x|
double rotational_symmetry_residual(const ImplicitDomain& d, const Vec3& x0,
                                    const Vec3& omega, int samples_per_dim = 32);

// Graph boundary rho(y1, y2) with analytic partial derivatives up to third
// order (the B matrix needs them); no numeric differentiation.
class GraphSurface {
 public:
  virtual ~GraphSurface() = default;
  virtual double rho(double y1, double y2) const = 0;
  virtual double d1(double y1, double y2) const = 0;
  virtual double d2(double y1, double y2) const = 0;
  virtual double d11(double y1, double y2) const = 0;
  virtual double d12(double y1, double y2) const = 0;
  virtual double d22(double y1, double y2) const = 0;
  virtual double d111(double y1, double y2) const = 0;
  virtual double d112(double y1, double y2) const = 0;
  virtual double d122(double y1, double y2) const = 0;
  virtual double d222(double y1, double y2) const = 0;
};

// Bivariate polynomial rho = sum c_{ij} y1^i y2^j.
class PolySurface : public GraphSurface {
 public:
  explicit PolySurface(std::map<std::pair<int, int>, double> coeffs);
  double rho(double, double) const override;
  double d1(double, double) const override;
  double d2(double, double) const override;
  double d11(double, double) const override;
  double d12(double, double) const override;
  double d22(double, double) const override;
  double d111(double, double) const override;
  double d112(double, double) const override;
  double d122(double, double) const override;
  double d222(double, double) const override;

 private:
  double eval(int da, int db, double y1, double y2) const;
  std::map<std::pair<int, int>, double> c_;
};

// rho = R - sqrt(R^2 - y1^2 - y2^2): a sphere cap opening upward.
class SphereCapSurface : public GraphSurface {
 public:
  explicit SphereCapSurface(double R) : R_(R) {}
  double rho(double, double) const override;
  double d1(double, double) const override;
  double d2(double, double) const override;
  double d11(double, double) const override;
  double d12(double, double) const override;
  double d22(double, double) const override;
  double d111(double, double) const override;
  double d112(double, double) const override;
  double d122(double, double) const override;
  double d222(double, double) const override;

 private:
  double s(double y1, double y2) const;
  double R_;
};

// Named preset loader: "flat", "paraboloid" (rho = a y1^2 + b y2^2),
// "sphere-cap" (radius R), or "poly" with coefficient triples (i, j, c).
std::unique_ptr<GraphSurface> make_surface(
    const std::string& preset, const std::vector<double>& params);

class FlattenChart {
 public:
  explicit FlattenChart(std::shared_ptr<const GraphSurface> s) : s_(std::move(s)) {}

  const GraphSurface& surface() const { return *s_; }

  Vec3 psi_inv(const Vec3& y) const;  // x = eta + y3 n
  Eigen::Matrix3d jac_Ainv(const Vec3& y) const;
  // closed-form determinant of A^{-1} (quadratic polynomial in y3)
  double det_Ainv(const Vec3& y) const;
  // A via the printed adjugate / det closed form (not a numeric inverse)
  Eigen::Matrix3d jac_A(const Vec3& y) const;
  // B = d v / d y with v = A^{-1}(y) w; entries linear in w
  Eigen::Matrix3d mat_B(const Vec3& y, const Vec3& w) const;
  // C = A^{-T} A^{-1} via the printed entry-wise closed form
  Eigen::Matrix3d mat_C(const Vec3& y) const;

  // |y3| range with det A^{-1} > 0, scanned at (y1, y2); the tubular
  // neighborhood estimate reported per chart.
  double tubular_range(double y1, double y2, double y3_max, int steps = 256) const;

 private:
  std::shared_ptr<const GraphSurface> s_;
};

struct FlattenSample {
  Vec3 x;
  Eigen::Matrix3d Ainv, A, B, C;
};
FlattenSample flatten_maps(const FlattenChart& chart, const Vec3& y,
                           const Vec3& w);

// | A^{-1}(R w) - R_x (A^{-1} w) | at y3 = 0, with R = diag(1,1,-1) and
// R_x the specular reflection about n = d1_eta x d2_eta normalized.
double specular_commute_residual(const FlattenChart& chart, double y1,
                                 double y2, const Vec3& w);

// Field slices f(y3, w) on the lower half {y3 <= 0}; mirror extension
// fbar(y3, w) = f(-y3, R w) for y3 > 0.
struct MirrorField {
  std::shared_ptr<const VelocityGrid> wgrid;
  std::vector<double> y3;                   // increasing, last element 0
  std::vector<std::vector<double>> values;  // [level][w node]
};
MirrorField mirror_extend(const MirrorField& lower, double tol = 1e-12);

// Piecewise transformed diffusion coefficient at (y, w):
// lower branch A sigma_G(A^{-1}w) A^T, upper branch R Abar sigma_G Abar^T R;
// sigma_G evaluated by direct quadrature on the given velocity grid.
struct TransformedCoefficients {
  Eigen::Matrix3d A_low, A_up;
  Eigen::Vector3d B_low, B_up;
  double gap;  // Frobenius norm of (A_low - A_up) at y3 = 0
};
TransformedCoefficients transformed_coefficients(
    const FlattenChart& chart, const VelocityGrid& grid, double gamma,
    const Vec3& y, const Vec3& w,
    const std::function<double(const Vec3&)>& g = nullptr);

// Partition of unity: chi_0 supported in the delta/2 interior, sector
// weights chi_k (k = 1..n_sectors) in the boundary tube, cutoff chi_tilde.
// All bumps are C^2 polynomials (quintic smoothstep).
struct PartitionWeights {
  int n_sectors;
  double delta;
  // chi_tilde(x): 1 at distance < delta/2 from the wall, 0 beyond delta
  std::function<double(const Vec3&)> chi_tilde;
  // chi_k(x), k = 0..n_sectors; sum == 1 on the domain
  std::function<double(int, const Vec3&)> chi;
};
PartitionWeights partition_weights(const ImplicitDomain& d, double delta,
                                   int n_sectors = 8);

}  // namespace vpl
