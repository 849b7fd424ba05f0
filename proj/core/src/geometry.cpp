#include "vpl/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace vpl {

ImplicitDomain ImplicitDomain::ball(double R) {
  ImplicitDomain d;
  d.zeta = [R](const Vec3& x) { return norm2(x) - R * R; };
  d.grad_zeta = [](const Vec3& x) { return Vec3{2 * x[0], 2 * x[1], 2 * x[2]}; };
  d.boundary_sample = [R](double u, double v) {
    const double th = std::acos(1.0 - 2.0 * std::min(std::max(u, 1e-9), 1 - 1e-9));
    const double ph = 2.0 * M_PI * v;
    return Vec3{R * std::sin(th) * std::cos(ph), R * std::sin(th) * std::sin(ph),
                R * std::cos(th)};
  };
  d.boundary_distance = [R](const Vec3& x) { return std::sqrt(norm2(x)) - R; };
  d.bb_lo = {-R, -R, -R};
  d.bb_hi = {R, R, R};
  return d;
}

ImplicitDomain ImplicitDomain::slab(double L) {
  ImplicitDomain d;
  d.zeta = [L](const Vec3& x) { return x[0] * (x[0] - L); };
  d.grad_zeta = [L](const Vec3& x) { return Vec3{2 * x[0] - L, 0.0, 0.0}; };
  d.boundary_sample = [L](double u, double v) {
    return Vec3{u < 0.5 ? 0.0 : L, v, 0.0};
  };
  d.boundary_distance = [L](const Vec3& x) {
    return std::max(-x[0], x[0] - L);
  };
  d.bb_lo = {0, 0, 0};
  d.bb_hi = {L, 1, 1};
  return d;
}

ImplicitDomain ImplicitDomain::cylinder(double R) {
  ImplicitDomain d;
  d.zeta = [R](const Vec3& x) { return x[0] * x[0] + x[1] * x[1] - R * R; };
  d.grad_zeta = [](const Vec3& x) { return Vec3{2 * x[0], 2 * x[1], 0.0}; };
  d.boundary_sample = [R](double u, double v) {
    const double ph = 2.0 * M_PI * u;
    return Vec3{R * std::cos(ph), R * std::sin(ph), 2.0 * v - 1.0};
  };
  d.boundary_distance = [R](const Vec3& x) {
    return std::hypot(x[0], x[1]) - R;
  };
  d.bb_lo = {-R, -R, -1};
  d.bb_hi = {R, R, 1};
  return d;
}

ImplicitDomain ImplicitDomain::box(const Vec3& h) {
  ImplicitDomain d;
  d.zeta = [h](const Vec3& x) {
    double m = -1e300;
    for (int i = 0; i < 3; ++i) m = std::max(m, std::abs(x[i]) - h[i]);
    return m;
  };
  d.grad_zeta = [h](const Vec3& x) {
    int arg = 0;
    double m = -1e300;
    for (int i = 0; i < 3; ++i)
      if (std::abs(x[i]) - h[i] > m) { m = std::abs(x[i]) - h[i]; arg = i; }
    Vec3 g{0, 0, 0};
    g[arg] = x[arg] >= 0 ? 1.0 : -1.0;
    return g;
  };
  d.boundary_sample = [h](double u, double v) {
    // distribute over the six faces
    const int face = std::min(5, static_cast<int>(u * 6.0));
    const double a = u * 6.0 - face, b = v;
    const int ax = face / 2;
    const double sgn = (face % 2) ? 1.0 : -1.0;
    Vec3 x{0, 0, 0};
    x[ax] = sgn * h[ax];
    x[(ax + 1) % 3] = (2 * a - 1) * h[(ax + 1) % 3];
    x[(ax + 2) % 3] = (2 * b - 1) * h[(ax + 2) % 3];
    return x;
  };
  d.boundary_distance = [h](const Vec3& x) {
    double m = -1e300;
    for (int i = 0; i < 3; ++i) m = std::max(m, std::abs(x[i]) - h[i]);
    return m;
  };
  d.bb_lo = {-h[0], -h[1], -h[2]};
  d.bb_hi = h;
  return d;
}

Vec3 outward_normal(const ImplicitDomain& d, const Vec3& x) {
  const Vec3 g = d.grad_zeta(x);
  const double m = std::sqrt(norm2(g));
  if (m < 1e-14) throw std::runtime_error("outward_normal: degenerate gradient");
  return {g[0] / m, g[1] / m, g[2] / m};
}

Vec3 specular_reflect(const Vec3& n, const Vec3& v) {
  const double nv = dot(n, v);
  return {v[0] - 2 * nv * n[0], v[1] - 2 * nv * n[1], v[2] - 2 * nv * n[2]};
}

GammaClass classify_gamma(const ImplicitDomain& d, const Vec3& x, const Vec3& v,
                          double tol_grazing_rel) {
  const double nv = dot(outward_normal(d, x), v);
  const double tol = tol_grazing_rel * std::sqrt(norm2(v));
  if (std::abs(nv) <= tol) return GammaClass::Grazing;
  return nv > 0 ? GammaClass::Outgoing : GammaClass::Incoming;
}

double rotational_symmetry_residual(const ImplicitDomain& d, const Vec3& x0,
                                    const Vec3& omega, int m) {
  double worst = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const Vec3 x = d.boundary_sample((i + 0.5) / m, (j + 0.5) / m);
      const Vec3 r{x[0] - x0[0], x[1] - x0[1], x[2] - x0[2]};
      const Vec3 cr{r[1] * omega[2] - r[2] * omega[1],
                    r[2] * omega[0] - r[0] * omega[2],
                    r[0] * omega[1] - r[1] * omega[0]};
      worst = std::max(worst, std::abs(dot(cr, outward_normal(d, x))));
    }
  return worst;
}

PolySurface::PolySurface(std::map<std::pair<int, int>, double> coeffs)
    : c_(std::move(coeffs)) {}

double PolySurface::eval(int da, int db, double y1, double y2) const {
  double s = 0.0;
  for (const auto& [ij, c] : c_) {
    const int i = ij.first, j = ij.second;
    if (i < da || j < db) continue;
    double f = c;
    for (int k = 0; k < da; ++k) f *= i - k;
    for (int k = 0; k < db; ++k) f *= j - k;
    s += f * std::pow(y1, i - da) * std::pow(y2, j - db);
  }
  return s;
}

double PolySurface::rho(double a, double b) const { return eval(0, 0, a, b); }
double PolySurface::d1(double a, double b) const { return eval(1, 0, a, b); }
double PolySurface::d2(double a, double b) const { return eval(0, 1, a, b); }
double PolySurface::d11(double a, double b) const { return eval(2, 0, a, b); }
double PolySurface::d12(double a, double b) const { return eval(1, 1, a, b); }
double PolySurface::d22(double a, double b) const { return eval(0, 2, a, b); }
double PolySurface::d111(double a, double b) const { return eval(3, 0, a, b); }
double PolySurface::d112(double a, double b) const { return eval(2, 1, a, b); }
double PolySurface::d122(double a, double b) const { return eval(1, 2, a, b); }
double PolySurface::d222(double a, double b) const { return eval(0, 3, a, b); }

double SphereCapSurface::s(double y1, double y2) const {
  const double r2 = R_ * R_ - y1 * y1 - y2 * y2;
  if (r2 <= 0) throw std::domain_error("sphere cap: outside chart");
  return std::sqrt(r2);
}
double SphereCapSurface::rho(double a, double b) const { return R_ - s(a, b); }
double SphereCapSurface::d1(double a, double b) const { return a / s(a, b); }
double SphereCapSurface::d2(double a, double b) const { return b / s(a, b); }
double SphereCapSurface::d11(double a, double b) const {
  const double q = s(a, b);
  return 1.0 / q + a * a / (q * q * q);
}
double SphereCapSurface::d12(double a, double b) const {
  const double q = s(a, b);
  return a * b / (q * q * q);
}
double SphereCapSurface::d22(double a, double b) const {
  const double q = s(a, b);
  return 1.0 / q + b * b / (q * q * q);
}
// d^3 rho / dy_i dy_j dy_k = (d_ij y_k + d_ik y_j + d_jk y_i)/s^3 + 3 y_i y_j y_k / s^5
double SphereCapSurface::d111(double a, double b) const {
  const double q = s(a, b);
  return 3.0 * a / (q * q * q) + 3.0 * a * a * a / std::pow(q, 5);
}
double SphereCapSurface::d112(double a, double b) const {
  const double q = s(a, b);
  return b / (q * q * q) + 3.0 * a * a * b / std::pow(q, 5);
}
double SphereCapSurface::d122(double a, double b) const {
  const double q = s(a, b);
  return a / (q * q * q) + 3.0 * a * b * b / std::pow(q, 5);
}
double SphereCapSurface::d222(double a, double b) const {
  const double q = s(a, b);
  return 3.0 * b / (q * q * q) + 3.0 * b * b * b / std::pow(q, 5);
}

std::unique_ptr<GraphSurface> make_surface(const std::string& preset,
                                           const std::vector<double>& p) {
  if (preset == "flat") return std::make_unique<PolySurface>(std::map<std::pair<int, int>, double>{});
  if (preset == "paraboloid") {
    if (p.size() < 2) throw std::invalid_argument("paraboloid needs a, b");
    return std::make_unique<PolySurface>(
        std::map<std::pair<int, int>, double>{{{2, 0}, p[0]}, {{0, 2}, p[1]}});
  }
  if (preset == "sphere-cap") {
    if (p.empty()) throw std::invalid_argument("sphere-cap needs R");
    return std::make_unique<SphereCapSurface>(p[0]);
  }
  if (preset == "poly") {
    if (p.size() % 3 != 0) throw std::invalid_argument("poly needs (i,j,c) triples");
    std::map<std::pair<int, int>, double> c;
    for (std::size_t k = 0; k < p.size(); k += 3)
      c[{static_cast<int>(p[k]), static_cast<int>(p[k + 1])}] = p[k + 2];
    return std::make_unique<PolySurface>(std::move(c));
  }
  throw std::invalid_argument("unknown surface preset: " + preset);
}

Vec3 FlattenChart::psi_inv(const Vec3& y) const {
  const double r1 = s_->d1(y[0], y[1]), r2 = s_->d2(y[0], y[1]);
  return {y[0] - y[2] * r1, y[1] - y[2] * r2, s_->rho(y[0], y[1]) + y[2]};
}

Eigen::Matrix3d FlattenChart::jac_Ainv(const Vec3& y) const {
  const double r1 = s_->d1(y[0], y[1]), r2 = s_->d2(y[0], y[1]);
  const double r11 = s_->d11(y[0], y[1]), r12 = s_->d12(y[0], y[1]),
               r22 = s_->d22(y[0], y[1]);
  Eigen::Matrix3d m;
  m << 1 - y[2] * r11, -y[2] * r12, -r1,
       -y[2] * r12, 1 - y[2] * r22, -r2,
       r1, r2, 1;
  return m;
}

double FlattenChart::det_Ainv(const Vec3& y) const {
  const double r1 = s_->d1(y[0], y[1]), r2 = s_->d2(y[0], y[1]);
  const double r11 = s_->d11(y[0], y[1]), r12 = s_->d12(y[0], y[1]),
               r22 = s_->d22(y[0], y[1]);
  return y[2] * y[2] * (r11 * r22 - r12 * r12) +
         y[2] * (2 * r1 * r2 * r12 - r2 * r2 * r11 - r1 * r1 * r22 - r11 - r22) +
         (r1 * r1 + r2 * r2 + 1);
}

Eigen::Matrix3d FlattenChart::jac_A(const Vec3& y) const {
  const double r1 = s_->d1(y[0], y[1]), r2 = s_->d2(y[0], y[1]);
  const double r11 = s_->d11(y[0], y[1]), r12 = s_->d12(y[0], y[1]),
               r22 = s_->d22(y[0], y[1]);
  const double y3 = y[2];
  const double det = det_Ainv(y);
  if (det <= 0) throw std::runtime_error("flatten chart: degenerate (det <= 0)");
  Eigen::Matrix3d adj;
  adj << (1 + r2 * r2) - y3 * r22, -r1 * r2 + y3 * r12,
         r1 + y3 * (r2 * r12 - r1 * r22),
         -r1 * r2 + y3 * r12, (1 + r1 * r1) - y3 * r11,
         r2 + y3 * (r1 * r12 - r2 * r11),
         -r1 + y3 * (r1 * r22 - r2 * r12), -r2 + y3 * (r2 * r11 - r1 * r12),
         1 - y3 * (r11 + r22) + y3 * y3 * (r11 * r22 - r12 * r12);
  return adj / det;
}

Eigen::Matrix3d FlattenChart::mat_B(const Vec3& y, const Vec3& w) const {
  const double r11 = s_->d11(y[0], y[1]), r12 = s_->d12(y[0], y[1]),
               r22 = s_->d22(y[0], y[1]);
  const double r111 = s_->d111(y[0], y[1]), r112 = s_->d112(y[0], y[1]),
               r122 = s_->d122(y[0], y[1]), r222 = s_->d222(y[0], y[1]);
  const double y3 = y[2];
  Eigen::Matrix3d b;
  b << -y3 * r111 * w[0] - y3 * r112 * w[1] - r11 * w[2],
       -y3 * r112 * w[0] - y3 * r122 * w[1] - r12 * w[2],
       -r11 * w[0] - r12 * w[1],
       -y3 * r112 * w[0] - y3 * r122 * w[1] - r12 * w[2],
       -y3 * r122 * w[0] - y3 * r222 * w[1] - r22 * w[2],
       -r12 * w[0] - r22 * w[1],
       r11 * w[0] + r12 * w[1], r12 * w[0] + r22 * w[1], 0.0;
  return b;
}

Eigen::Matrix3d FlattenChart::mat_C(const Vec3& y) const {
  const double r1 = s_->d1(y[0], y[1]), r2 = s_->d2(y[0], y[1]);
  const double r11 = s_->d11(y[0], y[1]), r12 = s_->d12(y[0], y[1]),
               r22 = s_->d22(y[0], y[1]);
  const double y3 = y[2];
  Eigen::Matrix3d c;
  c(0, 0) = y3 * y3 * (r11 * r11 + r12 * r12) - 2 * y3 * r11 + (r1 * r1 + 1);
  c(0, 1) = y3 * y3 * r12 * (r11 + r22) - 2 * y3 * r12 + r1 * r2;
  c(0, 2) = y3 * (r1 * r11 + r2 * r12);
  c(1, 1) = y3 * y3 * (r12 * r12 + r22 * r22) - 2 * y3 * r22 + (r2 * r2 + 1);
  c(1, 2) = y3 * (r1 * r12 + r2 * r22);
  c(2, 2) = r1 * r1 + r2 * r2 + 1;
  c(1, 0) = c(0, 1);
  c(2, 0) = c(0, 2);
  c(2, 1) = c(1, 2);
  return c;
}

double FlattenChart::tubular_range(double y1, double y2, double y3_max,
                                   int steps) const {
  // det A^{-1} is an exact quadratic in y3; recover its coefficients from
  // three evaluations and bound the range by the nearest real root (folds
  // with a double root would be missed by a sign-change scan).
  (void)steps;
  const double s = y3_max;
  const double c = det_Ainv({y1, y2, 0.0});
  const double qp = det_Ainv({y1, y2, s});
  const double qm = det_Ainv({y1, y2, -s});
  const double a = (qp + qm - 2.0 * c) / (2.0 * s * s);
  const double b = (qp - qm) / (2.0 * s);
  double best = y3_max;
  if (std::abs(a) > 1e-300) {
    double disc = b * b - 4.0 * a * c;
    // a fold is a double root: do not lose it to a roundoff-negative
    // discriminant
    const double disc_scale = b * b + std::abs(4.0 * a * c);
    if (disc < 0.0 && disc > -1e-9 * disc_scale) disc = 0.0;
    if (disc >= 0.0) {
      const double r1 = (-b + std::sqrt(disc)) / (2.0 * a);
      const double r2 = (-b - std::sqrt(disc)) / (2.0 * a);
      for (double r : {r1, r2})
        if (std::abs(r) < best) best = std::abs(r);
    }
  } else if (std::abs(b) > 1e-300) {
    const double r = -c / b;
    if (std::abs(r) < best) best = std::abs(r);
  }
  return best;
}

FlattenSample flatten_maps(const FlattenChart& chart, const Vec3& y,
                           const Vec3& w) {
  return {chart.psi_inv(y), chart.jac_Ainv(y), chart.jac_A(y),
          chart.mat_B(y, w), chart.mat_C(y)};
}

double specular_commute_residual(const FlattenChart& chart, double y1,
                                 double y2, const Vec3& w) {
  const Vec3 y{y1, y2, 0.0};
  const Eigen::Matrix3d Ainv = chart.jac_Ainv(y);
  const Eigen::Vector3d wv(w[0], w[1], w[2]);
  const Eigen::Vector3d Rw(w[0], w[1], -w[2]);
  // n = d1_eta x d2_eta = <-rho1, -rho2, 1>, normalized
  const double r1 = chart.surface().d1(y1, y2), r2 = chart.surface().d2(y1, y2);
  Eigen::Vector3d n(-r1, -r2, 1.0);
  n.normalize();
  const Eigen::Vector3d lhs = Ainv * Rw;
  const Eigen::Vector3d Av = Ainv * wv;
  const Eigen::Vector3d rhs = Av - 2.0 * n.dot(Av) * n;
  return (lhs - rhs).norm();
}

MirrorField mirror_extend(const MirrorField& lower, double tol) {
  if (lower.y3.empty() || lower.y3.back() != 0.0)
    throw std::invalid_argument("mirror_extend: last level must be y3 = 0");
  const auto& g = *lower.wgrid;
  const auto& f0 = lower.values.back();
  double scale = 0.0, mis = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    mis = std::max(mis, std::abs(f0[k] - f0[g.flip(k, 2)]));
    scale = std::max(scale, std::abs(f0[k]));
  }
  if (mis > tol * std::max(scale, 1.0))
    throw std::runtime_error("mirror_extend: specular mismatch at the interface");
  MirrorField out;
  out.wgrid = lower.wgrid;
  out.y3 = lower.y3;
  out.values = lower.values;
  for (std::size_t l = lower.y3.size() - 1; l-- > 0;) {
    out.y3.push_back(-lower.y3[l]);
    std::vector<double> v(g.size());
    for (std::size_t k = 0; k < g.size(); ++k)
      v[k] = lower.values[l][g.flip(k, 2)];
    out.values.push_back(std::move(v));
  }
  return out;
}

TransformedCoefficients transformed_coefficients(
    const FlattenChart& chart, const VelocityGrid& grid, double gamma,
    const Vec3& y, const Vec3& w, const std::function<double(const Vec3&)>& g) {
  auto G = [&](const Vec3& v) {
    return maxwellian(v) +
           (g ? std::sqrt(maxwellian(v)) * g(v) : 0.0);
  };
  const Eigen::Matrix3d R = Eigen::Vector3d(1, 1, -1).asDiagonal();
  auto branch = [&](const Vec3& yy, const Vec3& ww, bool mirrored) {
    const Eigen::Matrix3d A = chart.jac_A(yy);
    const Eigen::Matrix3d Ainv = chart.jac_Ainv(yy);
    const Eigen::Vector3d wv(ww[0], ww[1], ww[2]);
    const Eigen::Vector3d vv = Ainv * wv;
    const Eigen::Matrix3d sg =
        sigma_direct_at(grid, gamma, {vv(0), vv(1), vv(2)}, G);
    Eigen::Matrix3d amat = A * sg * A.transpose();
    Eigen::Vector3d bvec = A * chart.mat_B(yy, ww) * wv;
    if (mirrored) {
      amat = R * amat * R;
      bvec = R * bvec;
    }
    return std::make_pair(amat, bvec);
  };
  TransformedCoefficients out;
  auto lo = branch(y, w, false);
  const Vec3 Ry{y[0], y[1], -y[2]};
  const Vec3 Rw{w[0], w[1], -w[2]};
  auto up = branch(Ry, Rw, true);
  out.A_low = lo.first;
  out.B_low = lo.second;
  out.A_up = up.first;
  out.B_up = up.second;
  auto lo0 = branch({y[0], y[1], 0.0}, w, false);
  auto up0 = branch({y[0], y[1], 0.0}, Rw, true);
  out.gap = (lo0.first - up0.first).norm();
  return out;
}

namespace {
// quintic smoothstep: C^2, 0 at t<=0, 1 at t>=1
double smooth01(double t) {
  t = std::min(1.0, std::max(0.0, t));
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}
}  // namespace

PartitionWeights partition_weights(const ImplicitDomain& d, double delta,
                                   int n_sectors) {
  PartitionWeights pw;
  pw.n_sectors = n_sectors;
  pw.delta = delta;
  auto dist = d.boundary_distance;
  auto tilde = [dist, delta](const Vec3& x) {
    const double t = -dist(x);  // distance into the interior
    return 1.0 - smooth01((t - 0.5 * delta) / (0.5 * delta));
  };
  pw.chi_tilde = tilde;
  Vec3 ctr{0.5 * (d.bb_lo[0] + d.bb_hi[0]), 0.5 * (d.bb_lo[1] + d.bb_hi[1]),
           0.5 * (d.bb_lo[2] + d.bb_hi[2])};
  pw.chi = [tilde, ctr, n_sectors](int k, const Vec3& x) {
    const double ct = tilde(x);
    if (k == 0) return 1.0 - ct;
    const double theta = std::atan2(x[1] - ctr[1], x[0] - ctr[0]);
    // periodic C^2 sector bumps, normalized over the tube
    double bumps[64];
    double total = 0.0;
    for (int j = 0; j < n_sectors; ++j) {
      double u = theta / (2 * M_PI) - static_cast<double>(j) / n_sectors;
      u -= std::floor(u + 0.5);  // wrap to [-1/2, 1/2)
      const double width = 1.5 / n_sectors;
      const double b = 1.0 - smooth01(std::abs(u) / width);
      bumps[j] = b;
      total += b;
    }
    return total > 0 ? ct * bumps[k - 1] / total : 0.0;
  };
  return pw;
}

}  // namespace vpl
