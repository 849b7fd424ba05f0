#include "vpl/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace vpl {

namespace {
std::size_t axis_stride(const VelocityGrid& g, int axis) {
  const int n = g.n_axis();
  if (axis == 0) return static_cast<std::size_t>(n) * n;
  if (axis == 1) return static_cast<std::size_t>(n);
  return 1;
}
int axis_pos(const VelocityGrid& g, std::size_t k, int axis) {
  const int n = g.n_axis();
  if (axis == 0) return static_cast<int>(k / (static_cast<std::size_t>(n) * n));
  if (axis == 1) return static_cast<int>((k / n) % n);
  return static_cast<int>(k % n);
}
}  // namespace

void apply_D(const VelocityGrid& g, std::span<const double> f, int axis,
             std::span<double> out) {
  const int n = g.n_axis();
  const double inv2h = 1.0 / (2.0 * g.h());
  const std::size_t s = axis_stride(g, axis);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const int p = axis_pos(g, k, axis);
    const double up = (p == n - 1) ? 0.0 : f[k + s];
    const double dn = (p == 0) ? 0.0 : f[k - s];
    out[k] = (up - dn) * inv2h;
  }
}

CollisionOperators::CollisionOperators(std::shared_ptr<const KernelTable> table)
    : table_(std::move(table)) {
  grid_ = std::shared_ptr<const VelocityGrid>(table_, &table_->grid());
  mu_coeffs_ = build_mu_coefficients(*table_);
  const int n = grid_->n_axis();
  const double h = grid_->h();
  // vt = -(D sqrt(mu)) / sqrt(mu) per axis position, so T sqrt(mu) = 0 holds
  // exactly on the whole box (interior values reduce to
  // exp(-h^2/2) sinh(v h) / h; the two edge rows absorb the zero padding).
  vt_axis_.resize(n);
  auto phi = [](double v) { return std::exp(-0.5 * v * v); };
  for (int i = 0; i < n; ++i) {
    const double up = (i == n - 1) ? 0.0 : phi(grid_->axis(i + 1));
    const double dn = (i == 0) ? 0.0 : phi(grid_->axis(i - 1));
    vt_axis_[i] = -(up - dn) / (2.0 * h * phi(grid_->axis(i)));
  }
  for (int axis = 0; axis < 3; ++axis) {
    vt_node_[axis].resize(grid_->size());
    for (std::size_t k = 0; k < grid_->size(); ++k)
      vt_node_[axis][k] = vt_axis_[axis_pos(*grid_, k, axis)];
  }
}

void CollisionOperators::apply_T(std::span<const double> f, int axis,
                                 std::span<double> out) const {
  apply_D(*grid_, f, axis, out);
  const auto& vt = vt_node_[axis];
  for (std::size_t k = 0; k < grid_->size(); ++k) out[k] += vt[k] * f[k];
}

void CollisionOperators::apply_Tdag(std::span<const double> f, int axis,
                                    std::span<double> out) const {
  apply_D(*grid_, f, axis, out);
  const auto& vt = vt_node_[axis];
  for (std::size_t k = 0; k < grid_->size(); ++k)
    out[k] = -out[k] + vt[k] * f[k];
}

void CollisionOperators::apply_A(std::span<const double> f,
                                 const TensorField& sigma,
                                 std::span<double> out) const {
  const std::size_t nv = grid_->size();
  std::vector<double> Tf[3], flux(nv), tmp(nv);
  for (int j = 0; j < 3; ++j) {
    Tf[j].resize(nv);
    apply_T(f, j, Tf[j]);
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < nv; ++k) {
      double acc = 0.0;
      for (int j = 0; j < 3; ++j) acc += sigma[kTensorIdx[i][j]][k] * Tf[j][k];
      flux[k] = acc;
    }
    apply_Tdag(flux, i, tmp);
    for (std::size_t k = 0; k < nv; ++k) out[k] -= tmp[k];
  }
}

void CollisionOperators::apply_K(std::span<const double> f,
                                 std::span<double> out) const {
  const std::size_t nv = grid_->size();
  const auto& smu = grid_->sqrt_mu();
  VectorField q, chi;
  std::vector<double> tmp(nv);
  for (int j = 0; j < 3; ++j) {
    q[j].resize(nv);
    apply_T(f, j, q[j]);
    for (std::size_t k = 0; k < nv; ++k) q[j][k] *= smu[k];
  }
  table_->conv_contract(q, chi);
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < nv; ++k) chi[i][k] *= smu[k];
    apply_Tdag(chi[i], i, tmp);
    for (std::size_t k = 0; k < nv; ++k) out[k] += tmp[k];
  }
}

void CollisionOperators::apply_L(std::span<const double> f,
                                 std::span<double> out) const {
  const std::size_t nv = grid_->size();
  std::vector<double> kf(nv);
  apply_A(f, mu_coeffs_.sigma, out);
  apply_K(f, kf);
  for (std::size_t k = 0; k < nv; ++k) out[k] = -out[k] - kf[k];
}

CollisionOperators::GammaCoeffs CollisionOperators::build_gamma_coeffs(
    std::span<const double> g) const {
  const std::size_t nv = grid_->size();
  const auto& smu = grid_->sqrt_mu();
  GammaCoeffs gc;
  std::vector<double> u(nv);
  for (std::size_t k = 0; k < nv; ++k) u[k] = smu[k] * g[k];
  table_->conv_tensor(u, gc.b);
  VectorField q;
  for (int j = 0; j < 3; ++j) {
    q[j].resize(nv);
    apply_T(g, j, q[j]);
    for (std::size_t k = 0; k < nv; ++k) q[j][k] *= smu[k];
  }
  table_->conv_contract(q, gc.c);
  return gc;
}

void CollisionOperators::apply_Gamma(const GammaCoeffs& gc,
                                     std::span<const double> f,
                                     std::span<double> out) const {
  const std::size_t nv = grid_->size();
  std::vector<double> Tf[3], flux(nv), tmp(nv);
  for (int j = 0; j < 3; ++j) {
    Tf[j].resize(nv);
    apply_T(f, j, Tf[j]);
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < nv; ++k) {
      double acc = -gc.c[i][k] * f[k];
      for (int j = 0; j < 3; ++j) acc += gc.b[kTensorIdx[i][j]][k] * Tf[j][k];
      flux[k] = acc;
    }
    apply_Tdag(flux, i, tmp);
    for (std::size_t k = 0; k < nv; ++k) out[k] -= tmp[k];
  }
}

CollisionOperators::Rearranged CollisionOperators::build_rearranged(
    std::span<const double> g) const {
  Rearranged r;
  r.sigma_G = build_sigma_G(*table_, g);
  r.a_g = build_drift(*table_, g);
  r.gc = build_gamma_coeffs(g);
  return r;
}

void CollisionOperators::apply_Abar(const Rearranged& r,
                                    std::span<const double> f,
                                    std::span<double> out) const {
  const std::size_t nv = grid_->size();
  std::vector<double> Tf[3], flux(nv), tmp(nv);
  for (int j = 0; j < 3; ++j) {
    Tf[j].resize(nv);
    apply_T(f, j, Tf[j]);
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < nv; ++k) {
      double acc = -r.gc.c[i][k] * f[k];
      for (int j = 0; j < 3; ++j) acc += r.sigma_G[kTensorIdx[i][j]][k] * Tf[j][k];
      flux[k] = acc;
    }
    apply_Tdag(flux, i, tmp);
    for (std::size_t k = 0; k < nv; ++k) out[k] -= tmp[k];
  }
}

void CollisionOperators::apply_Kbar(std::span<const double> f,
                                    std::span<double> out) const {
  apply_K(f, out);
}

double sigma_inner(const CollisionOperators& ops, std::span<const double> f,
                   std::span<const double> g, double theta) {
  const auto& grid = ops.grid();
  const std::size_t nv = grid.size();
  const auto& w = grid.bracket_pow(2.0 * theta);
  const auto& sigma = ops.sigma();
  std::vector<double> Df[3], Dg[3];
  for (int i = 0; i < 3; ++i) {
    Df[i].resize(nv);
    Dg[i].resize(nv);
    apply_D(grid, f, i, Df[i]);
    apply_D(grid, g, i, Dg[i]);
  }
  double s = 0.0;
  for (std::size_t k = 0; k < nv; ++k) {
    const Vec3 v = grid.node(k);
    double acc = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double sij = sigma[kTensorIdx[i][j]][k];
        acc += sij * (Df[i][k] * Dg[j][k] + v[i] * v[j] * f[k] * g[k]);
      }
    s += w[k] * acc;
  }
  return s * grid.cell_volume();
}

MacroBasis::MacroBasis(std::shared_ptr<const VelocityGrid> grid)
    : grid_(std::move(grid)) {
  const auto& g = *grid_;
  const std::size_t nv = g.size();
  for (auto& r : raw_) r.resize(nv);
  for (std::size_t k = 0; k < nv; ++k) {
    const Vec3 v = g.node(k);
    const double sm = g.sqrt_mu()[k];
    raw_[0][k] = sm;
    raw_[1][k] = v[0] * sm;
    raw_[2][k] = v[1] * sm;
    raw_[3][k] = v[2] * sm;
    raw_[4][k] = norm2(v) * sm;
  }
  auto ip = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < nv; ++k) s += a[k] * b[k];
    return s * g.cell_volume();
  };
  Eigen::Matrix<double, 5, 5> gram;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) gram(i, j) = ip(raw_[i], raw_[j]);
  gram_inv_ = gram.inverse();

  // modified Gram-Schmidt for the orthonormal basis
  for (int i = 0; i < 5; ++i) {
    e_[i] = raw_[i];
    for (int j = 0; j < i; ++j) {
      const double c = ip(e_[i], e_[j]);
      for (std::size_t k = 0; k < nv; ++k) e_[i][k] -= c * e_[j][k];
    }
    const double nrm = std::sqrt(ip(e_[i], e_[i]));
    for (double& x : e_[i]) x /= nrm;
  }
}

MacroBasis::Moments MacroBasis::moments(std::span<const double> f) const {
  const auto& g = *grid_;
  Eigen::Matrix<double, 5, 1> m;
  for (int i = 0; i < 5; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) s += raw_[i][k] * f[k];
    m(i) = s * g.cell_volume();
  }
  const Eigen::Matrix<double, 5, 1> coef = gram_inv_ * m;
  return {coef(0), {coef(1), coef(2), coef(3)}, coef(4)};
}

void MacroBasis::reconstruct(const Moments& m, std::span<double> pf) const {
  const auto& g = *grid_;
  for (std::size_t k = 0; k < g.size(); ++k)
    pf[k] = m.a * raw_[0][k] + m.b[0] * raw_[1][k] + m.b[1] * raw_[2][k] +
            m.b[2] * raw_[3][k] + m.c * raw_[4][k];
}

void MacroBasis::project(std::span<const double> f, std::span<double> pf) const {
  reconstruct(moments(f), pf);
}

}  // namespace vpl
