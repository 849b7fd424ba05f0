#include "vpl/landau.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace vpl {

Eigen::Matrix3d phi_kernel(const Vec3& w, double gamma) {
  const double r2 = norm2(w);
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  if (r2 == 0.0) return out;
  const double r = std::sqrt(r2);
  const double s = std::pow(r, gamma + 2.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      out(i, j) = s * ((i == j ? 1.0 : 0.0) - w[i] * w[j] / r2);
  return out;
}

namespace {

// int Phi^{ii}(w) exp(-tau |w|^2) dw / 3 (no sum), i.e. the isotropic scalar m
// with int Phi e^{-tau|w|^2} = m I.
double gaussian_reference_integral(double gamma, double tau) {
  const double a = 0.5 * (gamma + 5.0);
  return (4.0 * M_PI / 3.0) * std::tgamma(a) / std::pow(tau, a);
}

}  // namespace

struct KernelTable::Fft {
  int np = 0;
  std::size_t real_size = 0, spec_size = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr, inv = nullptr;

  explicit Fft(int np_) : np(np_) {
    real_size = static_cast<std::size_t>(np) * np * np;
    spec_size = static_cast<std::size_t>(np) * np * (np / 2 + 1);
    real = fftw_alloc_real(real_size);
    spec = fftw_alloc_complex(spec_size);
    fwd = fftw_plan_dft_r2c_3d(np, np, np, real, spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_3d(np, np, np, spec, real, FFTW_ESTIMATE);
  }
  ~Fft() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(spec);
  }
};

KernelTable::KernelTable(double gamma, std::shared_ptr<const VelocityGrid> grid,
                         double tau)
    : gamma_(gamma), tau_(tau), grid_(std::move(grid)) {
  np_ = 2 * grid_->n_axis();
  spec_size_ = static_cast<std::size_t>(np_) * np_ * (np_ / 2 + 1);
  init_plans(nullptr);
}

KernelTable::~KernelTable() = default;

void KernelTable::build_tables(std::vector<double>* keep_real) const {
  const int n = grid_->n_axis();
  const int np = np_;
  const double h = grid_->h();
  const double h3 = grid_->cell_volume();
  const std::size_t real_size = static_cast<std::size_t>(np) * np * np;

  // Lattice sum of the diagonal against the Gaussian reference.
  double S = 0.0;
  for (int a = -(n - 1); a <= n - 1; ++a)
    for (int b = -(n - 1); b <= n - 1; ++b)
      for (int c = -(n - 1); c <= n - 1; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        const double r2 = (double(a) * a + double(b) * b + double(c) * c) * h * h;
        S += (2.0 / 3.0) * std::pow(r2, 0.5 * (gamma_ + 2.0)) *
             std::exp(-tau_ * r2) * h3;
      }
  const double origin = gaussian_reference_integral(gamma_, tau_) - S;
  const_cast<KernelTable*>(this)->origin_ = origin;
  if (origin <= 0.0)
    throw std::runtime_error("kernel table: origin correction not positive");

  for (int comp = 0; comp < 6; ++comp) keep_real[comp].assign(real_size, 0.0);
  static constexpr int ci[6] = {0, 0, 0, 1, 1, 2};
  static constexpr int cj[6] = {0, 1, 2, 1, 2, 2};
  for (int a = -(n - 1); a <= n - 1; ++a)
    for (int b = -(n - 1); b <= n - 1; ++b)
      for (int c = -(n - 1); c <= n - 1; ++c) {
        const std::size_t slot =
            (static_cast<std::size_t>((a + np) % np) * np + (b + np) % np) * np +
            (c + np) % np;
        if (a == 0 && b == 0 && c == 0) {
          for (int comp : {0, 3, 5}) keep_real[comp][slot] = origin;
          continue;
        }
        const Vec3 w{a * h, b * h, c * h};
        const Eigen::Matrix3d phi = phi_kernel(w, gamma_);
        for (int comp = 0; comp < 6; ++comp)
          keep_real[comp][slot] = phi(ci[comp], cj[comp]) * h3;
      }
}

void KernelTable::init_plans(const std::vector<double>* preloaded) {
  fft_ = std::make_unique<Fft>(np_);
  std::vector<double> tables[6];
  if (!preloaded) {
    build_tables(tables);
    preloaded = tables;
  } else {
    // origin entry lives on the diagonal components at slot 0
    origin_ = preloaded[0][0];
  }
  khat_.resize(6);
  for (int comp = 0; comp < 6; ++comp) {
    std::memcpy(fft_->real, preloaded[comp].data(),
                fft_->real_size * sizeof(double));
    fftw_execute(fft_->fwd);
    khat_[comp].assign(reinterpret_cast<std::complex<double>*>(fft_->spec),
                       reinterpret_cast<std::complex<double>*>(fft_->spec) +
                           spec_size_);
  }
}

namespace {
// Scatter an n^3 field into the corner of the padded np^3 buffer.
void pad_in(const double* u, double* real, int n, int np) {
  const std::size_t real_size = static_cast<std::size_t>(np) * np * np;
  std::memset(real, 0, real_size * sizeof(double));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      std::memcpy(real + (static_cast<std::size_t>(i) * np + j) * np,
                  u + (static_cast<std::size_t>(i) * n + j) * n,
                  static_cast<std::size_t>(n) * sizeof(double));
}
void pad_out(const double* real, double* u, int n, int np, double scale) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double* src = real + (static_cast<std::size_t>(i) * np + j) * np;
      double* dst = u + (static_cast<std::size_t>(i) * n + j) * n;
      for (int k = 0; k < n; ++k) dst[k] = src[k] * scale;
    }
}
}  // namespace

void KernelTable::conv_tensor(std::span<const double> u, TensorField& out) const {
  const int n = grid_->n_axis(), np = np_;
  pad_in(u.data(), fft_->real, n, np);
  fftw_execute(fft_->fwd);
  std::vector<std::complex<double>> uhat(
      reinterpret_cast<std::complex<double>*>(fft_->spec),
      reinterpret_cast<std::complex<double>*>(fft_->spec) + spec_size_);
  const double scale = 1.0 / static_cast<double>(fft_->real_size);
  for (int comp = 0; comp < 6; ++comp) {
    auto* spec = reinterpret_cast<std::complex<double>*>(fft_->spec);
    for (std::size_t s = 0; s < spec_size_; ++s) spec[s] = khat_[comp][s] * uhat[s];
    fftw_execute(fft_->inv);
    out[comp].resize(grid_->size());
    pad_out(fft_->real, out[comp].data(), n, np, scale);
  }
}

void KernelTable::conv_contract(const VectorField& q, VectorField& out) const {
  const int n = grid_->n_axis(), np = np_;
  std::vector<std::complex<double>> qhat[3];
  for (int j = 0; j < 3; ++j) {
    pad_in(q[j].data(), fft_->real, n, np);
    fftw_execute(fft_->fwd);
    qhat[j].assign(reinterpret_cast<std::complex<double>*>(fft_->spec),
                   reinterpret_cast<std::complex<double>*>(fft_->spec) +
                       spec_size_);
  }
  const double scale = 1.0 / static_cast<double>(fft_->real_size);
  for (int i = 0; i < 3; ++i) {
    auto* spec = reinterpret_cast<std::complex<double>*>(fft_->spec);
    for (std::size_t s = 0; s < spec_size_; ++s) {
      std::complex<double> acc = 0.0;
      for (int j = 0; j < 3; ++j) acc += khat_[kTensorIdx[i][j]][s] * qhat[j][s];
      spec[s] = acc;
    }
    fftw_execute(fft_->inv);
    out[i].resize(grid_->size());
    pad_out(fft_->real, out[i].data(), n, np, scale);
  }
}

void KernelTable::conv_tensor_direct(std::span<const double> u,
                                     TensorField& out) const {
  const auto& g = *grid_;
  const double h3 = g.cell_volume();
  for (auto& o : out) o.assign(g.size(), 0.0);
  static constexpr int ci[6] = {0, 0, 0, 1, 1, 2};
  static constexpr int cj[6] = {0, 1, 2, 1, 2, 2};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec3 v = g.node(k);
    double acc[6] = {0, 0, 0, 0, 0, 0};
    for (std::size_t m = 0; m < g.size(); ++m) {
      if (m == k) {
        for (int comp : {0, 3, 5}) acc[comp] += origin_ * u[m];
        continue;
      }
      const Vec3 vm = g.node(m);
      const Vec3 w{v[0] - vm[0], v[1] - vm[1], v[2] - vm[2]};
      const Eigen::Matrix3d phi = phi_kernel(w, gamma_);
      for (int comp = 0; comp < 6; ++comp)
        acc[comp] += phi(ci[comp], cj[comp]) * u[m] * h3;
    }
    for (int comp = 0; comp < 6; ++comp) out[comp][k] = acc[comp];
  }
}

namespace {
constexpr char kMagic[8] = {'V', 'P', 'L', 'K', 'T', 'B', 'L', '1'};
}

void KernelTable::write_cache(const std::filesystem::path& p) const {
  std::vector<double> tables[6];
  build_tables(tables);
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("kernel cache: cannot open " + p.string());
  os.write(kMagic, 8);
  const std::uint64_t version = 1, n = static_cast<std::uint64_t>(grid_->n_axis());
  const double g = gamma_, vm = grid_->v_max();
  os.write(reinterpret_cast<const char*>(&version), 8);
  os.write(reinterpret_cast<const char*>(&g), 8);
  os.write(reinterpret_cast<const char*>(&vm), 8);
  os.write(reinterpret_cast<const char*>(&n), 8);
  for (int comp = 0; comp < 6; ++comp)
    os.write(reinterpret_cast<const char*>(tables[comp].data()),
             static_cast<std::streamsize>(tables[comp].size() * sizeof(double)));
  if (!os) throw std::runtime_error("kernel cache: write failed");
}

std::unique_ptr<KernelTable> KernelTable::load_cache(
    const std::filesystem::path& p, double gamma,
    std::shared_ptr<const VelocityGrid> grid, double tau) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("kernel cache: cannot open " + p.string());
  char magic[8];
  std::uint64_t version, n;
  double g, vm;
  is.read(magic, 8);
  is.read(reinterpret_cast<char*>(&version), 8);
  is.read(reinterpret_cast<char*>(&g), 8);
  is.read(reinterpret_cast<char*>(&vm), 8);
  is.read(reinterpret_cast<char*>(&n), 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0 || version != 1)
    throw std::runtime_error("kernel cache: bad header in " + p.string());
  if (g != gamma || vm != grid->v_max() ||
      n != static_cast<std::uint64_t>(grid->n_axis()))
    throw std::runtime_error("kernel cache: key mismatch in " + p.string());

  auto t = std::unique_ptr<KernelTable>(new KernelTable());
  t->gamma_ = gamma;
  t->tau_ = tau;
  t->grid_ = std::move(grid);
  t->np_ = 2 * t->grid_->n_axis();
  t->spec_size_ = static_cast<std::size_t>(t->np_) * t->np_ * (t->np_ / 2 + 1);
  const std::size_t real_size =
      static_cast<std::size_t>(t->np_) * t->np_ * t->np_;
  std::vector<double> tables[6];
  for (int comp = 0; comp < 6; ++comp) {
    tables[comp].resize(real_size);
    is.read(reinterpret_cast<char*>(tables[comp].data()),
            static_cast<std::streamsize>(real_size * sizeof(double)));
  }
  if (!is) throw std::runtime_error("kernel cache: truncated payload");
  t->init_plans(tables);
  return t;
}

Eigen::Matrix3d sigma_direct_at(const VelocityGrid& g, double gamma,
                                const Vec3& v,
                                const std::function<double(const Vec3&)>& u,
                                double tau) {
  const double h3 = g.cell_volume();
  const double uv = u(v);
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (std::size_t m = 0; m < g.size(); ++m) {
    const Vec3 vm = g.node(m);
    const Vec3 w{v[0] - vm[0], v[1] - vm[1], v[2] - vm[2]};
    const double r2 = norm2(w);
    if (r2 < 1e-24) continue;
    acc += phi_kernel(w, gamma) * (u(vm) - uv * std::exp(-tau * r2)) * h3;
  }
  acc += uv * gaussian_reference_integral(gamma, tau) * Eigen::Matrix3d::Identity();
  return acc;
}

CoefficientSet build_mu_coefficients(const KernelTable& table) {
  const auto& g = table.grid();
  CoefficientSet cs;
  table.conv_tensor(g.mu(), cs.sigma);
  VectorField q;
  for (int j = 0; j < 3; ++j) {
    q[j].resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) q[j][k] = g.node(k)[j] * g.mu()[k];
  }
  table.conv_contract(q, cs.sigma_i);
  return cs;
}

TensorField build_sigma_G(const KernelTable& table, std::span<const double> g) {
  const auto& grid = table.grid();
  std::vector<double> G(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    G[k] = grid.mu()[k] + grid.sqrt_mu()[k] * g[k];
  TensorField out;
  table.conv_tensor(G, out);
  if (tensor_eig_range(grid, out).min_eig <= 0.0)
    throw std::runtime_error("sigma_G lost positive definiteness");
  return out;
}

namespace {
// d/dv_j on one velocity axis: centered interior, second-order one-sided
// at the box ends.  (Coefficient-building only.)
void axis_derivative(const VelocityGrid& g, std::span<const double> f, int axis,
                     std::vector<double>& out) {
  const int n = g.n_axis();
  const double h = g.h();
  out.resize(g.size());
  std::size_t stride = 1;
  if (axis == 0) stride = static_cast<std::size_t>(n) * n;
  else if (axis == 1) stride = n;
  for (std::size_t k = 0; k < g.size(); ++k) {
    int pos;
    if (axis == 0) pos = static_cast<int>(k / (static_cast<std::size_t>(n) * n));
    else if (axis == 1) pos = static_cast<int>((k / n) % n);
    else pos = static_cast<int>(k % n);
    if (pos == 0)
      out[k] = (-3.0 * f[k] + 4.0 * f[k + stride] - f[k + 2 * stride]) / (2 * h);
    else if (pos == n - 1)
      out[k] = (3.0 * f[k] - 4.0 * f[k - stride] + f[k - 2 * stride]) / (2 * h);
    else
      out[k] = (f[k + stride] - f[k - stride]) / (2 * h);
  }
}
}  // namespace

VectorField build_drift(const KernelTable& table, std::span<const double> g) {
  const auto& grid = table.grid();
  VectorField q;
  std::vector<double> dg;
  for (int j = 0; j < 3; ++j) {
    axis_derivative(grid, g, j, dg);
    q[j].resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
      q[j][k] = grid.sqrt_mu()[k] * (grid.node(k)[j] * g[k] + dg[k]);
  }
  VectorField out;
  table.conv_contract(q, out);
  for (auto& comp : out)
    for (double& x : comp) x = -x;
  return out;
}

Eigen::Matrix3d tensor_at(const TensorField& t, std::size_t idx) {
  Eigen::Matrix3d m;
  m << t[0][idx], t[1][idx], t[2][idx],
       t[1][idx], t[3][idx], t[4][idx],
       t[2][idx], t[4][idx], t[5][idx];
  return m;
}

EigRange tensor_eig_range(const VelocityGrid& g, const TensorField& t) {
  EigRange r{1e300, -1e300};
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
  for (std::size_t k = 0; k < g.size(); ++k) {
    es.compute(tensor_at(t, k), Eigen::EigenvaluesOnly);
    r.min_eig = std::min(r.min_eig, es.eigenvalues()(0));
    r.max_eig = std::max(r.max_eig, es.eigenvalues()(2));
  }
  return r;
}

LambdaPair lambda_formulas(const VelocityGrid& g, double gamma, const Vec3& v,
                           double tau) {
  const double h3 = g.cell_volume();
  const double vn = std::sqrt(norm2(v));
  Vec3 vhat{1.0, 0.0, 0.0};
  if (vn > 1e-14) vhat = {v[0] / vn, v[1] / vn, v[2] / vn};
  const double muv = maxwellian(v);
  double l1 = 0.0, l2 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t m = 0; m < g.size(); ++m) {
    const Vec3 vm = g.node(m);
    const Vec3 w{v[0] - vm[0], v[1] - vm[1], v[2] - vm[2]};
    const double r2 = norm2(w);
    if (r2 < 1e-24) continue;
    const double r = std::sqrt(r2);
    const double cos2 = dot(vhat, w) * dot(vhat, w) / r2;
    const double g1 = 1.0 - cos2;
    const double g2 = 1.0 - 0.5 * (1.0 - cos2);  // 1 - |vhat x what|^2 / 2
    const double s = std::pow(r, gamma + 2.0);
    const double ref = std::exp(-tau * r2);
    l1 += g1 * s * g.mu()[m] * h3;
    l2 += g2 * s * g.mu()[m] * h3;
    s1 += g1 * s * ref * h3;
    s2 += g2 * s * ref * h3;
  }
  const double M = gaussian_reference_integral(gamma, tau);  // = <g1> and <g2>
  return {l1 + muv * (M - s1), l2 + muv * (M - s2)};
}

}  // namespace vpl
