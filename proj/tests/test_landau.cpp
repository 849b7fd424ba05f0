#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <memory>
#include <random>

#include "vpl/landau.hpp"

using namespace vpl;

TEST_CASE("kernel matrix annihilates its argument and has the right spectrum") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int i = 0; i < 500; ++i) {
    Vec3 w{u(rng), u(rng), u(rng)};
    const double r = std::sqrt(norm2(w));
    if (r < 1e-2) continue;
    const Eigen::Matrix3d phi = phi_kernel(w, -3.0);
    Eigen::Vector3d wv(w[0], w[1], w[2]);
    CHECK((phi * wv).cwiseAbs().maxCoeff() < 1e-13);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(phi);
    CHECK(std::abs(es.eigenvalues()(0)) < 1e-12);
    CHECK(std::abs(es.eigenvalues()(1) - 1.0 / r) < 1e-12);
    CHECK(std::abs(es.eigenvalues()(2) - 1.0 / r) < 1e-12);
  }
}

TEST_CASE("kernel matrix for general gamma") {
  Vec3 w{0.5, -1.0, 2.0};
  const double r = std::sqrt(norm2(w));
  for (double gamma : {-3.0, -2.0, 0.0}) {
    const Eigen::Matrix3d phi = phi_kernel(w, gamma);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(phi);
    CHECK(std::abs(es.eigenvalues()(2) - std::pow(r, gamma + 2.0)) < 1e-12);
  }
}

TEST_CASE("FFT and direct convolution paths agree") {
  auto grid = std::make_shared<VelocityGrid>(3.0, 8);
  KernelTable table(-3.0, grid);
  std::vector<double> u(grid->size());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (auto& x : u) x = d(rng);
  TensorField a, b;
  table.conv_tensor(u, a);
  table.conv_tensor_direct(u, b);
  double worst = 0;
  for (int c = 0; c < 6; ++c)
    for (std::size_t k = 0; k < grid->size(); ++k)
      worst = std::max(worst, std::abs(a[c][k] - b[c][k]));
  CHECK(worst < 1e-12);
}

TEST_CASE("table cache round-trips bit-exactly") {
  auto grid = std::make_shared<VelocityGrid>(3.0, 8);
  KernelTable table(-3.0, grid);
  const auto path = std::filesystem::temp_directory_path() / "vpl_ktbl_test.bin";
  table.write_cache(path);
  auto loaded = KernelTable::load_cache(path, -3.0, grid);
  std::vector<double> u(grid->size());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (auto& x : u) x = d(rng);
  TensorField a, b;
  table.conv_tensor(u, a);
  loaded->conv_tensor(u, b);
  for (int c = 0; c < 6; ++c)
    for (std::size_t k = 0; k < grid->size(); ++k)
      CHECK(a[c][k] == b[c][k]);
  // key mismatch must be rejected
  auto grid2 = std::make_shared<VelocityGrid>(3.0, 10);
  CHECK_THROWS(KernelTable::load_cache(path, -3.0, grid2));
  std::filesystem::remove(path);
}

TEST_CASE("sigma(0) approaches (4 pi / 3) I") {
  auto grid = std::make_shared<VelocityGrid>(6.0, 16);
  const Eigen::Matrix3d s = sigma_direct_at(
      *grid, -3.0, {0, 0, 0}, [](const Vec3& v) { return maxwellian(v); });
  const double target = 4.0 * M_PI / 3.0;
  CHECK(std::abs(s(0, 0) - target) / target < 5e-3);
  CHECK(std::abs(s(0, 1)) < 1e-12);
  CHECK(std::abs(s(1, 1) - s(0, 0)) < 1e-12);
}

TEST_CASE("sigma_i identity: sigma^i(v) = sigma^{ij}(v) v_j on the lattice") {
  auto grid = std::make_shared<VelocityGrid>(4.0, 12);
  KernelTable table(-3.0, grid);
  const CoefficientSet cs = build_mu_coefficients(table);
  double worst = 0;
  for (std::size_t k = 0; k < grid->size(); ++k) {
    const Vec3 v = grid->node(k);
    for (int i = 0; i < 3; ++i) {
      double s = 0;
      for (int j = 0; j < 3; ++j) s += cs.sigma[kTensorIdx[i][j]][k] * v[j];
      worst = std::max(worst, std::abs(cs.sigma_i[i][k] - s));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("sigma tensor is symmetric positive definite on the lattice") {
  auto grid = std::make_shared<VelocityGrid>(4.0, 12);
  KernelTable table(-3.0, grid);
  const CoefficientSet cs = build_mu_coefficients(table);
  const EigRange er = tensor_eig_range(*grid, cs.sigma);
  CHECK(er.min_eig > 0);
  CHECK(er.max_eig < 4.5);  // bounded by sigma(0) scale
}

TEST_CASE("eigenvalue formulas are consistent with the quadrature tensor") {
  auto grid = std::make_shared<VelocityGrid>(6.0, 32);
  for (double r : {1.0, 2.0, 3.5}) {
    const Vec3 v{r, 0, 0};
    const Eigen::Matrix3d s = sigma_direct_at(
        *grid, -3.0, v, [](const Vec3& w) { return maxwellian(w); });
    const LambdaPair lp = lambda_formulas(*grid, -3.0, v);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(s);
    // lambda1 is simple (direction v), lambda2 double
    CHECK(std::abs(es.eigenvalues()(2) - lp.lambda2) / lp.lambda2 < 1e-3);
    Eigen::Vector3d vv(v[0], v[1], v[2]);
    const double ray = vv.dot(s * vv) / vv.squaredNorm();
    CHECK(std::abs(ray - lp.lambda1) / lp.lambda1 < 1e-3);
  }
}

TEST_CASE("build_sigma_G stays positive for a small perturbation") {
  auto grid = std::make_shared<VelocityGrid>(4.0, 12);
  KernelTable table(-3.0, grid);
  std::vector<double> g(grid->size());
  for (std::size_t k = 0; k < grid->size(); ++k)
    g[k] = 1e-3 * grid->sqrt_mu()[k];
  const TensorField sg = build_sigma_G(table, g);
  CHECK(tensor_eig_range(*grid, sg).min_eig > 0);
}
