#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "vpl/operators.hpp"

using namespace vpl;

namespace {

std::vector<double> random_field(const VelocityGrid& g, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> f(g.size());
  for (auto& x : f) x = u(rng);
  return f;
}

double dot_v(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("centered difference is exactly antisymmetric") {
  VelocityGrid g(3.0, 8);
  auto f = random_field(g, 1), h = random_field(g, 2);
  std::vector<double> df(g.size()), dh(g.size());
  for (int a = 0; a < 3; ++a) {
    apply_D(g, f, a, df);
    apply_D(g, h, a, dh);
    CHECK(std::abs(dot_v(df, h) + dot_v(f, dh)) < 1e-13 * g.size());
  }
}

TEST_CASE("T annihilates sqrt(mu) identically, including the box edge") {
  auto grid = std::make_shared<VelocityGrid>(4.0, 12);
  auto table = std::make_shared<KernelTable>(-3.0, grid);
  CollisionOperators ops(table);
  std::vector<double> out(grid->size());
  for (int a = 0; a < 3; ++a) {
    ops.apply_T(grid->sqrt_mu(), a, out);
    for (double x : out) CHECK(std::abs(x) < 1e-15);
  }
}

TEST_CASE("Tdag is the exact transpose of T") {
  auto grid = std::make_shared<VelocityGrid>(3.0, 8);
  auto table = std::make_shared<KernelTable>(-3.0, grid);
  CollisionOperators ops(table);
  auto f = random_field(*grid, 3), h = random_field(*grid, 4);
  std::vector<double> tf(grid->size()), th(grid->size());
  for (int a = 0; a < 3; ++a) {
    ops.apply_T(f, a, tf);
    ops.apply_Tdag(h, a, th);
    CHECK(std::abs(dot_v(tf, h) - dot_v(f, th)) < 1e-13 * grid->size());
  }
}

TEST_CASE("L is symmetric and positive semidefinite") {
  auto grid = std::make_shared<VelocityGrid>(4.0, 10);
  auto table = std::make_shared<KernelTable>(-3.0, grid);
  CollisionOperators ops(table);
  const std::size_t nv = grid->size();
  std::vector<double> Lf(nv), Lh(nv);
  for (unsigned long s = 0; s < 10; ++s) {
    auto f = random_field(*grid, 10 + s), h = random_field(*grid, 50 + s);
    ops.apply_L(f, Lf);
    ops.apply_L(h, Lh);
    const double scale = std::sqrt(dot_v(f, f) * dot_v(h, h));
    CHECK(std::abs(dot_v(Lf, h) - dot_v(f, Lh)) < 1e-10 * scale);
    CHECK(dot_v(Lf, f) >= -1e-8 * dot_v(f, f));
  }
}

TEST_CASE("L annihilates sqrt(mu) exactly and the other invariants to O(h^2)") {
  auto grid = std::make_shared<VelocityGrid>(4.0, 16);
  auto table = std::make_shared<KernelTable>(-3.0, grid);
  CollisionOperators ops(table);
  MacroBasis basis(grid);
  std::vector<double> Lf(grid->size());
  ops.apply_L(basis.e(0), Lf);
  CHECK(std::sqrt(dot_v(Lf, Lf)) < 1e-12);
  for (int i = 1; i < 5; ++i) {
    ops.apply_L(basis.e(i), Lf);
    CHECK(std::sqrt(dot_v(Lf, Lf)) < 5.0);
  }
}

TEST_CASE("macro projection: orthonormal basis, P^2 = P, moment consistency") {
  auto grid = std::make_shared<VelocityGrid>(4.0, 12);
  MacroBasis basis(grid);
  const std::size_t nv = grid->size();
  const double h3 = grid->cell_volume();
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double ip = dot_v(basis.e(i), basis.e(j)) * h3;
      CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-12);
    }
  auto f = random_field(*grid, 7);
  std::vector<double> pf(nv), ppf(nv);
  basis.project(f, pf);
  basis.project(pf, ppf);
  for (std::size_t k = 0; k < nv; ++k) CHECK(std::abs(pf[k] - ppf[k]) < 1e-13);
  // moments reconstruct the projection
  const auto m = basis.moments(f);
  std::vector<double> rec(nv);
  basis.reconstruct(m, rec);
  for (std::size_t k = 0; k < nv; ++k) CHECK(std::abs(pf[k] - rec[k]) < 1e-12);
}

TEST_CASE("Gamma is bilinear and mass-orthogonal") {
  auto grid = std::make_shared<VelocityGrid>(4.0, 10);
  auto table = std::make_shared<KernelTable>(-3.0, grid);
  CollisionOperators ops(table);
  const std::size_t nv = grid->size();
  auto g1 = random_field(*grid, 21), g2 = random_field(*grid, 22);
  auto f1 = random_field(*grid, 23), f2 = random_field(*grid, 24);
  const double al = 0.7, be = -1.3;
  std::vector<double> out1(nv), out2(nv), out3(nv), comb(nv);

  // linear in g
  std::vector<double> gsum(nv);
  for (std::size_t k = 0; k < nv; ++k) gsum[k] = al * g1[k] + be * g2[k];
  ops.apply_Gamma(ops.build_gamma_coeffs(gsum), f1, out3);
  ops.apply_Gamma(ops.build_gamma_coeffs(g1), f1, out1);
  ops.apply_Gamma(ops.build_gamma_coeffs(g2), f1, out2);
  double amp = 1.0;
  for (std::size_t k = 0; k < nv; ++k) amp = std::max(amp, std::abs(out3[k]));
  for (std::size_t k = 0; k < nv; ++k) {
    comb[k] = al * out1[k] + be * out2[k];
    CHECK(std::abs(out3[k] - comb[k]) < 1e-12 * amp);
  }
  // linear in f
  const auto gc = ops.build_gamma_coeffs(g1);
  std::vector<double> fsum(nv);
  for (std::size_t k = 0; k < nv; ++k) fsum[k] = al * f1[k] + be * f2[k];
  ops.apply_Gamma(gc, fsum, out3);
  ops.apply_Gamma(gc, f1, out1);
  ops.apply_Gamma(gc, f2, out2);
  for (std::size_t k = 0; k < nv; ++k)
    CHECK(std::abs(out3[k] - (al * out1[k] + be * out2[k])) < 1e-12 * amp);

  // < sqrt(mu), Gamma[g, f] > = 0 (exact flux form)
  for (unsigned long s = 0; s < 10; ++s) {
    auto g = random_field(*grid, 100 + s);
    auto f = random_field(*grid, 200 + s);
    ops.apply_Gamma(ops.build_gamma_coeffs(g), f, out1);
    const double mass = dot_v(grid->sqrt_mu(), out1) * grid->cell_volume();
    const double scale =
        std::sqrt(dot_v(g, g)) * std::sqrt(dot_v(f, f)) * grid->cell_volume();
    CHECK(std::abs(mass) <= 1e-8 * std::max(scale, 1e-300));
  }
}

TEST_CASE("rearranged splitting matches -L + Gamma") {
  auto grid = std::make_shared<VelocityGrid>(4.0, 10);
  auto table = std::make_shared<KernelTable>(-3.0, grid);
  CollisionOperators ops(table);
  const std::size_t nv = grid->size();
  std::vector<double> g(nv);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t k = 0; k < nv; ++k)
    g[k] = 1e-2 * u(rng) * grid->sqrt_mu()[k];
  const auto re = ops.build_rearranged(g);
  auto f = random_field(*grid, 32);
  std::vector<double> ab(nv), kb(nv), lf(nv), gm(nv);
  ops.apply_Abar(re, f, ab);
  ops.apply_Kbar(f, kb);
  ops.apply_L(f, lf);
  ops.apply_Gamma(re.gc, f, gm);
  double worst = 0, scale = 0;
  for (std::size_t k = 0; k < nv; ++k) {
    worst = std::max(worst, std::abs(ab[k] + kb[k] - (-lf[k] + gm[k])));
    scale = std::max(scale, std::abs(lf[k]));
  }
  CHECK(worst < 1e-10 * std::max(scale, 1.0));
}

TEST_CASE("sigma inner product is an inner product") {
  auto grid = std::make_shared<VelocityGrid>(3.0, 8);
  auto table = std::make_shared<KernelTable>(-3.0, grid);
  CollisionOperators ops(table);
  auto f = random_field(*grid, 41), h = random_field(*grid, 42);
  CHECK(sigma_inner(ops, f, h) == doctest::Approx(sigma_inner(ops, h, f)));
  CHECK(sigma_inner(ops, f, f) > 0);
  // theta weighting reduces the norm (brackets >= 1 with negative exponent)
  CHECK(sigma_inner(ops, f, f, -1.0) < sigma_inner(ops, f, f, 0.0));
}
