#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "vpl/diagnostics.hpp"
#include "vpl/landau.hpp"

using namespace vpl;

namespace {

struct Fixture {
  std::shared_ptr<VelocityGrid> grid;
  std::shared_ptr<SpatialMesh> mesh;

  explicit Fixture(int n_axis = 12, double v_max = 6.0, int n_cells = 4)
      : grid(std::make_shared<VelocityGrid>(v_max, n_axis)),
        mesh(std::make_shared<SpatialMesh>(SpatialMesh::slab(1.0, n_cells))) {}

  DistributionField zero() const { return DistributionField(grid, mesh); }
};

}  // namespace

TEST_CASE("entropy of the reference state is -(3/2) pi^{3/2} |Omega|") {
  Fixture fx(24, 6.0, 3);
  auto f = fx.zero();
  auto ent = entropy(f);
  const double want = -1.5 * std::pow(M_PI, 1.5) * fx.mesh->total_volume();
  CHECK(ent.value == doctest::Approx(want).epsilon(1e-6));
  CHECK(ent.positive);
  CHECK(ent.min_F > 0.0);
}

TEST_CASE("entropy flags a perturbation that drives F negative") {
  Fixture fx(8, 4.0, 2);
  auto f = fx.zero();
  f.cell(0)[0] = -10.0;  // F = mu + sqrt(mu) f < 0 at that node
  auto ent = entropy(f);
  CHECK_FALSE(ent.positive);
  CHECK(ent.min_F < 0.0);
}

TEST_CASE("quasi-distance worked examples") {
  KineticPoint z{2.0, {0.5, 0, 0}, {1.0, -0.5, 0.25}};
  CHECK(quasi_distance(z, z) == 0.0);

  KineticPoint a{1.0, {0, 0, 0}, {0, 0, 0}};
  KineticPoint b{2.0, {0, 0, 0}, {0, 0, 0}};
  CHECK(quasi_distance(a, b) == doctest::Approx(1.0).epsilon(1e-14));

  // same t and v, x offset 0.008 -> 0.008^{1/3} = 0.2
  KineticPoint c{1.0, {0.108, 0, 0}, {0.3, 0, 0}};
  KineticPoint d{1.0, {0.1, 0, 0}, {0.3, 0, 0}};
  CHECK(quasi_distance(c, d) == doctest::Approx(0.2).epsilon(1e-13));

  // free streaming: x gap exactly (t - tau) nu -> only the time term counts
  KineticPoint e{1.04, {0.04, 0, 0}, {1.0, 0, 0}};
  KineticPoint g{1.0, {0.0, 0, 0}, {1.0, 0, 0}};
  CHECK(quasi_distance(e, g) == doctest::Approx(0.2).epsilon(1e-13));
}

TEST_CASE("Holder seminorm of a linear-in-v profile at alpha = 1 is one") {
  Fixture fx(10, 4.0, 2);
  auto f = fx.zero();
  for (std::size_t c = 0; c < fx.mesh->n_cells(); ++c) {
    auto fc = f.cell(c);
    for (std::size_t k = 0; k < fx.grid->size(); ++k)
      fc[k] = fx.grid->node(k)[2];
  }
  CHECK(holder_seminorm(f, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("S^p norm: zero, homogeneity, and a static profile") {
  Fixture fx(8, 4.0, 4);
  std::vector<DistributionField> traj(4, fx.zero());
  for (std::size_t l = 0; l < traj.size(); ++l) traj[l].time = 0.01 * l;
  CHECK(sp_norm(traj, 0.01, 2.0) == 0.0);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> nrm(0.0, 1.0);
  for (auto& fr : traj)
    for (auto& v : fr.raw()) v = nrm(rng);
  double base = sp_norm(traj, 0.01, 2.0);
  CHECK(base > 0.0);
  auto scaled = traj;
  for (auto& fr : scaled)
    for (auto& v : fr.raw()) v *= 10.0;
  CHECK(sp_norm(scaled, 0.01, 2.0) == doctest::Approx(10.0 * base).epsilon(1e-12));
  auto scaled2 = traj;
  for (auto& fr : scaled2)
    for (auto& v : fr.raw()) v *= 2.0;
  CHECK(sp_norm(scaled2, 0.01, 2.0) == doctest::Approx(2.0 * base).epsilon(1e-12));
}

TEST_CASE("oscillation vanishes for constants and is finite for v1") {
  auto constant = [](double, const Vec3&, const Vec3&) { return 3.7; };
  KineticPoint z0{1.0, {0, 0, 0}, {0.5, 0, 0}};
  CHECK(oscillation(constant, z0, 0.5) == 0.0);

  auto linear = [](double, const Vec3&, const Vec3& v) { return v[0]; };
  double o1 = oscillation(linear, z0, 0.5);
  CHECK(o1 > 0.0);
  CHECK(std::isfinite(o1));
}

TEST_CASE("decay fit recovers the exponent of a synthetic series") {
  const double k = 3.0, eps0 = 1e-3;
  std::vector<double> t, w;
  for (int i = 0; i <= 400; ++i) {
    double tt = 0.02 * i * 5.0;
    t.push_back(tt);
    w.push_back(eps0 * eps0 * std::pow(1.0 + tt / k, -2.0 * k));
  }
  auto fit = decay_fit(t, w);
  CHECK(fit.decaying);
  CHECK(std::abs(fit.k_hat - k) / k < 0.05);
  CHECK(std::abs(fit.eps0_hat - eps0) / eps0 < 0.05);
  CHECK(fit.residual < 1e-8);

  std::vector<double> flat(t.size(), 2.5e-7);
  auto fit2 = decay_fit(t, flat);
  CHECK_FALSE(fit2.decaying);
}

TEST_CASE("macro-micro report windows and validation") {
  std::vector<double> t, macro2, micro2, field2;
  for (int i = 0; i <= 300; ++i) {
    double tt = 0.01 * i;
    t.push_back(tt);
    macro2.push_back(2.0 * std::exp(-tt));
    micro2.push_back(1.0 * std::exp(-tt));
    field2.push_back(0.5 * std::exp(-tt));
  }
  auto rep = macro_micro_report(t, macro2, micro2, field2, 1.0);
  REQUIRE(rep.size() == 3);
  for (const auto& wr : rep) {
    CHECK(wr.defined);
    CHECK(wr.ratio == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(wr.t_end == doctest::Approx(wr.t_begin + 1.0));
  }

  std::vector<double> short_micro(10, 0.0);
  CHECK_THROWS_AS(macro_micro_report(t, macro2, short_micro, field2),
                  std::invalid_argument);
}

TEST_CASE("instant and dissipation energies are consistent") {
  Fixture fx(10, 4.0, 2);
  auto grid = fx.grid;
  auto table = std::make_shared<KernelTable>(-3.0, grid);
  CollisionOperators ops(table);
  auto f = fx.zero();
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nrm(0.0, 1.0);
  for (auto& v : f.raw()) v = 1e-3 * nrm(rng);
  const double fe = 0.123;
  auto ep = energy_functionals(ops, f, fe, 0.0);
  CHECK(ep.instant == doctest::Approx(w_theta_functional(f, 0.0) + fe));
  CHECK(ep.dissipation > fe);  // sigma norm of a nonzero field is positive

  // Lyapunov energy: weighted L2 ladder plus the field energy.
  CHECK(lyapunov_functional(f, 0.0, fe) ==
        doctest::Approx(w_theta_functional(f, 0.0) + fe));
  CHECK(lyapunov_functional(f, 1.0, fe) ==
        doctest::Approx(w_theta_functional(f, 0.0) + w_theta_functional(f, 0.5) +
                        w_theta_functional(f, 1.0) + fe));
}

TEST_CASE("interpolation constant for first derivatives is grid stable") {
  // || D_v f ||_2 <= C || D^2 f ||_2^{1/2} || f ||_2^{1/2}: the sampled
  // constant over smooth random fields should not drift under refinement.
  auto sampled_c = [](int n) {
    auto grid = std::make_shared<VelocityGrid>(4.0, n);
    auto mesh = std::make_shared<SpatialMesh>(SpatialMesh::slab(1.0, 1));
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    double worst = 0.0;
    for (int trial = 0; trial < 6; ++trial) {
      DistributionField f(grid, mesh);
      // random sum of Gaussians: smooth, decaying
      std::vector<Vec3> ctr(4);
      std::vector<double> amp(4);
      for (int m = 0; m < 4; ++m) {
        ctr[m] = {u(rng), u(rng), u(rng)};
        amp[m] = u(rng);
      }
      auto fc = f.cell(0);
      for (std::size_t k = 0; k < grid->size(); ++k) {
        Vec3 v = grid->node(k);
        double s = 0.0;
        for (int m = 0; m < 4; ++m) {
          double r2 = 0.0;
          for (int d = 0; d < 3; ++d)
            r2 += (v[d] - ctr[m][d]) * (v[d] - ctr[m][d]);
          s += amp[m] * std::exp(-r2);
        }
        fc[k] = s;
      }
      std::vector<double> d1(grid->size()), d2(grid->size());
      double n0 = 0.0, n1 = 0.0, n2 = 0.0;
      for (std::size_t k = 0; k < grid->size(); ++k)
        n0 += fc[k] * fc[k];
      for (int ax = 0; ax < 3; ++ax) {
        apply_D(*grid, fc, ax, d1);
        for (double x : d1) n1 += x * x;
        for (int bx = 0; bx < 3; ++bx) {
          apply_D(*grid, d1, bx, d2);
          for (double x : d2) n2 += x * x;
        }
      }
      const double h3 = grid->cell_volume();
      n0 *= h3;
      n1 *= h3;
      n2 *= h3;
      if (n0 > 0 && n2 > 0)
        worst = std::max(worst, std::sqrt(n1) /
                                    (std::pow(n2, 0.25) * std::pow(n0, 0.25)));
    }
    return worst;
  };
  double c8 = sampled_c(8);
  double c16 = sampled_c(16);
  CHECK(std::isfinite(c8));
  CHECK(std::isfinite(c16));
  CHECK(std::abs(c16 - c8) / c8 < 0.2);
}

TEST_CASE("csv header and row have matching column counts") {
  std::vector<double> theta{0.0, 1.0};
  auto header = csv_header(theta);
  DiagnosticsRecord r;
  r.theta = theta;
  r.w_theta = {1, 2};
  r.i_theta = {1, 2};
  r.d_theta = {1, 2};
  r.e_theta = {1, 2};
  r.sup_theta = {1, 2};
  auto row = csv_row(r);
  auto count = [](const std::string& s) {
    std::size_t n = 1;
    for (char ch : s)
      if (ch == ',') ++n;
    return n;
  };
  CHECK(count(header) == count(row));
}
