// Hot-path microbenchmarks: kernel convolution, the linearized collision
// operator, the Poisson solve, and one full time step.

#include <memory>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "vpl/field.hpp"
#include "vpl/grid.hpp"
#include "vpl/landau.hpp"
#include "vpl/operators.hpp"
#include "vpl/solver.hpp"

using namespace vpl;

namespace {

std::vector<double> random_field(std::size_t n, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nrm(0.0, 1.0);
  std::vector<double> f(n);
  for (auto& x : f) x = 1e-3 * nrm(rng);
  return f;
}

void BM_conv_tensor(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto grid = std::make_shared<VelocityGrid>(4.5, n);
  KernelTable table(-3.0, grid);
  auto u = random_field(grid->size(), 1);
  TensorField out;
  for (auto& c : out) c.assign(grid->size(), 0.0);
  for (auto _ : state) {
    table.conv_tensor(u, out);
    benchmark::DoNotOptimize(out[0].data());
  }
}
BENCHMARK(BM_conv_tensor)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_apply_L(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto grid = std::make_shared<VelocityGrid>(4.5, n);
  auto table = std::make_shared<KernelTable>(-3.0, grid);
  CollisionOperators ops(table);
  auto f = random_field(grid->size(), 2);
  std::vector<double> out(grid->size());
  for (auto _ : state) {
    ops.apply_L(f, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_apply_L)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_poisson(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto mesh = SpatialMesh::slab(1.0, n);
  std::vector<double> rho(mesh.n_cells());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c)
    rho[c] = std::sin(6.28 * mesh.center(c));
  for (auto _ : state) {
    auto sol = solve_poisson(mesh, rho, PoissonBC::Dirichlet);
    benchmark::DoNotOptimize(sol.phi.data());
  }
}
BENCHMARK(BM_poisson)->Arg(32)->Arg(256);

void BM_solver_step(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto grid = std::make_shared<VelocityGrid>(4.5, n);
  auto mesh = std::make_shared<SpatialMesh>(SpatialMesh::slab(1.0, 32));
  auto table = std::make_shared<KernelTable>(-3.0, grid);
  SolverConfig cfg;
  Solver s(table, mesh, cfg);
  s.set_state(initial_condition(grid, mesh, "gaussian-bump", 1e-3, 0.0));
  const double dt = s.stable_dt();
  for (auto _ : state) s.step(dt);
}
BENCHMARK(BM_solver_step)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
