// Command-line front end: scenario runs, invariant check suites, and
// plot-ready CSV slices.  Exit codes: 0 success, 2 config error,
// 3 numerical failure, 4 check-suite failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "vpl/config.hpp"
#include "vpl/diagnostics.hpp"
#include "vpl/field.hpp"
#include "vpl/geometry.hpp"
#include "vpl/grid.hpp"
#include "vpl/landau.hpp"
#include "vpl/operators.hpp"
#include "vpl/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr const char* kSlabScenario = R"(# bundled scenario: slab-eps1e-3
[scenario]
name = slab-eps1e-3

[grid]
v_max = 4.5
n_axis = 16

[mesh]
kind = slab
length = 1.0
n_cells = 32

[field]
bc = dirichlet

[solver]
mode = frozen
t_end = 5.0
dt = 0
safety = 0.9
recon = upwind
picard_max = 5
picard_tol = 1e-10
diag_every = 10

[init]
recipe = gaussian-bump
eps0 = 1e-3
theta0 = 0
seed = 1

[output]
dir = out
thetas = 0
)";

vpl::SolverConfig solver_config(const vpl::Config& cfg) {
  vpl::SolverConfig sc;
  const std::string mode = cfg.get_string("solver", "mode", "frozen");
  if (mode == "frozen")
    sc.mode = vpl::RunMode::Frozen;
  else if (mode == "full")
    sc.mode = vpl::RunMode::Full;
  else
    throw vpl::ConfigError("key 'solver.mode': expected frozen|full, got '" +
                           mode + "'");
  const std::string bc = cfg.get_string("field", "bc", "dirichlet");
  if (bc == "dirichlet")
    sc.bc = vpl::PoissonBC::Dirichlet;
  else if (bc == "neumann")
    sc.bc = vpl::PoissonBC::Neumann;
  else
    throw vpl::ConfigError(
        "key 'field.bc': expected dirichlet|neumann, got '" + bc + "'");
  const std::string recon = cfg.get_string("solver", "recon", "upwind");
  if (recon == "upwind")
    sc.recon = vpl::Reconstruction::Upwind;
  else if (recon == "muscl")
    sc.recon = vpl::Reconstruction::Muscl;
  else
    throw vpl::ConfigError(
        "key 'solver.recon': expected upwind|muscl, got '" + recon + "'");
  sc.dt = cfg.get_double("solver", "dt", 0.0);
  sc.safety = cfg.get_double("solver", "safety", 0.9);
  sc.t_end = cfg.get_double("solver", "t_end", 5.0);
  sc.picard_max = static_cast<int>(cfg.get_long("solver", "picard_max", 5));
  sc.picard_tol = cfg.get_double("solver", "picard_tol", 1e-10);
  sc.diag_every = static_cast<int>(cfg.get_long("solver", "diag_every", 10));
  sc.theta = cfg.get_list("output", "thetas", {0.0});
  return sc;
}

int cmd_run(const std::string& config_path, const std::string& scenario,
            const std::string& out_override) {
  vpl::Config cfg;
  if (!scenario.empty()) {
    if (scenario != "slab-eps1e-3")
      throw vpl::ConfigError("unknown bundled scenario '" + scenario +
                             "' (available: slab-eps1e-3)");
    cfg = vpl::Config::parse(kSlabScenario, "<scenario:slab-eps1e-3>");
  } else {
    cfg = vpl::Config::parse_file(config_path);
  }
  cfg.apply_env_overrides();
  if (!out_override.empty()) cfg.set("output", "dir", out_override);

  const std::string kind = cfg.get_string("mesh", "kind", "slab");
  if (kind != "slab")
    throw vpl::ConfigError("key 'mesh.kind': the time stepper supports slab");
  auto grid = std::make_shared<vpl::VelocityGrid>(
      cfg.get_double("grid", "v_max", 4.5),
      static_cast<int>(cfg.get_long("grid", "n_axis", 16)));
  auto mesh = std::make_shared<vpl::SpatialMesh>(vpl::SpatialMesh::slab(
      cfg.get_double("mesh", "length", 1.0),
      static_cast<int>(cfg.get_long("mesh", "n_cells", 32))));
  const double gamma = cfg.get_double("kernel", "gamma", -3.0);
  const double tau = cfg.get_double("kernel", "tau", 0.5);
  std::shared_ptr<vpl::KernelTable> table;
  const std::string cache = cfg.get_string("kernel", "cache", "");
  if (!cache.empty() && fs::exists(cache)) {
    table = vpl::KernelTable::load_cache(cache, gamma, grid, tau);
  } else {
    table = std::make_shared<vpl::KernelTable>(gamma, grid, tau);
    if (!cache.empty()) table->write_cache(cache);
  }

  vpl::Solver solver(table, mesh, solver_config(cfg));
  solver.set_state(vpl::initial_condition(
      grid, mesh, cfg.get_string("init", "recipe", "gaussian-bump"),
      cfg.get_double("init", "eps0", 1e-3), cfg.get_double("init", "theta0", 0.0),
      static_cast<unsigned long>(cfg.get_long("init", "seed", 1))));

  const fs::path out_dir = cfg.get_string("output", "dir", "out");
  fs::create_directories(out_dir);
  {
    std::ofstream echo(out_dir / "config.echo.ini");
    echo << cfg.canonical();
  }

  std::ofstream csv(out_dir / "timeseries.csv");
  csv << vpl::csv_header(solver.config().theta) << "\n";
  std::vector<vpl::DiagnosticsRecord> records;
  try {
    records = solver.run([&](const vpl::DiagnosticsRecord& r) {
      csv << vpl::csv_row(r) << "\n";
    });
  } catch (const vpl::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  csv.close();
  vpl::write_checkpoint((out_dir / "state.ckpt").string(), solver.state());

  // summary
  std::vector<double> ts, ws, ma2, mi2, fe2;
  for (const auto& r : records) {
    ts.push_back(r.t);
    ws.push_back(r.w_theta.empty() ? 0.0 : r.w_theta[0]);
    ma2.push_back(r.macro_norm * r.macro_norm);
    mi2.push_back(r.micro_norm * r.micro_norm);
    fe2.push_back(r.field_energy);
  }
  const vpl::DecayFit fit = vpl::decay_fit(ts, ws);
  const auto& a = records.front();
  const auto& b = records.back();
  double mass_drift = 0, energy_drift = 0, flux_change = 0;
  const double e0 = a.kinetic_energy_pert + a.field_energy;
  bool entropy_ok = true;
  for (const auto& r : records) {
    mass_drift = std::max(mass_drift, std::abs(r.mass - a.mass));
    energy_drift = std::max(
        energy_drift, std::abs(r.kinetic_energy_pert + r.field_energy - e0));
    flux_change = std::max(flux_change, std::abs(r.flux - a.flux));
    entropy_ok = entropy_ok && r.entropy_ok;
  }
  const double mass_scale = std::max(std::abs(a.mass), 1e-300);
  const double energy_scale = std::max(std::abs(e0), 1e-300);
  double max_ratio = 0;
  bool ratio_defined = true;
  for (const auto& wr : vpl::macro_micro_report(ts, ma2, mi2, fe2)) {
    if (wr.defined)
      max_ratio = std::max(max_ratio, wr.ratio);
    else
      ratio_defined = false;
  }
  // hash the physics configuration only: the output location must not
  // perturb otherwise identical runs
  vpl::Config hashed = cfg;
  hashed.set("output", "dir", "");
  json summary;
  summary["tool_version"] = kVersion;
  summary["config_hash"] = hashed.hash();
  summary["scenario"] = cfg.get_string("scenario", "name", "custom");
  summary["records"] = records.size();
  summary["t_end"] = b.t;
  summary["fitted"] = {{"k_hat", fit.k_hat},
                       {"eps0_hat", fit.eps0_hat},
                       {"residual", fit.residual},
                       {"decaying", fit.decaying}};
  summary["conservation"] = {{"mass_drift_rel", mass_drift / mass_scale},
                             {"energy_drift_rel", energy_drift / energy_scale},
                             {"flux_change_max", flux_change},
                             {"entropy_ok", entropy_ok}};
  summary["macro_micro"] = {{"max_window_ratio", max_ratio},
                            {"all_windows_defined", ratio_defined}};
  summary["flags"] = {{"decay_positive", fit.k_hat > 0},
                      {"mass_ok", mass_drift / mass_scale <= 1e-8},
                      {"energy_ok", energy_drift / energy_scale <= 1e-4}};
  std::ofstream(out_dir / "summary.json") << summary.dump(2) << "\n";
  std::cout << "run complete: " << records.size() << " records, t = " << b.t
            << ", k_hat = " << fit.k_hat << "\n";
  return 0;
}

struct CheckReport {
  int failed = 0;
  void item(const std::string& name, bool ok, double value, double tol) {
    std::printf("  [%s] %-52s value %.3e  tol %.1e\n", ok ? "pass" : "FAIL",
                name.c_str(), value, tol);
    if (!ok) ++failed;
  }
};

void check_kernel(CheckReport& rep) {
  std::puts("kernel:");
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double worst_null = 0, worst_eig = 0;
  for (int i = 0; i < 200; ++i) {
    vpl::Vec3 w{u(rng), u(rng), u(rng)};
    const double r = std::sqrt(vpl::norm2(w));
    if (r < 1e-3) continue;
    const Eigen::Matrix3d phi = vpl::phi_kernel(w, -3.0);
    Eigen::Vector3d wv(w[0], w[1], w[2]);
    worst_null = std::max(worst_null, (phi * wv).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(phi);
    const auto ev = es.eigenvalues();
    worst_eig = std::max(
        {worst_eig, std::abs(ev(0)), std::abs(ev(1) - 1.0 / r),
         std::abs(ev(2) - 1.0 / r)});
  }
  rep.item("Phi(w) w = 0", worst_null <= 1e-13, worst_null, 1e-13);
  rep.item("Phi eigenvalues {0, 1/|w|, 1/|w|}", worst_eig <= 1e-12, worst_eig,
           1e-12);
  vpl::VelocityGrid grid(6.0, 32);
  const double target = 4.0 * M_PI / 3.0;
  const Eigen::Matrix3d s0 =
      vpl::sigma_direct_at(grid, -3.0, vpl::Vec3{0, 0, 0}, vpl::maxwellian);
  const double err =
      (s0 - target * Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() /
      target;
  rep.item("sigma(0) = (4 pi / 3) I, n=32", err <= 1e-3, err, 1e-3);
}

void check_operators(CheckReport& rep) {
  std::puts("operators:");
  auto grid = std::make_shared<vpl::VelocityGrid>(4.0, 12);
  auto table = std::make_shared<vpl::KernelTable>(-3.0, grid);
  vpl::CollisionOperators ops(table);
  vpl::MacroBasis basis(grid);
  const std::size_t nv = grid->size();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> f(nv), g(nv), Lf(nv), Lg(nv);
  double worst_sym = 0, worst_psd = 0, worst_null = 0;
  for (int it = 0; it < 5; ++it) {
    for (auto& x : f) x = u(rng);
    for (auto& x : g) x = u(rng);
    ops.apply_L(f, Lf);
    ops.apply_L(g, Lg);
    double fg = 0, gf = 0, ff = 0, nf = 0;
    for (std::size_t k = 0; k < nv; ++k) {
      fg += Lf[k] * g[k];
      gf += Lg[k] * f[k];
      ff += Lf[k] * f[k];
      nf += f[k] * f[k];
    }
    worst_sym = std::max(worst_sym, std::abs(fg - gf) / std::max(nf, 1e-300));
    worst_psd = std::min(worst_psd, ff / std::max(nf, 1e-300));
  }
  double null0 = 0;
  ops.apply_L(basis.e(0), Lf);
  for (double x : Lf) null0 = std::max(null0, std::abs(x));
  for (int i = 1; i < 5; ++i) {
    ops.apply_L(basis.e(i), Lf);
    double n2 = 0;
    for (double x : Lf) n2 += x * x;
    worst_null = std::max(worst_null, std::sqrt(n2));
  }
  rep.item("<Lf,g> = <f,Lg>", worst_sym <= 1e-10, worst_sym, 1e-10);
  rep.item("<Lf,f> >= 0", worst_psd >= -1e-8, worst_psd, 1e-8);
  rep.item("L e_0 = 0 exactly", null0 <= 1e-12, null0, 1e-12);
  rep.item("||L e_i|| bounded on invariants (refinement is covered "
           "by the acceptance gate)", worst_null <= 5.0, worst_null, 5.0);
}

void check_geometry(CheckReport& rep) {
  std::puts("geometry:");
  auto para = vpl::make_surface("paraboloid", {0.3, -0.2});
  vpl::FlattenChart chart(
      std::shared_ptr<const vpl::GraphSurface>(std::move(para)));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  double worst_comm = 0, worst_id = 0, worst_C = 0;
  for (int i = 0; i < 1000; ++i) {
    vpl::Vec3 y{u(rng), u(rng), 0.2 * u(rng)};
    vpl::Vec3 w{3 * u(rng), 3 * u(rng), 3 * u(rng)};
    worst_comm =
        std::max(worst_comm, vpl::specular_commute_residual(chart, y[0], y[1], w));
    const auto A = chart.jac_A(y);
    const auto Ai = chart.jac_Ainv(y);
    worst_id = std::max(
        worst_id,
        ((A * Ai) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
    worst_C = std::max(worst_C, (chart.mat_C(y) - (Ai.transpose() * Ai).eval())
                                    .cwiseAbs()
                                    .maxCoeff());
  }
  rep.item("specular commutation at y3=0", worst_comm <= 1e-12, worst_comm,
           1e-12);
  rep.item("A Ainv = I", worst_id <= 1e-12, worst_id, 1e-12);
  rep.item("C = Ainv^T Ainv", worst_C <= 1e-12, worst_C, 1e-12);
}

void check_field(CheckReport& rep) {
  std::puts("field:");
  auto order = [&](vpl::PoissonBC bc) {
    double prev = 0, rate = 0;
    for (int n : {32, 64}) {
      auto mesh = vpl::SpatialMesh::slab(1.0, n);
      std::vector<double> rho(mesh.n_cells()), exact(mesh.n_cells());
      for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
        const double x = mesh.center(c);
        if (bc == vpl::PoissonBC::Dirichlet) {
          rho[c] = M_PI * M_PI * std::sin(M_PI * x);
          exact[c] = std::sin(M_PI * x);
        } else {
          rho[c] = M_PI * M_PI * std::cos(M_PI * x);
          exact[c] = std::cos(M_PI * x);
        }
      }
      const auto sol = vpl::solve_poisson(mesh, rho, bc);
      double mean = 0;
      if (bc == vpl::PoissonBC::Neumann) {
        for (std::size_t c = 0; c < mesh.n_cells(); ++c)
          mean += exact[c] * mesh.cell_volume(c);
        mean /= mesh.total_volume();
      }
      double err = 0;
      for (std::size_t c = 0; c < mesh.n_cells(); ++c)
        err = std::max(err, std::abs(sol.phi[c] - (exact[c] - mean)));
      if (prev > 0) rate = std::log2(prev / err);
      prev = err;
    }
    return rate;
  };
  const double rd = order(vpl::PoissonBC::Dirichlet);
  const double rn = order(vpl::PoissonBC::Neumann);
  rep.item("Dirichlet order ~ 2", std::abs(rd - 2.0) <= 0.1, rd, 0.1);
  rep.item("Neumann order ~ 2", std::abs(rn - 2.0) <= 0.1, rn, 0.1);
}

void check_norms(CheckReport& rep) {
  std::puts("norms:");
  using vpl::KineticPoint;
  KineticPoint z{1.0, {0.5, 0, 0}, {0.3, 0, 0}};
  const double d0 = vpl::quasi_distance(z, z);
  rep.item("d(z,z) = 0", d0 == 0.0, d0, 0.0);
  KineticPoint w1{z.t - 1.0, z.x, {0, 0, 0}};
  KineticPoint z1{z.t, z.x, {0, 0, 0}};
  const double d1 = vpl::quasi_distance(z1, w1);
  rep.item("unit time gap -> 1", std::abs(d1 - 1.0) <= 1e-15, d1, 1e-15);
  KineticPoint w2{z.t, {z.x[0] + 0.008, z.x[1], z.x[2]}, z.v};
  const double d2 = vpl::quasi_distance(z, w2);
  rep.item("0.008 x-gap -> 0.2", std::abs(d2 - 0.2) <= 1e-12, d2, 1e-12);
  std::vector<double> ts, wsr;
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.05 * i;
    ts.push_back(t);
    wsr.push_back(std::pow(1.0 + t / 3.0, -6.0));
  }
  const auto fit = vpl::decay_fit(ts, wsr);
  const double kerr = std::abs(fit.k_hat - 3.0) / 3.0;
  rep.item("synthetic decay fit k=3 within 5%", kerr <= 0.05, fit.k_hat, 0.05);
}

int cmd_check(const std::vector<std::string>& suites) {
  CheckReport rep;
  for (const auto& s : suites) {
    if (s == "kernel")
      check_kernel(rep);
    else if (s == "operators")
      check_operators(rep);
    else if (s == "geometry")
      check_geometry(rep);
    else if (s == "field")
      check_field(rep);
    else if (s == "norms")
      check_norms(rep);
    else
      throw vpl::ConfigError(
          "unknown check suite '" + s +
          "' (available: kernel operators geometry field norms)");
  }
  if (rep.failed > 0) {
    std::printf("%d check(s) failed\n", rep.failed);
    return 4;
  }
  std::puts("all checks passed");
  return 0;
}

int cmd_plotdata(const std::string& run_dir, const std::string& quantity,
                 bool log_scale, const std::string& out_path) {
  std::ifstream is(fs::path(run_dir) / "timeseries.csv");
  if (!is)
    throw vpl::ConfigError("no timeseries.csv in '" + run_dir + "'");
  std::string header;
  std::getline(is, header);
  std::vector<std::string> cols;
  {
    std::stringstream ss(header);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  std::size_t idx = cols.size();
  for (std::size_t i = 0; i < cols.size(); ++i)
    if (cols[i] == quantity) idx = i;
  if (idx == cols.size()) {
    // unique prefix match as a convenience (e.g. "w_theta")
    std::size_t hits = 0;
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (cols[i].rfind(quantity, 0) == 0) {
        idx = i;
        ++hits;
      }
    if (hits != 1) {
      std::string schema;
      for (const auto& c : cols) schema += " " + c;
      throw vpl::ConfigError("unknown quantity '" + quantity +
                             "'; available columns:" + schema);
    }
  }
  std::ostream* os = &std::cout;
  std::ofstream of;
  if (!out_path.empty()) {
    of.open(out_path);
    os = &of;
  }
  *os << "t," << (log_scale ? "log10_" : "") << cols[idx] << "\n";
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> row;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    if (row.size() <= idx) continue;
    if (log_scale) {
      const double v = std::stod(row[idx]);
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g",
                    v > 0 ? std::log10(v) : -std::numeric_limits<double>::infinity());
      *os << row[0] << "," << buf << "\n";
    } else {
      *os << row[0] << "," << row[idx] << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"near-Maxwellian kinetic simulator and verification suite"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a scenario");
  std::string config_path, scenario, out_override;
  run->add_option("--config", config_path, "config file path");
  run->add_option("--scenario", scenario, "bundled scenario name");
  run->add_option("--output", out_override, "output directory override");

  auto* check = app.add_subcommand("check", "run an invariant check suite");
  std::vector<std::string> suites;
  check->add_option("suite", suites,
                    "kernel|operators|geometry|field|norms")
      ->required();

  auto* plot = app.add_subcommand("plotdata", "extract plot-ready columns");
  std::string run_dir, quantity, plot_out;
  bool log_scale = false;
  plot->add_option("--run", run_dir, "run output directory")->required();
  plot->add_option("--quantity", quantity, "column name")->required();
  plot->add_flag("--log", log_scale, "log10-transform the quantity");
  plot->add_option("--out", plot_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (config_path.empty() && scenario.empty())
        throw vpl::ConfigError("run: need --config or --scenario");
      return cmd_run(config_path, scenario, out_override);
    }
    if (check->parsed()) return cmd_check(suites);
    if (plot->parsed()) return cmd_plotdata(run_dir, quantity, log_scale, plot_out);
  } catch (const vpl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const vpl::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
