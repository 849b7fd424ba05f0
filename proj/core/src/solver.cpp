#include "vpl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>

namespace vpl {

namespace {

double l2_raw(const std::vector<double>& a) {
  double s = 0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

double minmod(double a, double b) {
  if (a * b <= 0) return 0;
  return std::abs(a) < std::abs(b) ? a : b;
}

}  // namespace

DistributionField initial_condition(std::shared_ptr<const VelocityGrid> grid,
                                    std::shared_ptr<const SpatialMesh> mesh,
                                    const std::string& recipe, double eps0,
                                    double theta0, unsigned long seed) {
  DistributionField f(grid, mesh);
  const auto& g = *grid;
  const std::size_t nv = g.size();
  const std::size_t nc = mesh->n_cells();
  auto envelope = [&](std::size_t c) {
    double r;
    if (mesh->kind() == MeshKind::Slab1D) {
      const double L = mesh->length();
      r = (mesh->center(c) - 0.5 * L) / (L / 8.0);
    } else {
      const int ir = static_cast<int>(c) / mesh->n_phi();
      r = mesh->r_center(ir) / (mesh->length() / 2.0);
    }
    return std::exp(-r * r);
  };
  if (recipe == "gaussian-bump") {
    for (std::size_t c = 0; c < nc; ++c) {
      const double a = envelope(c);
      auto fc = f.cell(c);
      for (std::size_t k = 0; k < nv; ++k) fc[k] = a * g.sqrt_mu()[k];
    }
  } else if (recipe == "odd-bump") {
    for (std::size_t c = 0; c < nc; ++c) {
      const double a = envelope(c);
      auto fc = f.cell(c);
      for (std::size_t k = 0; k < nv; ++k)
        fc[k] = a * g.node(k)[0] * g.sqrt_mu()[k];
    }
  } else if (recipe == "random") {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t c = 0; c < nc; ++c) {
      auto fc = f.cell(c);
      for (std::size_t k = 0; k < nv; ++k)
        fc[k] = u(rng) * std::exp(-norm2(g.node(k)) / 4.0);
    }
    // a few smoothing passes in x so the transport stage is resolvable
    for (int pass = 0; pass < 3; ++pass) {
      std::vector<double> prev = f.raw();
      for (std::size_t c = 0; c < nc; ++c) {
        auto fc = f.cell(c);
        const std::size_t cm = (c == 0) ? 0 : c - 1;
        const std::size_t cp = (c + 1 == nc) ? nc - 1 : c + 1;
        for (std::size_t k = 0; k < nv; ++k)
          fc[k] = 0.25 * prev[cm * nv + k] + 0.5 * prev[c * nv + k] +
                  0.25 * prev[cp * nv + k];
      }
    }
  } else {
    throw std::invalid_argument("initial_condition: unknown recipe '" +
                                recipe + "'");
  }
  const double nrm = weighted_lp_norm(
      f, std::numeric_limits<double>::infinity(), theta0);
  if (nrm <= 0) throw std::runtime_error("initial_condition: zero profile");
  const double s = eps0 / nrm;
  for (double& x : f.raw()) x *= s;
  return f;
}

Solver::Solver(std::shared_ptr<const KernelTable> table,
               std::shared_ptr<const SpatialMesh> mesh, SolverConfig cfg)
    : cfg_(std::move(cfg)),
      table_(std::move(table)),
      grid_(table_->grid_ptr()),
      mesh_(std::move(mesh)),
      ops_(std::make_unique<CollisionOperators>(table_)),
      basis_(std::make_unique<MacroBasis>(grid_)),
      f_(grid_, mesh_) {
  if (mesh_->kind() != MeshKind::Slab1D)
    throw std::invalid_argument("Solver: slab meshes only");
}

void Solver::set_state(const DistributionField& f) {
  if (f.grid().size() != grid_->size() || f.mesh().n_cells() != mesh_->n_cells())
    throw std::invalid_argument("set_state: shape mismatch");
  f_ = f;
  initial_l2_ = weighted_lp_norm(f_, 2.0, 0.0);
  e_acc_.assign(cfg_.theta.size(), 0.0);
  d_prev_.assign(cfg_.theta.size(), 0.0);
  have_prev_ = false;
}

double Solver::stable_dt() const {
  const double vmax_node = std::abs(grid_->axis(grid_->n_axis() - 1));
  const double cfl = cfg_.safety * mesh_->dx() / vmax_node;
  const double h = grid_->h();
  const auto er = tensor_eig_range(*grid_, ops_->sigma());
  const double parab = cfg_.safety * h * h / (6.0 * std::max(er.max_eig, 1e-30));
  // Power iteration on the projected collision operator; the zeroth-order
  // vt sigma vt part dominates near the box corners and is not captured by
  // the parabolic bound.
  const std::size_t nv = grid_->size();
  std::vector<double> x(nv), y(nv), tmp(nv);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : x) v = u(rng);
  double lam = 0;
  for (int it = 0; it < 30; ++it) {
    basis_->project(x, tmp);
    for (std::size_t k = 0; k < nv; ++k) tmp[k] = x[k] - tmp[k];
    ops_->apply_L(tmp, y);
    basis_->project(y, tmp);
    for (std::size_t k = 0; k < nv; ++k) y[k] -= tmp[k];
    lam = l2_raw(y) / std::max(l2_raw(x), 1e-300);
    const double inv = 1.0 / std::max(l2_raw(y), 1e-300);
    for (std::size_t k = 0; k < nv; ++k) x[k] = y[k] * inv;
  }
  const double spectral = cfg_.safety * 2.0 / std::max(lam, 1e-30);
  return std::min({cfl, parab, spectral});
}

PoissonSolution Solver::field() const {
  return solve_poisson(*mesh_, charge_density(f_), cfg_.bc);
}

void Solver::step_transport(double dt) {
  const auto& g = *grid_;
  const std::size_t nv = g.size();
  const std::size_t nc = mesh_->n_cells();
  const double lam = dt / mesh_->dx();
  const std::vector<double> old = f_.raw();
  auto val = [&](std::ptrdiff_t c, std::size_t k) -> double {
    // specular ghost cells: reflect position and flip v1
    if (c < 0) return old[static_cast<std::size_t>(-1 - c) * nv + g.flip(k, 0)];
    if (c >= static_cast<std::ptrdiff_t>(nc))
      return old[(2 * nc - 1 - static_cast<std::size_t>(c)) * nv + g.flip(k, 0)];
    return old[static_cast<std::size_t>(c) * nv + k];
  };
  const int n = g.n_axis();
  for (int iv = 0; iv < n; ++iv) {
    const double u = g.axis(iv);
    for (int j = 0; j < n; ++j)
      for (int kk = 0; kk < n; ++kk) {
        const std::size_t k = g.index(iv, j, kk);
        auto face = [&](std::ptrdiff_t c) {  // flux through face c-1/2
          if (cfg_.recon == Reconstruction::Upwind)
            return u > 0 ? u * val(c - 1, k) : u * val(c, k);
          auto slope = [&](std::ptrdiff_t cc) {
            return minmod(val(cc, k) - val(cc - 1, k),
                          val(cc + 1, k) - val(cc, k));
          };
          return u > 0 ? u * (val(c - 1, k) + 0.5 * slope(c - 1))
                       : u * (val(c, k) - 0.5 * slope(c));
        };
        double fl = face(0);
        for (std::size_t c = 0; c < nc; ++c) {
          const double fr = face(static_cast<std::ptrdiff_t>(c) + 1);
          f_.raw()[c * nv + k] = old[c * nv + k] - lam * (fr - fl);
          fl = fr;
        }
      }
  }
}

void Solver::collision_rhs(
    const std::vector<double>& fs,
    const std::vector<CollisionOperators::Rearranged>* coeffs,
    std::vector<double>& rhs) const {
  const auto& g = *grid_;
  const std::size_t nv = g.size();
  const std::size_t nc = mesh_->n_cells();
  const int n = g.n_axis();
  // self-consistent field of the stage state
  DistributionField tmpf(grid_, mesh_);
  tmpf.raw() = fs;
  const PoissonSolution ps = solve_poisson(*mesh_, charge_density(tmpf), cfg_.bc);
  std::vector<double> fm(nv), y(nv), py(nv), d1(nv), gam(nv);
  rhs.assign(fs.size(), 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    std::span<const double> fc(fs.data() + c * nv, nv);
    // micro part, collision term, output projection
    basis_->project(fc, fm);
    for (std::size_t k = 0; k < nv; ++k) fm[k] = fc[k] - fm[k];
    ops_->apply_L(fm, y);
    for (std::size_t k = 0; k < nv; ++k) y[k] = -y[k];
    if (coeffs) {
      ops_->apply_Gamma((*coeffs)[c].gc, fc, gam);
      for (std::size_t k = 0; k < nv; ++k) y[k] += gam[k];
    }
    basis_->project(y, py);
    double* out = rhs.data() + c * nv;
    for (std::size_t k = 0; k < nv; ++k) out[k] = y[k] - py[k];
    // Field terms with the self-consistent stage field (frozen mode freezes
    // only the collision coefficients):
    //   -E d_v1 f + E vt1 f + 2 sqrt(mu) vt1 E.
    // The first pair is exactly mass-free on the lattice, the source is
    // exactly mass- and kinetic-energy-free, so the discrete energy identity
    // kinetic + field = const holds up to the splitting error.
    const double ef = ps.E[c];
    apply_D(g, fc, 0, d1);
    for (int i = 0; i < n; ++i) {
      const double vt1 = ops_->vt(i);
      for (int j = 0; j < n; ++j)
        for (int kk = 0; kk < n; ++kk) {
          const std::size_t k = g.index(i, j, kk);
          out[k] += ef * (vt1 * fc[k] - d1[k]) +
                    2.0 * g.sqrt_mu()[k] * vt1 * ef;
        }
    }
  }
}

void Solver::rk2(double dt,
                 const std::vector<CollisionOperators::Rearranged>* coeffs,
                 std::vector<double>& fnew) const {
  std::vector<double> k1, k2, mid(f_.raw().size());
  collision_rhs(f_.raw(), coeffs, k1);
  for (std::size_t i = 0; i < mid.size(); ++i)
    mid[i] = f_.raw()[i] + 0.5 * dt * k1[i];
  collision_rhs(mid, coeffs, k2);
  fnew.resize(mid.size());
  for (std::size_t i = 0; i < mid.size(); ++i)
    fnew[i] = f_.raw()[i] + dt * k2[i];
}

void Solver::step_collision(double dt, int depth) {
  const std::size_t nv = grid_->size();
  const std::size_t nc = mesh_->n_cells();
  std::vector<double> fnew;
  if (cfg_.mode == RunMode::Frozen) {
    rk2(dt, nullptr, fnew);
    f_.raw() = fnew;
    stats_.picard_iters = 1;
    return;
  }
  // Picard iteration on the coefficient state g.
  std::vector<double> gprev = f_.raw();
  std::vector<double> result;
  bool converged = false;
  int iters = 0;
  const double ref = std::max(l2_raw(f_.raw()), 1e-300);
  for (int m = 0; m < cfg_.picard_max; ++m) {
    ++iters;
    std::vector<CollisionOperators::Rearranged> coeffs;
    coeffs.reserve(nc);
    for (std::size_t c = 0; c < nc; ++c)
      coeffs.push_back(ops_->build_rearranged(
          std::span<const double>(gprev.data() + c * nv, nv)));
    rk2(dt, &coeffs, fnew);
    if (m > 0) {
      double diff = 0;
      for (std::size_t i = 0; i < fnew.size(); ++i) {
        const double d = fnew[i] - result[i];
        diff += d * d;
      }
      if (std::sqrt(diff) <= cfg_.picard_tol * ref) {
        converged = true;
        result = fnew;
        break;
      }
    }
    result = fnew;
    gprev = fnew;
  }
  stats_.picard_iters = iters;
  if (!converged && cfg_.picard_max > 1) {
    if (depth >= 4)
      throw NumericalFailure("collision stage: picard did not converge");
    ++stats_.halvings;
    step_collision(0.5 * dt, depth + 1);
    step_collision(0.5 * dt, depth + 1);
    return;
  }
  f_.raw() = result;
}

void Solver::step(double dt) {
  stats_ = StepStats{dt, 0, 0};
  step_transport(0.5 * dt);
  step_collision(dt, 0);
  step_transport(0.5 * dt);
  f_.time += dt;
  f_.step += 1;
}

DiagnosticsRecord Solver::diagnose() {
  DiagnosticsRecord r;
  r.t = f_.time;
  r.mass = mass_functional(f_);
  r.kinetic_energy_pert = kinetic_energy_pert(f_);
  const PoissonSolution ps = field();
  double fe = 0;
  for (std::size_t c = 0; c < mesh_->n_cells(); ++c) {
    double e2 = 0;
    const std::size_t dim = ps.E.size() / mesh_->n_cells();
    for (std::size_t d = 0; d < dim; ++d)
      e2 += ps.E[c * dim + d] * ps.E[c * dim + d];
    fe += e2 * mesh_->cell_volume(c);
  }
  r.field_energy = fe;
  r.flux = ps.boundary_flux;
  const EntropyResult ent = entropy(f_);
  r.entropy = ent.value;
  r.entropy_ok = ent.positive;
  const MacroMicro mm = macro_micro_norms(*ops_, *basis_, f_);
  r.macro_norm = mm.macro_norm;
  r.micro_norm = mm.micro_norm;
  r.theta = cfg_.theta;
  const std::size_t nt = cfg_.theta.size();
  r.w_theta.resize(nt);
  r.i_theta.resize(nt);
  r.d_theta.resize(nt);
  r.e_theta.resize(nt);
  r.sup_theta.resize(nt);
  if (e_acc_.size() != nt) {
    e_acc_.assign(nt, 0.0);
    d_prev_.assign(nt, 0.0);
    have_prev_ = false;
  }
  for (std::size_t i = 0; i < nt; ++i) {
    const double th = cfg_.theta[i];
    r.w_theta[i] = lyapunov_functional(f_, th, fe);
    const EnergyPair ep = energy_functionals(*ops_, f_, fe, th);
    r.i_theta[i] = ep.instant;
    r.d_theta[i] = ep.dissipation;
    if (have_prev_)
      e_acc_[i] += 0.5 * (d_prev_[i] + ep.dissipation) * (f_.time - t_prev_);
    d_prev_[i] = ep.dissipation;
    r.e_theta[i] = ep.instant + e_acc_[i];
    r.sup_theta[i] =
        weighted_lp_norm(f_, std::numeric_limits<double>::infinity(), th);
  }
  have_prev_ = true;
  t_prev_ = f_.time;
  return r;
}

std::vector<DiagnosticsRecord> Solver::run(
    const std::function<void(const DiagnosticsRecord&)>& on_record) {
  if (initial_l2_ < 0) initial_l2_ = weighted_lp_norm(f_, 2.0, 0.0);
  std::vector<DiagnosticsRecord> records;
  auto record = [&]() {
    records.push_back(diagnose());
    if (on_record) on_record(records.back());
  };
  record();
  const double base_dt = cfg_.dt > 0 ? cfg_.dt : stable_dt();
  long since = 0;
  while (f_.time < cfg_.t_end - 1e-12) {
    const double dt = std::min(base_dt, cfg_.t_end - f_.time);
    step(dt);
    ++since;
    const bool last = f_.time >= cfg_.t_end - 1e-12;
    if (since >= cfg_.diag_every || last) {
      since = 0;
      if (!f_.finite())
        throw NumericalFailure("state is not finite at t = " +
                               std::to_string(f_.time));
      const double l2 = weighted_lp_norm(f_, 2.0, 0.0);
      if (l2 > cfg_.blowup_factor * std::max(initial_l2_, 1e-300))
        throw NumericalFailure("norm growth exceeds the blow-up threshold");
      record();
    }
  }
  return records;
}

void write_checkpoint(const std::string& path, const DistributionField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
  const char magic[8] = {'V', 'P', 'L', 'C', 'K', 'P', 'T', '1'};
  os.write(magic, 8);
  auto put_u64 = [&](std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), 8);
  };
  auto put_f64 = [&](double v) {
    os.write(reinterpret_cast<const char*>(&v), 8);
  };
  put_u64(1);  // format version
  put_f64(f.grid().v_max());
  put_u64(static_cast<std::uint64_t>(f.grid().n_axis()));
  put_u64(f.mesh().kind() == MeshKind::Slab1D ? 0 : 1);
  put_f64(f.mesh().length());
  put_u64(static_cast<std::uint64_t>(f.mesh().n_cells_axis()));
  put_f64(f.time);
  put_u64(static_cast<std::uint64_t>(f.step));
  put_u64(f.raw().size());
  os.write(reinterpret_cast<const char*>(f.raw().data()),
           static_cast<std::streamsize>(f.raw().size() * sizeof(double)));
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

DistributionField read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (std::memcmp(magic, "VPLCKPT1", 8) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  auto get_u64 = [&]() {
    std::uint64_t v;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  auto get_f64 = [&]() {
    double v;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  if (get_u64() != 1) throw std::runtime_error("checkpoint: bad version");
  const double v_max = get_f64();
  const int n_axis = static_cast<int>(get_u64());
  const std::uint64_t kind = get_u64();
  const double length = get_f64();
  const int n_cells = static_cast<int>(get_u64());
  auto grid = std::make_shared<VelocityGrid>(v_max, n_axis);
  auto mesh = std::make_shared<SpatialMesh>(
      kind == 0 ? SpatialMesh::slab(length, n_cells)
                : SpatialMesh::disk(length, n_cells));
  DistributionField f(grid, mesh);
  f.time = get_f64();
  f.step = static_cast<long>(get_u64());
  const std::uint64_t count = get_u64();
  if (count != f.raw().size())
    throw std::runtime_error("checkpoint: payload size mismatch");
  is.read(reinterpret_cast<char*>(f.raw().data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!is) throw std::runtime_error("checkpoint: truncated file " + path);
  return f;
}

}  // namespace vpl
