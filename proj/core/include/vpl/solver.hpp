#pragma once
// Strang-split time stepper for the near-equilibrium slab problem
//   d_t f + v1 d_x f + E_g d_v1 f
//     = -L f + Gamma[g, f] + E_g vt1 f + 2 sqrt(mu) vt1 E_f,
// with specular walls in x and the self-consistent field E_f.
//
// Conservation engineering.  The collision stage uses the projected forms
// (I-P) L (I-P) and (I-P) Gamma (consistent to the same order, exactly
// moment-free), the field terms pair d_v1 with the discrete weight vt1
// (so the sqrt(mu)-weighted and |v|^2-weighted moments of each pair vanish
// on the lattice), and the upwind wall fluxes pair v with its specular
// image, so mass is conserved to roundoff and, with frozen coefficients,
// the kinetic energy as well.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vpl/diagnostics.hpp"
#include "vpl/field.hpp"
#include "vpl/grid.hpp"
#include "vpl/landau.hpp"
#include "vpl/operators.hpp"

namespace vpl {

enum class RunMode { Frozen, Full };
enum class Reconstruction { Upwind, Muscl };

struct SolverConfig {
  RunMode mode = RunMode::Frozen;
  PoissonBC bc = PoissonBC::Dirichlet;
  Reconstruction recon = Reconstruction::Upwind;
  double dt = 0.0;          // 0 -> stable_dt()
  double safety = 0.9;
  double t_end = 5.0;
  int picard_max = 5;
  double picard_tol = 1e-10;
  int diag_every = 10;      // steps between diagnostics records
  double blowup_factor = 10.0;
  std::vector<double> theta{0.0};
};

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Initial data recipes: "gaussian-bump" (a(x) sqrt(mu), isotropic),
// "odd-bump" (a(x) v1 sqrt(mu)), "random" (seeded node noise, smoothed in x).
// The result is scaled so that || f ||_{inf, theta0} = eps0.
DistributionField initial_condition(std::shared_ptr<const VelocityGrid> grid,
                                    std::shared_ptr<const SpatialMesh> mesh,
                                    const std::string& recipe, double eps0,
                                    double theta0, unsigned long seed = 1);

struct StepStats {
  double dt = 0;
  int picard_iters = 0;
  int halvings = 0;
};

class Solver {
 public:
  Solver(std::shared_ptr<const KernelTable> table,
         std::shared_ptr<const SpatialMesh> mesh, SolverConfig cfg);

  const SolverConfig& config() const { return cfg_; }
  const CollisionOperators& ops() const { return *ops_; }
  const MacroBasis& basis() const { return *basis_; }
  DistributionField& state() { return f_; }
  const DistributionField& state() const { return f_; }
  void set_state(const DistributionField& f);

  // min of the advective CFL bound, the sigma_G parabolic bound, and
  // 2 / lambda_max of the projected collision operator (power iteration).
  double stable_dt() const;

  PoissonSolution field() const;  // E_f of the current state
  void step(double dt);           // one Strang step; updates stats()
  const StepStats& stats() const { return stats_; }

  DiagnosticsRecord diagnose();
  // Advance to t_end, recording diagnostics every diag_every steps (plus the
  // initial and final states).  Throws NumericalFailure on blow-up.
  std::vector<DiagnosticsRecord> run(
      const std::function<void(const DiagnosticsRecord&)>& on_record = nullptr);

 private:
  void step_transport(double dt);
  void step_collision(double dt, int depth);
  // Explicit midpoint stage with coefficients from g (null in frozen mode).
  void rk2(double dt, const std::vector<CollisionOperators::Rearranged>* coeffs,
           std::vector<double>& fnew) const;
  void collision_rhs(const std::vector<double>& fs,
                     const std::vector<CollisionOperators::Rearranged>* coeffs,
                     std::vector<double>& rhs) const;

  SolverConfig cfg_;
  std::shared_ptr<const KernelTable> table_;
  std::shared_ptr<const VelocityGrid> grid_;
  std::shared_ptr<const SpatialMesh> mesh_;
  std::unique_ptr<CollisionOperators> ops_;
  std::unique_ptr<MacroBasis> basis_;
  DistributionField f_;
  StepStats stats_;
  double initial_l2_ = -1;
  // trapezoid accumulation of the dissipation integral, per theta
  std::vector<double> e_acc_, d_prev_;
  double t_prev_ = 0;
  bool have_prev_ = false;
};

// Bit-exact checkpointing (binary header + row-major doubles).
void write_checkpoint(const std::string& path, const DistributionField& f);
DistributionField read_checkpoint(const std::string& path);

}  // namespace vpl
