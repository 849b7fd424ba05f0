#pragma once
// Functionals computed on states and trajectories: conservation quadratures,
// entropy, instant/dissipation/total energies, macro-micro ratios, kinetic
// quasi-distance, Holder and S^p norms, oscillation, and the almost
// exponential decay fit.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vpl/field.hpp"
#include "vpl/grid.hpp"
#include "vpl/operators.hpp"

namespace vpl {

struct DiagnosticsRecord {
  double t = 0;
  double mass = 0;                 // int int sqrt(mu) f
  double kinetic_energy_pert = 0;  // int int |v|^2 sqrt(mu) f
  double field_energy = 0;         // int |E_f|^2
  double flux = 0;                 // boundary flux of E
  double entropy = 0;              // int int F ln F
  bool entropy_ok = false;         // F > 0 everywhere
  double macro_norm = 0;           // || P f ||_sigma
  double micro_norm = 0;           // || (I-P) f ||_sigma
  std::vector<double> theta;       // configured weights
  std::vector<double> w_theta;     // Lyapunov energy W_theta (see below)
  std::vector<double> i_theta;     // instant energy
  std::vector<double> d_theta;     // dissipation rate
  std::vector<double> e_theta;     // accumulated total energy
  std::vector<double> sup_theta;   // || f ||_{inf,theta}
};

double mass_functional(const DistributionField& f);
double kinetic_energy_pert(const DistributionField& f);

struct EntropyResult {
  double value;
  bool positive;  // F = mu + sqrt(mu) f > 0 everywhere
  double min_F;
};
EntropyResult entropy(const DistributionField& f);

// || <v>^theta f ||_2^2 over phase space.
double w_theta_functional(const DistributionField& f, double theta);

// Lyapunov energy W_theta = sum_{j=0}^{2 theta} || f ||_{2,j/2}^2 + || E ||_2^2.
// This is the quantity that is non-increasing along the flow (after the
// initial transient); the plain L2 norm alone is not, since energy is
// exchanged with the field.
double lyapunov_functional(const DistributionField& f, double theta,
                           double field_energy);

// sigma-weighted norms of the macro / micro parts, aggregated over cells.
struct MacroMicro {
  double macro_norm;
  double micro_norm;
};
MacroMicro macro_micro_norms(const CollisionOperators& ops,
                             const MacroBasis& basis,
                             const DistributionField& f, double theta = 0.0);

// Instant energy I_theta = ||f||_{2,theta}^2 + ||E||^2 and dissipation
// D_theta = ||f||_{sigma,theta}^2 + ||E||^2.
struct EnergyPair {
  double instant;
  double dissipation;
};
EnergyPair energy_functionals(const CollisionOperators& ops,
                              const DistributionField& f,
                              double field_energy, double theta);

// Windowed ratio (int ||Pf||_sigma^2 + int ||E||^2) / int ||(I-P)f||_sigma^2
// over integer-length windows of the stored series.
struct WindowRatio {
  double t_begin, t_end;
  double ratio;
  bool defined;
};
std::vector<WindowRatio> macro_micro_report(std::span<const double> t,
                                            std::span<const double> macro2,
                                            std::span<const double> micro2,
                                            std::span<const double> field2,
                                            double window = 1.0);

struct KineticPoint {
  double t = 0;
  Vec3 x{0, 0, 0};
  Vec3 v{0, 0, 0};
};

// d(z, w) = max{ |t-tau|^{1/2}, |x - xi - (t-tau) nu|^{1/3}, |v - nu| },
// where (tau, xi, nu) is the later point.
double quasi_distance(const KineticPoint& z, const KineticPoint& w);

// Sampled lower bound of the Holder seminorm at exponent alpha over a static
// snapshot (pairs share t): near-neighbor grid pairs plus random far pairs.
double holder_seminorm(const DistributionField& f, double alpha,
                       int random_pairs = 4096, unsigned long seed = 1);

// S^p norm of a stored trajectory with uniform dt:
// (||f||_p^p + ||D_v f||_p^p + ||D^2_vv f||_p^p + ||Yf||_p^p)^{1/p},
// Y = -(d_t + v . grad_x); centered differences in t, x, v.
double sp_norm(const std::vector<DistributionField>& traj, double dt, double p);

// osc(a, z0, r) = r^{-(4d+2)} int_{t0-r^2}^{t0} iint_{D_r x D_r}
//   |a(t,x1,v1) - a(t,x2,v2)|, D_r the kinetic cylinder section
//   { |x - x0 - (t-t0) v0| < r^3, |v - v0| < r }, d = 3; Monte Carlo.
double oscillation(const std::function<double(double, const Vec3&, const Vec3&)>& a,
                   const KineticPoint& z0, double r, int samples = 20000,
                   unsigned long seed = 1);

// Fit W(t) ~ eps0^2 (1 + t/k)^{-2k} on samples with t > 1.
struct DecayFit {
  double eps0_hat;
  double k_hat;
  double residual;  // rms of log-residuals
  bool decaying;    // k_hat > 0 and the series is non-constant
};
DecayFit decay_fit(std::span<const double> t, std::span<const double> w);

// CSV / summary helpers (schema documented in the repository README).
std::string csv_header(std::span<const double> theta);
std::string csv_row(const DiagnosticsRecord& r);

}  // namespace vpl
