#include "vpl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>

namespace vpl {

double mass_functional(const DistributionField& f) {
  const auto& g = f.grid();
  const std::size_t nv = g.size();
  double total = 0;
  for (std::size_t c = 0; c < f.mesh().n_cells(); ++c) {
    auto fc = f.cell(c);
    double s = 0;
    for (std::size_t k = 0; k < nv; ++k) s += g.sqrt_mu()[k] * fc[k];
    total += f.mesh().cell_volume(c) * s;
  }
  return total * g.cell_volume();
}

double kinetic_energy_pert(const DistributionField& f) {
  const auto& g = f.grid();
  const std::size_t nv = g.size();
  double total = 0;
  for (std::size_t c = 0; c < f.mesh().n_cells(); ++c) {
    auto fc = f.cell(c);
    double s = 0;
    for (std::size_t k = 0; k < nv; ++k)
      s += norm2(g.node(k)) * g.sqrt_mu()[k] * fc[k];
    total += f.mesh().cell_volume(c) * s;
  }
  return total * g.cell_volume();
}

EntropyResult entropy(const DistributionField& f) {
  const auto& g = f.grid();
  const std::size_t nv = g.size();
  double total = 0;
  double min_F = std::numeric_limits<double>::infinity();
  bool positive = true;
  for (std::size_t c = 0; c < f.mesh().n_cells(); ++c) {
    auto fc = f.cell(c);
    double s = 0;
    for (std::size_t k = 0; k < nv; ++k) {
      const double F = g.mu()[k] + g.sqrt_mu()[k] * fc[k];
      min_F = std::min(min_F, F);
      if (F > 0) {
        s += F * std::log(F);
      } else {
        positive = false;
      }
    }
    total += f.mesh().cell_volume(c) * s;
  }
  return {total * g.cell_volume(), positive, min_F};
}

double w_theta_functional(const DistributionField& f, double theta) {
  const auto& g = f.grid();
  const std::size_t nv = g.size();
  const auto& w = g.bracket_pow(2.0 * theta);
  double total = 0;
  for (std::size_t c = 0; c < f.mesh().n_cells(); ++c) {
    auto fc = f.cell(c);
    double s = 0;
    for (std::size_t k = 0; k < nv; ++k) s += w[k] * fc[k] * fc[k];
    total += f.mesh().cell_volume(c) * s;
  }
  return total * g.cell_volume();
}

double lyapunov_functional(const DistributionField& f, double theta,
                           double field_energy) {
  const int m = static_cast<int>(std::floor(2.0 * theta + 1e-12));
  double total = field_energy;
  for (int j = 0; j <= m; ++j) total += w_theta_functional(f, 0.5 * j);
  return total;
}

MacroMicro macro_micro_norms(const CollisionOperators& ops,
                             const MacroBasis& basis,
                             const DistributionField& f, double theta) {
  const std::size_t nv = f.grid().size();
  std::vector<double> pf(nv), qf(nv);
  double ma = 0, mi = 0;
  for (std::size_t c = 0; c < f.mesh().n_cells(); ++c) {
    auto fc = f.cell(c);
    basis.project(fc, pf);
    for (std::size_t k = 0; k < nv; ++k) qf[k] = fc[k] - pf[k];
    ma += f.mesh().cell_volume(c) * sigma_inner(ops, pf, pf, theta);
    mi += f.mesh().cell_volume(c) * sigma_inner(ops, qf, qf, theta);
  }
  return {std::sqrt(std::max(ma, 0.0)), std::sqrt(std::max(mi, 0.0))};
}

EnergyPair energy_functionals(const CollisionOperators& ops,
                              const DistributionField& f, double field_energy,
                              double theta) {
  double l2 = w_theta_functional(f, theta);
  double sg = 0;
  for (std::size_t c = 0; c < f.mesh().n_cells(); ++c) {
    auto fc = f.cell(c);
    sg += f.mesh().cell_volume(c) * sigma_inner(ops, fc, fc, theta);
  }
  return {l2 + field_energy, sg + field_energy};
}

std::vector<WindowRatio> macro_micro_report(std::span<const double> t,
                                            std::span<const double> macro2,
                                            std::span<const double> micro2,
                                            std::span<const double> field2,
                                            double window) {
  if (t.size() != macro2.size() || t.size() != micro2.size() ||
      t.size() != field2.size())
    throw std::invalid_argument("macro_micro_report: size mismatch");
  std::vector<WindowRatio> out;
  if (t.empty()) return out;
  double t0 = t.front();
  const double t_last = t.back();
  for (; t0 + window <= t_last + 1e-12; t0 += window) {
    const double t1 = t0 + window;
    // Trapezoid over samples in [t0, t1].
    double num = 0, den = 0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      if (t[i] < t0 - 1e-12 || t[i + 1] > t1 + 1e-12) continue;
      const double dt = t[i + 1] - t[i];
      num += 0.5 * dt * (macro2[i] + field2[i] + macro2[i + 1] + field2[i + 1]);
      den += 0.5 * dt * (micro2[i] + micro2[i + 1]);
    }
    WindowRatio wr;
    wr.t_begin = t0;
    wr.t_end = t1;
    wr.defined = den > 0;
    wr.ratio = wr.defined ? num / den : 0.0;
    out.push_back(wr);
  }
  return out;
}

double quasi_distance(const KineticPoint& z, const KineticPoint& w) {
  const KineticPoint& a = (z.t >= w.t) ? z : w;  // earlier in reversed order
  const KineticPoint& b = (z.t >= w.t) ? w : z;  // later point: (tau, xi, nu)
  const double dt = b.t - a.t;
  Vec3 dx, dv;
  for (int i = 0; i < 3; ++i) {
    dx[i] = a.x[i] - b.x[i] - (a.t - b.t) * b.v[i];
    dv[i] = a.v[i] - b.v[i];
  }
  const double d1 = std::sqrt(std::abs(dt));
  const double d2 = std::cbrt(std::sqrt(norm2(dx)));
  const double d3 = std::sqrt(norm2(dv));
  return std::max({d1, d2, d3});
}

double holder_seminorm(const DistributionField& f, double alpha,
                       int random_pairs, unsigned long seed) {
  const auto& g = f.grid();
  const std::size_t nv = g.size();
  const std::size_t nc = f.mesh().n_cells();
  const double h = g.h();
  double best = 0;
  auto consider = [&](double df, double d) {
    if (d <= 0) return;
    best = std::max(best, std::abs(df) / std::pow(d, alpha));
  };
  const std::size_t n = static_cast<std::size_t>(g.n_axis());
  // Velocity neighbors within each cell; x neighbors at fixed v (1-D slab).
  for (std::size_t c = 0; c < nc; ++c) {
    auto fc = f.cell(c);
    for (std::size_t k = 0; k < nv; ++k) {
      const std::size_t kz = k % n;
      if (kz + 1 < n) consider(fc[k + 1] - fc[k], h);
      if (c + 1 < nc && f.mesh().kind() == MeshKind::Slab1D) {
        auto fn = f.cell(c + 1);
        const double dx = f.mesh().center(c + 1) - f.mesh().center(c);
        consider(fn[k] - fc[k], std::cbrt(std::abs(dx)));
      }
    }
  }
  // Random far pairs.
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_c(0, nc - 1),
      pick_k(0, nv - 1);
  for (int i = 0; i < random_pairs; ++i) {
    const std::size_t c1 = pick_c(rng), c2 = pick_c(rng);
    const std::size_t k1 = pick_k(rng), k2 = pick_k(rng);
    KineticPoint z{f.time, {f.mesh().center(c1), 0, 0}, g.node(k1)};
    KineticPoint w{f.time, {f.mesh().center(c2), 0, 0}, g.node(k2)};
    const double d = quasi_distance(z, w);
    consider(f.cell(c1)[k1] - f.cell(c2)[k2], d);
  }
  return best;
}

double sp_norm(const std::vector<DistributionField>& traj, double dt,
               double p) {
  if (traj.size() < 2) throw std::invalid_argument("sp_norm: need >= 2 frames");
  const auto& g = traj[0].grid();
  const auto& mesh = traj[0].mesh();
  if (mesh.kind() != MeshKind::Slab1D)
    throw std::invalid_argument("sp_norm: slab meshes only");
  const std::size_t nv = g.size();
  const std::size_t nc = mesh.n_cells();
  const std::size_t nt = traj.size();
  const double dx = mesh.dx();
  const bool inf = !std::isfinite(p);
  double acc = 0, sup = 0;
  auto add = [&](double val) {
    const double a = std::abs(val);
    if (inf)
      sup = std::max(sup, a);
    else
      acc += std::pow(a, p);
  };
  std::vector<double> d1(nv), d2(nv);
  for (std::size_t it = 0; it < nt; ++it) {
    const auto& f = traj[it];
    const auto& fp = traj[std::min(it + 1, nt - 1)];
    const auto& fm = traj[it == 0 ? 0 : it - 1];
    const double wt = (it == 0 || it + 1 == nt) ? 1.0 : 2.0;
    for (std::size_t c = 0; c < nc; ++c) {
      auto fc = f.cell(c);
      for (int ai = 0; ai < 3; ++ai) {
        apply_D(g, fc, ai, d1);
        for (std::size_t k = 0; k < nv; ++k) add(d1[k]);
        for (int aj = ai; aj < 3; ++aj) {
          apply_D(g, d1, aj, d2);
          for (std::size_t k = 0; k < nv; ++k) add(d2[k]);
        }
      }
      auto fcp = fp.cell(c);
      auto fcm = fm.cell(c);
      for (std::size_t k = 0; k < nv; ++k) {
        add(fc[k]);
        const double ft = (fcp[k] - fcm[k]) / (wt * dt);
        const double xp = (c + 1 < nc) ? f.cell(c + 1)[k] : 0.0;
        const double xm = (c > 0) ? f.cell(c - 1)[k] : 0.0;
        const double fx = (xp - xm) / (2.0 * dx);
        add(-(ft + g.node(k)[0] * fx));
      }
    }
  }
  if (inf) return sup;
  return std::pow(acc * dt * g.cell_volume() * mesh.cell_volume(0), 1.0 / p);
}

double oscillation(
    const std::function<double(double, const Vec3&, const Vec3&)>& a,
    const KineticPoint& z0, double r, int samples, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto ball = [&](double radius) {
    Vec3 p{gauss(rng), gauss(rng), gauss(rng)};
    const double nrm = std::sqrt(norm2(p));
    const double s = radius * std::cbrt(u01(rng)) / (nrm > 0 ? nrm : 1.0);
    for (auto& c : p) c *= s;
    return p;
  };
  const double r2 = r * r, r3 = r * r * r;
  double mean = 0;
  for (int i = 0; i < samples; ++i) {
    const double t = z0.t - r2 * u01(rng);
    Vec3 x1 = ball(r3), x2 = ball(r3), v1 = ball(r), v2 = ball(r);
    for (int j = 0; j < 3; ++j) {
      const double xc = z0.x[j] + (t - z0.t) * z0.v[j];
      x1[j] += xc;
      x2[j] += xc;
      v1[j] += z0.v[j];
      v2[j] += z0.v[j];
    }
    mean += std::abs(a(t, x1, v1) - a(t, x2, v2));
  }
  mean /= samples;
  const double vb = 4.0 * M_PI / 3.0;
  const double vx = vb * r3 * r3 * r3;  // ball of radius r^3
  const double vv = vb * r * r * r;     // ball of radius r
  const double volume = r2 * vx * vx * vv * vv;
  return mean * volume / std::pow(r, 14.0);
}

DecayFit decay_fit(std::span<const double> t, std::span<const double> w) {
  if (t.size() != w.size()) throw std::invalid_argument("decay_fit: size");
  std::vector<double> ts, ls;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > 1.0 && w[i] > 0) {
      ts.push_back(t[i]);
      ls.push_back(std::log(w[i]));
    }
  }
  DecayFit fit{0, 0, 0, false};
  if (ts.size() < 3) return fit;
  auto cost = [&](double k) {
    // model: log w = A - 2k log(1 + t/k); optimal A is the mean residual
    double A = 0;
    std::vector<double> m(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      m[i] = -2.0 * k * std::log1p(ts[i] / k);
      A += ls[i] - m[i];
    }
    A /= ts.size();
    double s = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double e = ls[i] - (A + m[i]);
      s += e * e;
    }
    return std::pair<double, double>(s, A);
  };
  // coarse log-spaced scan, then golden-section refinement
  double best_k = 1.0, best_s = std::numeric_limits<double>::infinity();
  for (double lk = std::log(1e-2); lk <= std::log(1e3); lk += 0.05) {
    const double k = std::exp(lk);
    const double s = cost(k).first;
    if (s < best_s) {
      best_s = s;
      best_k = k;
    }
  }
  double lo = best_k / 1.06, hi = best_k * 1.06;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = cost(x1).first, f2 = cost(x2).first;
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = cost(x1).first;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = cost(x2).first;
    }
  }
  fit.k_hat = 0.5 * (lo + hi);
  auto [s, A] = cost(fit.k_hat);
  fit.eps0_hat = std::exp(0.5 * A);
  fit.residual = std::sqrt(s / ts.size());
  fit.decaying = fit.k_hat > 0 && ls.front() > ls.back();
  return fit;
}

std::string csv_header(std::span<const double> theta) {
  std::string h =
      "t,mass,kinetic_energy_pert,field_energy,flux,entropy,entropy_ok,"
      "macro_norm,micro_norm";
  char buf[64];
  for (double th : theta) {
    for (const char* name : {"w", "i", "d", "e", "sup"}) {
      std::snprintf(buf, sizeof(buf), ",%s_theta_%g", name, th);
      h += buf;
    }
  }
  return h;
}

std::string csv_row(const DiagnosticsRecord& r) {
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  std::string row = num(r.t) + "," + num(r.mass) + "," +
                    num(r.kinetic_energy_pert) + "," + num(r.field_energy) +
                    "," + num(r.flux) + "," + num(r.entropy) + "," +
                    (r.entropy_ok ? "1" : "0") + "," + num(r.macro_norm) +
                    "," + num(r.micro_norm);
  for (std::size_t i = 0; i < r.theta.size(); ++i) {
    row += "," + num(r.w_theta[i]) + "," + num(r.i_theta[i]) + "," +
           num(r.d_theta[i]) + "," + num(r.e_theta[i]) + "," +
           num(r.sup_theta[i]);
  }
  return row;
}

}  // namespace vpl
