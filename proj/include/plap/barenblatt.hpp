#pragma once

// Self-similar source solution of u_t = div(|grad u|^(p-2) grad u):
//   u(x,t) = t^-alpha [C - k (|x| t^-beta)^(p/(p-1))]_+^((p-1)/(p-2))
// with alpha = n / (n(p-2) + p), beta = alpha / n, k = ((p-2)/p) beta^(1/(p-1)).

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "plap/flux.hpp"
#include "plap/grid.hpp"
#include "plap/regularizers.hpp"
#include "plap/stepper.hpp"

namespace plap {

struct Barenblatt {
  double p = 3.0;
  int n = 1;
  double C = 1.0;

  Barenblatt(double p_, int n_, double C_ = 1.0) : p(p_), n(n_), C(C_) {
    if (!(p > 2.0)) throw std::invalid_argument("Barenblatt profile needs p > 2");
    if (n != 1 && n != 2) throw std::invalid_argument("Barenblatt profile supports n = 1 or 2");
    if (!(C > 0.0)) throw std::invalid_argument("Barenblatt constant C must be positive");
  }

  double alpha() const { return n / (n * (p - 2.0) + p); }
  double beta() const { return alpha() / n; }
  double k() const { return (p - 2.0) / p * std::pow(beta(), 1.0 / (p - 1.0)); }

  /// Support radius at time t.
  double radius(double t) const { return std::pow(C / k(), (p - 1.0) / p) * std::pow(t, beta()); }

  double operator()(double r, double t) const {
    if (!(t > 0.0)) throw std::invalid_argument("Barenblatt profile is defined for t > 0");
    const double xi = std::abs(r) * std::pow(t, -beta());
    const double base = C - k() * std::pow(xi, p / (p - 1.0));
    if (base <= 0.0) return 0.0;
    return std::pow(t, -alpha()) * std::pow(base, (p - 1.0) / (p - 2.0));
  }

  double at(std::span<const double> x, double t) const { return (*this)(point_norm(x), t); }

  /// Radial derivative du/dr.
  double radial_slope(double r, double t) const {
    const double xi = std::abs(r) * std::pow(t, -beta());
    const double base = C - k() * std::pow(xi, p / (p - 1.0));
    if (base <= 0.0 || r == 0.0) return 0.0;
    const double e = (p - 1.0) / (p - 2.0);
    const double dbase_dr = -k() * p / (p - 1.0) * std::pow(xi, 1.0 / (p - 1.0)) * std::pow(t, -beta());
    return std::pow(t, -alpha()) * e * std::pow(base, e - 1.0) * dbase_dr;
  }

  Field sample(const GridSpec& grid, double t) const {
    return Field::sample(grid, [&](const Vec& x) { return at(std::span<const double>(x.data(), grid.dim()), t); },
                         t);
  }
};

struct BarenblattLevel {
  int N = 0;
  double h = 0.0;
  double l1_error = 0.0;
  double order = 0.0;  // log2(previous error / this error); 0 on the first level
  std::size_t steps = 0;
};

/// Evolves the profile sampled at t0 to t1 on each grid and measures the L1
/// error against the profile sampled at t1. The solver starts its clock at 0,
/// so the run covers t1 - t0.
inline std::vector<BarenblattLevel> barenblatt_ladder(const Barenblatt& b, double L, const std::vector<int>& Ns,
                                                      double t0, double t1, StepOptions opt = {}) {
  if (!(t0 > 0.0) || !(t1 >= t0)) throw std::invalid_argument("need 0 < t0 <= t1");
  const FluxModel model = pure_diffusion(1.0);
  std::vector<BarenblattLevel> out;
  for (int N : Ns) {
    const GridSpec grid = GridSpec::build(b.n, L, N);
    const Field start = b.sample(grid, t0);
    const Field u0(grid, start.values(), 0.0);
    BarenblattLevel lvl;
    lvl.N = N;
    lvl.h = grid.spacing();
    if (t1 == t0) {
      out.push_back(lvl);
      continue;
    }
    const SolverRun run = evolve(u0, model, b.p, t1 - t0, {}, opt);
    lvl.steps = run.dt_history.size();
    const Field exact = b.sample(grid, t1);
    double err = 0.0;
    for (std::size_t c = 0; c < exact.size(); ++c) err += std::abs(run.final()[c] - exact[c]);
    lvl.l1_error = err * grid.cell_volume();
    if (!out.empty() && lvl.l1_error > 0.0) lvl.order = std::log2(out.back().l1_error / lvl.l1_error);
    out.push_back(lvl);
  }
  return out;
}

/// Builds a SolverRun whose snapshots are the exact profile on the grid at the
/// given (strictly increasing, positive) times, for weak-form residual checks.
inline SolverRun barenblatt_run(const Barenblatt& b, const GridSpec& grid, const std::vector<double>& times) {
  SolverRun run;
  run.grid = grid;
  for (double t : times) {
    run.snapshots.push_back(b.sample(grid, t));
    run.snapshot_steps.push_back(run.snapshot_steps.size());
  }
  for (std::size_t k = 1; k < times.size(); ++k) run.dt_history.push_back(times[k] - times[k - 1]);
  run.horizon = times.empty() ? 0.0 : times.back();
  return run;
}

}  // namespace plap
