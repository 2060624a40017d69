#pragma once

// Forward Euler time integration with a degeneracy-aware step bound, exact
// landing on record times, mass/boundary ledgers and run-wide bounds.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "plap/flux.hpp"
#include "plap/grid.hpp"
#include "plap/operator.hpp"

namespace plap {

/// Guard added to the step-bound denominators so flat states stay finite.
inline constexpr double kDtGuard = 1e-30;

enum class StabilityPolicy { reject, warn };

struct StepOptions {
  double cfl = 0.4;
  double dt_max = kInfinity;
  StabilityPolicy policy = StabilityPolicy::reject;
  /// Abort threshold for the cumulative boundary leak, relative to ||u0||_1.
  double leak_tol = 1e-8;
  /// Record a snapshot every this many steps in addition to the record times (0 = off).
  std::size_t record_every = 0;
  /// Require the initial datum to vanish outside [-L/2, L/2]^n.
  bool require_inner_support = true;
  std::size_t max_steps = 50'000'000;
};

/// Largest face |grad u| and the resulting diffusion/convection step bounds.
struct StepBound {
  double dt = 0.0;
  double diffusion_dt = 0.0;
  double convection_dt = 0.0;
  double max_face_gradient = 0.0;
  double max_wave_speed = 0.0;
};

inline double max_face_gradient(const Field& field) {
  const auto& u = field.values();
  const double inv_h = 1.0 / field.grid().spacing();
  double g = 0.0;
  for_each_face(field.grid(), [&](const FaceRef& f) {
    g = std::max(g, std::abs(side_value(u, f.right) - side_value(u, f.left)) * inv_h);
  });
  return g;
}

inline double max_wave_speed(const Field& field, const FluxModel& model, double p, double t) {
  if (!model.has_convection) return 0.0;
  const auto& u = field.values();
  double lam = 0.0;
  for_each_face(field.grid(), [&](const FaceRef& f) {
    lam = std::max(lam, face_wave_speed(model, f, t, side_value(u, f.left), side_value(u, f.right), p));
  });
  return lam;
}

/// dt = cfl * min(h^2 / (2n mu (p-1) G^(p-2) + eps), h / (2n lambda + eps)),
/// clamped to dt_max.
inline StepBound stable_dt_bound(const Field& field, const FluxModel& model, double p, double t, double cfl,
                                 double dt_max = kInfinity) {
  require_p(p);
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("cfl must lie in (0, 1]");
  const GridSpec& grid = field.grid();
  const double h = grid.spacing();
  const double n = grid.dim();
  StepBound b;
  b.max_face_gradient = max_face_gradient(field);
  b.max_wave_speed = max_wave_speed(field, model, p, t);
  const double diffusivity = model.mu(t) * (p - 1.0) * std::pow(b.max_face_gradient, p - 2.0);
  b.diffusion_dt = h * h / (2.0 * n * diffusivity + kDtGuard);
  b.convection_dt = h / (2.0 * n * b.max_wave_speed + kDtGuard);
  b.dt = std::min(cfl * std::min(b.diffusion_dt, b.convection_dt), dt_max);
  return b;
}

inline double stable_dt(const Field& field, const FluxModel& model, double p, double t, double cfl,
                        double dt_max = kInfinity) {
  return stable_dt_bound(field, model, p, t, cfl, dt_max).dt;
}

/// Field plus the mass that entered through the boundary during the step.
struct StepResult {
  Field field;
  double boundary_inflow = 0.0;
};

namespace detail {

inline void check_step_size(const Field& field, const FluxModel& model, double p, double dt,
                            StabilityPolicy policy) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be positive and finite");
  const double limit = stable_dt(field, model, p, field.time(), 1.0);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "time step " << dt << " exceeds the stability bound " << limit << " at t = " << field.time();
    if (policy == StabilityPolicy::reject) throw std::domain_error(msg.str());
    std::cerr << "warning: " << msg.str() << '\n';
  }
}

inline StepResult euler_update(const Field& field, const SemidiscreteRhs& rhs, double dt) {
  std::vector<double> next(field.values());
  for (std::size_t c = 0; c < next.size(); ++c) next[c] += dt * rhs.total[c];
  return StepResult{Field(field.grid(), std::move(next), field.time() + dt), dt * rhs.boundary_rate};
}

}  // namespace detail

/// One forward Euler step u + dt * rhs(u).
inline StepResult advance(const Field& field, const FluxModel& model, double p, double dt,
                          StabilityPolicy policy = StabilityPolicy::reject) {
  detail::check_step_size(field, model, p, dt, policy);
  return detail::euler_update(field, semidiscrete_rhs(field, model, p, field.time()), dt);
}

inline Field step(const Field& field, const FluxModel& model, double p, double dt,
                  StabilityPolicy policy = StabilityPolicy::reject) {
  return advance(field, model, p, dt, policy).field;
}

/// Measured M1(T), Minf(T) and G(T) over every step of a run.
struct RunBounds {
  double M1 = 0.0;
  double Minf = 0.0;
  double G = 0.0;
};

struct SolverRun {
  GridSpec grid;
  std::vector<Field> snapshots;
  /// Number of steps taken before each snapshot (0 for the initial one).
  std::vector<std::size_t> snapshot_steps;
  std::vector<double> dt_history;
  double horizon = 0.0;
  RunBounds bounds;
  /// Cumulative |mass through the box boundary|.
  double boundary_leak = 0.0;
  /// Cumulative signed inflow; mass(t) - net_inflow stays equal to the initial mass.
  double net_inflow = 0.0;
  double initial_mass = 0.0;
  double initial_l1 = 0.0;

  const Field& initial() const { return snapshots.front(); }
  const Field& final() const { return snapshots.back(); }
  std::vector<double> times() const {
    std::vector<double> t;
    t.reserve(snapshots.size());
    for (const auto& s : snapshots) t.push_back(s.time());
    return t;
  }
};

class BoundaryLeakError : public std::runtime_error {
 public:
  BoundaryLeakError(double leak, double tolerance, double time)
      : std::runtime_error(describe(leak, tolerance, time)), leak_(leak), tolerance_(tolerance), time_(time) {}

  double leak() const { return leak_; }
  double tolerance() const { return tolerance_; }
  double time() const { return time_; }

 private:
  static std::string describe(double leak, double tol, double t) {
    std::ostringstream s;
    s << "boundary leak " << leak << " exceeds tolerance " << tol << " at t = " << t
      << "; the box is too small for this horizon";
    return s.str();
  }
  double leak_;
  double tolerance_;
  double time_;
};

namespace detail {

inline std::vector<double> checked_record_times(std::vector<double> record, double T) {
  if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("horizon T must be finite and nonnegative");
  for (double r : record) {
    if (!(r >= 0.0 && r <= T)) throw std::invalid_argument("record times must lie in [0, T]");
  }
  record.push_back(T);
  std::sort(record.begin(), record.end());
  record.erase(std::unique(record.begin(), record.end()), record.end());
  if (!record.empty() && record.front() == 0.0) record.erase(record.begin());
  return record;
}

/// Largest |g(t, u)| over an evenly spaced sample of [min u, max u].
inline double sample_g(const FluxModel& model, double t, const std::vector<double>& u, int dim) {
  if (!model.has_convection || u.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  double g = 0.0;
  constexpr int kSamples = 9;
  for (int k = 0; k < kSamples; ++k) {
    const double v = *lo + (*hi - *lo) * k / (kSamples - 1.0);
    g = std::max(g, euclid(model.g(t, v), dim));
  }
  return g;
}

struct RunState {
  SolverRun run;
  Field current;
  std::size_t steps = 0;
  double leak_limit = 0.0;

  void absorb_bounds(const FluxModel& model) {
    const auto& u = current.values();
    run.bounds.M1 = std::max(run.bounds.M1, lq_norm(current, 1.0));
    run.bounds.Minf = std::max(run.bounds.Minf, lq_norm(current, kInfinity));
    run.bounds.G = std::max(run.bounds.G, sample_g(model, current.time(), u, current.grid().dim()));
  }

  void record() {
    run.snapshots.push_back(current);
    run.snapshot_steps.push_back(steps);
  }
};

inline RunState start_run(const Field& u0, const FluxModel& model, double p, double T, const StepOptions& opt) {
  require_p(p);
  if (u0.time() != 0.0) throw std::invalid_argument("initial datum must be stamped t = 0");
  if (opt.require_inner_support && !supported_in_inner_half(u0)) {
    throw std::invalid_argument("initial datum must vanish outside the inner half-box [-L/2, L/2]^n");
  }
  RunState s;
  s.current = u0;
  s.run.grid = u0.grid();
  s.run.horizon = T;
  s.run.initial_mass = mass(u0);
  s.run.initial_l1 = lq_norm(u0, 1.0);
  s.leak_limit = opt.leak_tol * s.run.initial_l1;
  s.absorb_bounds(model);
  s.record();
  return s;
}

inline void apply_step(RunState& s, const FluxModel& model, double dt, const SemidiscreteRhs& rhs) {
  StepResult r = euler_update(s.current, rhs, dt);
  s.current = std::move(r.field);
  ++s.steps;
  s.run.dt_history.push_back(dt);
  s.run.net_inflow += r.boundary_inflow;
  s.run.boundary_leak += std::abs(r.boundary_inflow);
  s.absorb_bounds(model);
  if (s.run.boundary_leak > s.leak_limit) {
    throw BoundaryLeakError(s.run.boundary_leak, s.leak_limit, s.current.time());
  }
}

/// Next dt: the bound clipped so the step lands exactly on the next target time.
inline double clip_to_target(double dt, double t, double target) {
  if (t + dt >= target) return target - t;
  // avoid leaving a sliver that would force a vanishing final step
  if (t + 1.5 * dt > target) return 0.5 * (target - t);
  return dt;
}

}  // namespace detail

/// Evolves u0 to T, recording snapshots at 0, every record time and T.
inline SolverRun evolve(const Field& u0, const FluxModel& model, double p, double T,
                        const std::vector<double>& record_times, const StepOptions& opt = {}) {
  auto targets = detail::checked_record_times(record_times, T);
  auto s = detail::start_run(u0, model, p, T, opt);
  for (double target : targets) {
    while (s.current.time() < target) {
      if (s.steps >= opt.max_steps) throw std::runtime_error("step limit reached before the horizon");
      const double t = s.current.time();
      const SemidiscreteRhs rhs = semidiscrete_rhs(s.current, model, p, t);
      const double bound = stable_dt(s.current, model, p, t, opt.cfl, opt.dt_max);
      const double dt = detail::clip_to_target(bound, t, target);
      detail::apply_step(s, model, dt, rhs);
      if (dt == target - t) s.current = Field(s.current.grid(), s.current.values(), target);
      if (s.current.time() < target && opt.record_every > 0 && s.steps % opt.record_every == 0) s.record();
    }
    s.record();
  }
  return std::move(s.run);
}

/// Evolves two data in lockstep with a shared dt sequence, so each step
/// applies the same monotone map to both states.
inline std::pair<SolverRun, SolverRun> evolve_pair(const Field& u0, const Field& v0, const FluxModel& model,
                                                   double p, double T, const std::vector<double>& record_times,
                                                   const StepOptions& opt = {}) {
  if (!(u0.grid() == v0.grid())) throw std::invalid_argument("paired data must share a grid");
  auto targets = detail::checked_record_times(record_times, T);
  auto a = detail::start_run(u0, model, p, T, opt);
  auto b = detail::start_run(v0, model, p, T, opt);
  for (double target : targets) {
    while (a.current.time() < target) {
      if (a.steps >= opt.max_steps) throw std::runtime_error("step limit reached before the horizon");
      const double t = a.current.time();
      const SemidiscreteRhs ra = semidiscrete_rhs(a.current, model, p, t);
      const SemidiscreteRhs rb = semidiscrete_rhs(b.current, model, p, t);
      const double bound = std::min(stable_dt(a.current, model, p, t, opt.cfl, opt.dt_max),
                                    stable_dt(b.current, model, p, t, opt.cfl, opt.dt_max));
      const double dt = detail::clip_to_target(bound, t, target);
      detail::apply_step(a, model, dt, ra);
      detail::apply_step(b, model, dt, rb);
      if (dt == target - t) {
        a.current = Field(a.current.grid(), a.current.values(), target);
        b.current = Field(b.current.grid(), b.current.values(), target);
      } else {
        // both carry the same time stamp
        b.current = Field(b.current.grid(), b.current.values(), a.current.time());
      }
      if (a.current.time() < target && opt.record_every > 0 && a.steps % opt.record_every == 0) {
        a.record();
        b.record();
      }
    }
    a.record();
    b.record();
  }
  return {std::move(a.run), std::move(b.run)};
}

}  // namespace plap
