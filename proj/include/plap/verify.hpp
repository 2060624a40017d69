#pragma once

// One check per analytical property, each a pure function of its run(s).
// Every tolerance a check uses is stored in the report it returns.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "plap/flux.hpp"
#include "plap/grid.hpp"
#include "plap/operator.hpp"
#include "plap/stepper.hpp"

namespace plap {

enum class Verdict { pass, fail, inapplicable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inapplicable: return "inapplicable";
  }
  return "fail";
}

struct TraceRow {
  double time = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double violation = 0.0;
};

struct PropertyReport {
  std::string id;
  Verdict verdict = Verdict::pass;
  double lhs = 0.0;
  double rhs = 0.0;
  double violation = 0.0;  // max(0, lhs - rhs), worst over the trace
  double tolerance = 0.0;
  std::vector<TraceRow> trace;  // one row per snapshot
  std::vector<double> refinement_trend;
  /// Property-specific measurements (name, value).
  std::vector<std::pair<std::string, double>> metrics;
  std::string note;

  bool passed() const { return verdict == Verdict::pass; }
  bool failed() const { return verdict == Verdict::fail; }

  std::optional<double> metric(const std::string& name) const {
    for (const auto& [k, v] : metrics) {
      if (k == name) return v;
    }
    return std::nullopt;
  }
};

namespace detail {

inline void finalize(PropertyReport& r) {
  r.violation = 0.0;
  for (const auto& row : r.trace) r.violation = std::max(r.violation, row.violation);
  r.verdict = r.violation <= r.tolerance ? Verdict::pass : Verdict::fail;
}

inline void require_paired(const SolverRun& a, const SolverRun& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("paired runs use different grids");
  if (a.snapshots.size() != b.snapshots.size()) throw std::invalid_argument("paired runs differ in snapshot count");
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    if (a.snapshots[k].time() != b.snapshots[k].time()) {
      throw std::invalid_argument("paired runs differ in snapshot times");
    }
  }
}

inline double l1_difference(const Field& u, const Field& v) {
  double s = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) s += std::abs(u[c] - v[c]);
  return s * u.grid().cell_volume();
}

/// ||(u - v)_+||_1 and ||(u - v)_-||_1 with theta_+ = (|theta| + theta)/2,
/// theta_- = (|theta| - theta)/2.
inline std::pair<double, double> l1_parts(const Field& u, const Field& v) {
  double pos = 0.0;
  double neg = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) {
    const double th = u[c] - v[c];
    const double a = std::abs(th);
    const double tp = 0.5 * (a + th);
    const double tm = 0.5 * (a - th);
    if (tp + tm != a || tp - tm != th) throw std::logic_error("positive/negative part identity broken");
    pos += tp;
    neg += tm;
  }
  const double vol = u.grid().cell_volume();
  return {pos * vol, neg * vol};
}

/// Trace of a sequence that must not increase, with per-snapshot rows.
inline PropertyReport nonincreasing(std::string id, const std::vector<double>& times,
                                    const std::vector<double>& values, double tol) {
  PropertyReport r;
  r.id = std::move(id);
  r.tolerance = tol;
  for (std::size_t k = 0; k < values.size(); ++k) {
    TraceRow row{times[k], values[k], k == 0 ? values[k] : values[k - 1], 0.0};
    if (k > 0) row.violation = std::max(0.0, values[k] - values[k - 1]);
    r.trace.push_back(row);
  }
  finalize(r);
  r.lhs = values.empty() ? 0.0 : values.back();
  r.rhs = values.empty() ? 0.0 : values.front();
  return r;
}

}  // namespace detail

/// |mass(t) - mass(0)| <= tol (1 + |mass(0)|) at every snapshot.
inline PropertyReport check_mass(const SolverRun& run, double tol = 1e-10) {
  PropertyReport r;
  r.id = "mass";
  r.tolerance = tol;
  const double m0 = mass(run.initial());
  const double scale = 1.0 + std::abs(m0);
  double worst = 0.0;
  for (const auto& s : run.snapshots) {
    const double drift = std::abs(mass(s) - m0) / scale;
    worst = std::max(worst, drift);
    r.trace.push_back({s.time(), drift, 0.0, drift});
  }
  detail::finalize(r);
  r.lhs = worst;
  r.rhs = 0.0;
  r.metrics = {{"initial_mass", m0},
               {"final_mass", mass(run.final())},
               {"max_relative_drift", m0 != 0.0 ? worst * scale / std::abs(m0) : worst},
               {"boundary_leak", run.boundary_leak}};
  return r;
}

/// ||u(t)||_1 nonincreasing between consecutive snapshots.
inline PropertyReport check_l1_monotone(const SolverRun& run, double tol = 1e-12) {
  std::vector<double> t;
  std::vector<double> l1;
  for (const auto& s : run.snapshots) {
    t.push_back(s.time());
    l1.push_back(lq_norm(s, 1.0));
  }
  auto r = detail::nonincreasing("l1_monotone", t, l1, tol);
  double largest_drop = 0.0;
  for (std::size_t k = 1; k < l1.size(); ++k) largest_drop = std::max(largest_drop, l1[k - 1] - l1[k]);
  r.metrics = {{"initial_l1", l1.front()}, {"final_l1", l1.back()}, {"largest_drop", largest_drop}};
  return r;
}

/// ||u(t_k) - u0||_1 shrinks as t_k decreases toward 0, and the value at the
/// earliest time is at most required_ratio times the value at the latest.
/// Uses the given times (matched exactly against snapshots), or every
/// positive snapshot time when none are given. Each selected snapshot's row
/// compares its distance with the next later selected one.
inline PropertyReport check_l1_continuity(const SolverRun& run, std::vector<double> times = {},
                                          double required_ratio = 1e-2, double tol = 1e-12) {
  PropertyReport r;
  r.id = "l1_continuity";
  r.tolerance = tol;
  const Field& u0 = run.initial();
  std::vector<std::size_t> picked;
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    const double t = run.snapshots[k].time();
    const bool wanted = times.empty() ? t > 0.0 : std::find(times.begin(), times.end(), t) != times.end();
    if (wanted) picked.push_back(k);
  }
  if (!times.empty() && picked.size() != times.size()) {
    throw std::invalid_argument("l1_continuity: requested times are not all snapshot times");
  }
  for (const auto& s : run.snapshots) {
    const double d = detail::l1_difference(s, u0);
    r.trace.push_back({s.time(), d, d, 0.0});
  }
  if (!picked.empty()) {
    for (std::size_t m = 0; m + 1 < picked.size(); ++m) {
      auto& row = r.trace[picked[m]];
      row.rhs = r.trace[picked[m + 1]].lhs;
    }
    const double earliest = r.trace[picked.front()].lhs;
    const double latest = r.trace[picked.back()].lhs;
    auto& first = r.trace[picked.front()];
    first.rhs = std::min(first.rhs, required_ratio * latest);
    for (auto& row : r.trace) row.violation = std::max(0.0, row.lhs - row.rhs);
    r.lhs = earliest;
    r.rhs = required_ratio * latest;
    r.metrics = {{"earliest_distance", earliest},
                 {"latest_distance", latest},
                 {"ratio", latest > 0.0 ? earliest / latest : 0.0},
                 {"required_ratio", required_ratio}};
  }
  detail::finalize(r);
  return r;
}

/// ||u - v||_1 nonincreasing snapshot to snapshot for two runs on shared times.
inline PropertyReport check_contraction(const SolverRun& a, const SolverRun& b, double tol = 1e-12) {
  detail::require_paired(a, b);
  std::vector<double> t;
  std::vector<double> d;
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    t.push_back(a.snapshots[k].time());
    d.push_back(detail::l1_difference(a.snapshots[k], b.snapshots[k]));
  }
  auto r = detail::nonincreasing("contraction", t, d, tol);
  // also against the initial difference
  double vs_initial = 0.0;
  for (double x : d) vs_initial = std::max(vs_initial, x - d.front());
  r.violation = std::max(r.violation, vs_initial);
  r.verdict = r.violation <= r.tolerance ? Verdict::pass : Verdict::fail;
  r.metrics = {{"initial_difference", d.front()}, {"final_difference", d.back()}};
  return r;
}

/// Both one-sided norms ||(u - v)_+||_1 and ||(u - v)_-||_1 nonincreasing.
inline PropertyReport check_parts_contraction(const SolverRun& a, const SolverRun& b, double tol = 1e-12) {
  detail::require_paired(a, b);
  std::vector<double> t;
  std::vector<double> pos;
  std::vector<double> neg;
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    const auto [p, n] = detail::l1_parts(a.snapshots[k], b.snapshots[k]);
    t.push_back(a.snapshots[k].time());
    pos.push_back(p);
    neg.push_back(n);
  }
  const auto rp = detail::nonincreasing("parts+", t, pos, tol);
  const auto rn = detail::nonincreasing("parts-", t, neg, tol);
  PropertyReport r;
  r.id = "parts";
  r.tolerance = tol;
  for (std::size_t k = 0; k < t.size(); ++k) {
    r.trace.push_back({t[k], pos[k], neg[k], std::max(rp.trace[k].violation, rn.trace[k].violation)});
  }
  detail::finalize(r);
  r.lhs = pos.back();
  r.rhs = neg.back();
  r.metrics = {{"positive_violation", rp.violation},
               {"negative_violation", rn.violation},
               {"initial_positive_part", pos.front()},
               {"initial_negative_part", neg.front()}};
  return r;
}

/// u0 <= v0 cellwise implies u <= v: min over cells and snapshots of v - u >= -tol.
/// Unordered initial data give Verdict::inapplicable.
inline PropertyReport check_comparison(const SolverRun& a, const SolverRun& b, double tol = 1e-12) {
  detail::require_paired(a, b);
  PropertyReport r;
  r.id = "comparison";
  r.tolerance = tol;
  const Field& u0 = a.initial();
  const Field& v0 = b.initial();
  for (std::size_t c = 0; c < u0.size(); ++c) {
    if (u0[c] > v0[c]) {
      r.verdict = Verdict::inapplicable;
      r.note = "initial data are not ordered";
      return r;
    }
  }
  double overall = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < u0.size(); ++c) m = std::min(m, b.snapshots[k][c] - a.snapshots[k][c]);
    overall = std::min(overall, m);
    r.trace.push_back({a.snapshots[k].time(), -m, 0.0, std::max(0.0, -m)});
  }
  detail::finalize(r);
  r.lhs = -overall;
  r.rhs = 0.0;
  r.metrics = {{"min_gap", overall}};
  return r;
}

/// Paired checks plus the implications between them:
/// parts => contraction, and zero initial positive part + parts => comparison.
struct PairedReports {
  PropertyReport contraction;
  PropertyReport parts;
  PropertyReport comparison;
  bool parts_implies_contraction = true;
  bool parts_implies_comparison = true;

  bool implications_hold() const { return parts_implies_contraction && parts_implies_comparison; }
};

inline PairedReports check_pair(const SolverRun& a, const SolverRun& b, double tol = 1e-12) {
  PairedReports out{check_contraction(a, b, tol), check_parts_contraction(a, b, tol), check_comparison(a, b, tol)};
  if (out.parts.passed()) {
    // ||theta||_1 = ||theta_+||_1 + ||theta_-||_1, so the increments add up to
    // rounding in the two summations
    const double scale = out.contraction.metric("initial_difference").value_or(0.0);
    const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + scale);
    const double bound = *out.parts.metric("positive_violation") + *out.parts.metric("negative_violation") + rounding;
    out.parts_implies_contraction = out.contraction.violation <= bound;
    if (*out.parts.metric("initial_positive_part") == 0.0) {
      out.parts_implies_comparison = out.comparison.verdict == Verdict::pass;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Energy inequalities

/// Per-interval discrete energy balance for ||u||_q^q, q >= 2:
///   [E(t_{k+1}) - E(t_k)] / dt_k + q(q-1) mu(t_k) D(u_k) <= q(q-1) F(t_k) C(u_k)
/// with, face by face,
///   D = sum s |g|^p h^n,      C = sum max(|uL|, |uR|)^(kappa+1) s |g| h^n,
/// where s is the secant mean of |u|^(q-2) across the face (1 for q = 2).
/// Violations are divided by ||u0||_q^q and must stay below
/// slack = c1 dt_k + c2 h on every interval.
struct EnergyOptions {
  double c1 = 2e4;
  double c2 = 0.0;
};

struct EnergyTerms {
  double energy = 0.0;       // ||u||_q^q
  double dissipation = 0.0;  // D
  double convection = 0.0;   // C
};

inline double secant_weight(double a, double b, double q) {
  if (q == 2.0) return 1.0;
  // (psi(b) - psi(a)) / ((q-1)(b - a)), psi(u) = |u|^(q-2) u
  if (a == b) return std::pow(std::abs(a), q - 2.0);
  const double psi_a = std::pow(std::abs(a), q - 2.0) * a;
  const double psi_b = std::pow(std::abs(b), q - 2.0) * b;
  return (psi_b - psi_a) / ((q - 1.0) * (b - a));
}

inline EnergyTerms energy_terms(const Field& field, const FluxModel& model, double p, double q) {
  const GridSpec& grid = field.grid();
  const auto& u = field.values();
  const double inv_h = 1.0 / grid.spacing();
  EnergyTerms e;
  e.energy = lq_power(u, grid, q);
  for_each_face(grid, [&](const FaceRef& f) {
    const double uL = side_value(u, f.left);
    const double uR = side_value(u, f.right);
    const double g = std::abs(uR - uL) * inv_h;
    if (g == 0.0) return;
    const double s = secant_weight(uL, uR, q);
    e.dissipation += s * std::pow(g, p);
    const double m = std::max(std::abs(uL), std::abs(uR));
    e.convection += std::pow(m, model.kappa + 1.0) * s * g;
  });
  e.dissipation *= grid.cell_volume();
  e.convection *= grid.cell_volume();
  return e;
}

inline PropertyReport check_energy(const SolverRun& run, const FluxModel& model, double p, double q,
                                   const EnergyOptions& opt = {}) {
  require_p(p);
  if (!(q >= 2.0)) throw std::invalid_argument("energy exponent q must be >= 2");
  PropertyReport r;
  r.id = q == 2.0 ? "energy_l2" : "energy_lq";
  const double e0 = lq_power(run.initial().values(), run.grid, q);
  const double norm = e0 > 0.0 ? e0 : 1.0;
  const double h = run.grid.spacing();
  const double qq = q * (q - 1.0);
  double worst_slack = 0.0;
  double lhs_at_worst = 0.0;
  double rhs_at_worst = 0.0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  bool ok = true;
  std::vector<EnergyTerms> terms;
  terms.reserve(run.snapshots.size());
  for (const auto& s : run.snapshots) terms.push_back(energy_terms(s, model, p, q));
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    if (k + 1 == run.snapshots.size()) {
      r.trace.push_back({run.snapshots[k].time(), 0.0, 0.0, 0.0});
      break;
    }
    const double t = run.snapshots[k].time();
    const double dt = run.snapshots[k + 1].time() - t;
    const double lhs = ((terms[k + 1].energy - terms[k].energy) / dt + qq * model.mu(t) * terms[k].dissipation) / norm;
    const double rhs = qq * model.F(t) * terms[k].convection / norm;
    const double violation = std::max(0.0, lhs - rhs);
    const double slack = opt.c1 * dt + opt.c2 * h;
    r.trace.push_back({t, lhs, rhs, violation});
    if (violation > slack) ok = false;
    worst_slack = std::max(worst_slack, slack);
    if (lhs - rhs > worst_excess) {
      worst_excess = lhs - rhs;
      lhs_at_worst = lhs;
      rhs_at_worst = rhs;
    }
  }
  r.violation = 0.0;
  for (const auto& row : r.trace) r.violation = std::max(r.violation, row.violation);
  r.tolerance = worst_slack;
  r.lhs = lhs_at_worst;
  r.rhs = rhs_at_worst;
  r.verdict = ok ? Verdict::pass : Verdict::fail;
  r.metrics = {{"q", q}, {"c1", opt.c1}, {"c2", opt.c2}, {"normalization", norm}};
  return r;
}

inline PropertyReport check_energy_l2(const SolverRun& run, const FluxModel& model, double p,
                                      const EnergyOptions& opt = {}) {
  return check_energy(run, model, p, 2.0, opt);
}

inline PropertyReport check_energy_lq(const SolverRun& run, const FluxModel& model, double p, double q,
                                      const EnergyOptions& opt = {}) {
  if (!(q > 2.0)) throw std::invalid_argument("check_energy_lq needs q > 2; use check_energy_l2 for q = 2");
  return check_energy(run, model, p, q, opt);
}

/// Worst violations across refinement levels (coarse first) and whether each
/// level shrinks the previous one by at least min_factor. A level whose
/// violation is exactly zero counts as shrinking.
struct RefinementTrend {
  std::vector<double> violations;
  std::vector<double> factors;
  bool shrinking = true;
};

inline RefinementTrend refinement_trend(const std::vector<PropertyReport>& levels, double min_factor) {
  RefinementTrend t;
  for (const auto& r : levels) t.violations.push_back(r.violation);
  for (std::size_t k = 1; k < t.violations.size(); ++k) {
    const double prev = t.violations[k - 1];
    const double cur = t.violations[k];
    const double f = cur > 0.0 ? prev / cur : std::numeric_limits<double>::infinity();
    t.factors.push_back(f);
    if (cur > 0.0 && f < min_factor) t.shrinking = false;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Gradient integrability bound

struct GradientBoundReport {
  double lhs = 0.0;  // ||u(T)||_2^2 + sum mu(t) grad_lp(u) dt
  double rhs = 0.0;  // Minf ||u0||_1 + sum w(t) ||u||_q'^q' dt
  double final_l2_squared = 0.0;
  double dissipation_integral = 0.0;
  double bound_datum_term = 0.0;
  double bound_flux_term = 0.0;
  double q_prime = 0.0;
  double factor = 1.05;
  bool pass = false;
};

/// w(t) = 2 F(t)^(p/(p-1)) mu(t)^(-1/(p-1)).
inline double gradient_bound_weight(double F, double mu, double p) {
  return 2.0 * std::pow(F, p / (p - 1.0)) * std::pow(mu, -1.0 / (p - 1.0));
}

/// q' = (1 + kappa) p / (p - 1).
inline double gradient_bound_exponent(double kappa, double p) { return (1.0 + kappa) * p / (p - 1.0); }

/// Time integrals use the left-endpoint rule over consecutive snapshots.
inline GradientBoundReport check_gradient_bound(const SolverRun& run, const FluxModel& model, double p,
                                                double factor = 1.05) {
  require_p(p);
  GradientBoundReport r;
  r.factor = factor;
  r.q_prime = gradient_bound_exponent(model.kappa, p);
  if (r.q_prime < 1.0) throw std::logic_error("q' must be >= 1");
  for (std::size_t k = 0; k + 1 < run.snapshots.size(); ++k) {
    const Field& s = run.snapshots[k];
    const double t = s.time();
    const double dt = run.snapshots[k + 1].time() - t;
    r.dissipation_integral += model.mu(t) * grad_lp_integral(s, p) * dt;
    const double w = gradient_bound_weight(model.F(t), model.mu(t), p);
    if (w > 0.0) r.bound_flux_term += w * lq_power(s.values(), s.grid(), r.q_prime) * dt;
  }
  r.final_l2_squared = lq_power(run.final().values(), run.grid, 2.0);
  r.bound_datum_term = run.bounds.Minf * lq_norm(run.initial(), 1.0);
  r.lhs = r.final_l2_squared + r.dissipation_integral;
  r.rhs = r.bound_datum_term + r.bound_flux_term;
  r.pass = r.lhs <= factor * r.rhs;
  return r;
}

}  // namespace plap
