#pragma once

// Time averages, cutoff families, smoothed absolute value / Heaviside
// profiles, and the discrete residual of the Steklov-averaged weak form.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "plap/flux.hpp"
#include "plap/grid.hpp"
#include "plap/operator.hpp"
#include "plap/stepper.hpp"

namespace plap {

// ---------------------------------------------------------------------------
// Time series

namespace detail {

inline void axpy(double& acc, double w, double v) { acc += w * v; }

inline void axpy(std::vector<double>& acc, double w, const std::vector<double>& v) {
  if (acc.empty()) acc.assign(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) acc[i] += w * v[i];
}

inline double zero_like(double) { return 0.0; }
inline std::vector<double> zero_like(const std::vector<double>& v) { return std::vector<double>(v.size(), 0.0); }

inline void scale(double& v, double s) { v *= s; }
inline void scale(std::vector<double>& v, double s) {
  for (double& x : v) x *= s;
}

}  // namespace detail

/// Samples of v on I = [times.front(), times.back()], extended by zero outside I.
/// Value is double or std::vector<double> (one entry per cell).
template <class Value>
struct TimeSeries {
  std::vector<double> times;
  std::vector<Value> values;

  TimeSeries() = default;
  TimeSeries(std::vector<double> t, std::vector<Value> v) : times(std::move(t)), values(std::move(v)) {
    if (times.empty() || times.size() != values.size()) {
      throw std::invalid_argument("time series needs matching, nonempty times and values");
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
      if (!(times[k] > times[k - 1])) throw std::invalid_argument("time series times must be strictly increasing");
    }
  }

  double start() const { return times.front(); }
  double end() const { return times.back(); }
  bool contains(double t) const { return t >= start() && t <= end(); }

  /// Linear interpolation inside I; zero outside.
  Value at(double t) const {
    Value out = detail::zero_like(values.front());
    if (!contains(t)) return out;
    if (times.size() == 1) return values.front();
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t k = it == times.end() ? times.size() - 1 : static_cast<std::size_t>(it - times.begin());
    if (k == 0) k = 1;
    const double t0 = times[k - 1];
    const double t1 = times[k];
    const double w = (t - t0) / (t1 - t0);
    detail::axpy(out, 1.0 - w, values[k - 1]);
    detail::axpy(out, w, values[k]);
    return out;
  }
};

/// (1/h) * integral over [t, t+h] of the zero-extended piecewise-linear series,
/// i.e. the trapezoid rule on the sample grid clipped to the window.
template <class Value>
Value steklov_average(const TimeSeries<Value>& series, double h, double t) {
  if (!(h > 0.0)) throw std::invalid_argument("Steklov window must be positive");
  Value acc = detail::zero_like(series.values.front());
  const double a = std::max(t, series.start());
  const double b = std::min(t + h, series.end());
  if (a < b) {
    std::vector<double> knots{a};
    for (double s : series.times) {
      if (s > a && s < b) knots.push_back(s);
    }
    knots.push_back(b);
    Value left = series.at(knots.front());
    for (std::size_t k = 1; k < knots.size(); ++k) {
      Value right = series.at(knots[k]);
      const double w = 0.5 * (knots[k] - knots[k - 1]);
      detail::axpy(acc, w, left);
      detail::axpy(acc, w, right);
      left = std::move(right);
    }
  }
  detail::scale(acc, 1.0 / h);
  return acc;
}

/// [v(t+h) - v(t)] / h with linear interpolation; the window must stay in I.
template <class Value>
Value steklov_derivative(const TimeSeries<Value>& series, double h, double t) {
  if (!(h > 0.0)) throw std::invalid_argument("Steklov window must be positive");
  if (!series.contains(t) || !series.contains(t + h)) {
    throw std::out_of_range("difference-quotient window leaves the series interval");
  }
  Value out = series.at(t + h);
  detail::axpy(out, -1.0, series.at(t));
  detail::scale(out, 1.0 / h);
  return out;
}

/// The snapshots of a run as a series of cell vectors.
inline TimeSeries<std::vector<double>> as_series(const SolverRun& run) {
  std::vector<double> t;
  std::vector<std::vector<double>> v;
  for (const auto& s : run.snapshots) {
    if (!t.empty() && !(s.time() > t.back())) continue;
    t.push_back(s.time());
    v.push_back(s.values());
  }
  return {std::move(t), std::move(v)};
}

// ---------------------------------------------------------------------------
// Cutoffs

/// Value and gradient of a spatial weight at one point.
struct CutoffSample {
  double value = 0.0;
  Vec gradient{};
};

inline double point_norm(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return std::sqrt(s);
}

namespace detail {
inline CutoffSample radial(double value, double radial_slope, std::span<const double> x, double r) {
  CutoffSample out;
  out.value = value;
  if (r > 0.0 && radial_slope != 0.0) {
    for (std::size_t i = 0; i < x.size() && i < 2; ++i) out.gradient[i] = radial_slope * x[i] / r;
  }
  return out;
}
}  // namespace detail

/// zeta(x) = (exp(-eps sqrt(1+|x|^2)) - exp(-eps sqrt(1+R^2)))^p inside |x| < R, 0 outside.
inline CutoffSample cutoff_exp(double R, double eps, double p, std::span<const double> x) {
  if (!(R > 0.0) || !(eps > 0.0)) throw std::invalid_argument("cutoff_exp needs R > 0 and eps > 0");
  require_p(p);
  const double r = point_norm(x);
  if (r >= R) return {};
  const double rho = std::sqrt(1.0 + r * r);
  const double inner = std::exp(-eps * rho);
  const double base = inner - std::exp(-eps * std::sqrt(1.0 + R * R));
  const double value = std::pow(base, p);
  // d/dr base = -eps * inner * r / rho
  const double slope = p * std::pow(base, p - 1.0) * (-eps * inner * r / rho);
  return detail::radial(value, slope, x, r);
}

/// Right-hand side of |grad zeta|^p / zeta^(p-1) <= (p eps)^p exp(-p eps sqrt(1+|x|^2)).
inline double cutoff_exp_bound(double eps, double p, std::span<const double> x) {
  const double r = point_norm(x);
  return std::pow(p * eps, p) * std::exp(-p * eps * std::sqrt(1.0 + r * r));
}

/// 3s^2 - 2s^3 on [0, 1], clamped outside.
inline double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * (3.0 - 2.0 * s);
}

inline double smoothstep_slope(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 6.0 * s * (1.0 - s);
}

/// Gradient constant C in |grad zeta| <= C/R (inner ramp) and <= C/S (outer ramp).
inline constexpr double kPlateauGradientConstant = 4.0;

/// Annular plateau: 0 for |x| < R/2, smoothstep up to 1 at |x| = R, 1 up to
/// R + S, smoothstep down to 0 at R + 2S.
inline CutoffSample cutoff_plateau(double R, double S, std::span<const double> x) {
  if (!(R > 0.0) || !(S > 0.0)) throw std::invalid_argument("cutoff_plateau needs R > 0 and S > 0");
  const double r = point_norm(x);
  if (r <= 0.5 * R || r >= R + 2.0 * S) return {};
  if (r < R) {
    const double w = 0.5 * R;
    const double s = (r - w) / w;
    return detail::radial(smoothstep(s), smoothstep_slope(s) / w, x, r);
  }
  if (r <= R + S) return detail::radial(1.0, 0.0, x, r);
  const double s = (r - R - S) / S;
  return detail::radial(1.0 - smoothstep(s), -smoothstep_slope(s) / S, x, r);
}

// ---------------------------------------------------------------------------
// Smoothed absolute value and Heaviside

struct SmoothAbs {
  double value = 0.0;       // L_delta(u)
  double derivative = 0.0;  // S(u / delta)
  double curvature = 0.0;   // S'(u / delta) / delta
};

/// sup |L_delta(u) - |u|| = kSmoothAbsConstant * delta for the cubic S profile.
inline constexpr double kSmoothAbsConstant = 3.0 / 8.0;

/// L_delta(u) = delta L(u/delta), L(u) = integral_0^u S, with
/// S(v) = v(3 - v^2)/2 on [-1, 1] and S = sign(v) outside.
inline SmoothAbs smooth_abs(double delta, double u) {
  if (!(delta > 0.0)) throw std::invalid_argument("smoothing width delta must be positive");
  const double w = u / delta;
  const double a = std::abs(w);
  SmoothAbs out;
  if (a >= 1.0) {
    out.value = delta * (a - 3.0 / 8.0);
    out.derivative = w > 0.0 ? 1.0 : -1.0;
    out.curvature = 0.0;
    return out;
  }
  const double w2 = w * w;
  out.value = delta * (0.75 * w2 - 0.125 * w2 * w2);
  out.derivative = 0.5 * w * (3.0 - w2);
  out.curvature = 1.5 * (1.0 - w2) / delta;
  return out;
}

struct SmoothHeaviside {
  double H = 0.0;  // H(xi / delta)
  double G = 0.0;  // integral_0^xi H_delta
};

/// Cubic smoothstep H on [0, 1] scaled by delta, with its closed-form primitive.
inline SmoothHeaviside smooth_heaviside(double delta, double xi) {
  if (!(delta > 0.0)) throw std::invalid_argument("smoothing width delta must be positive");
  const double s = xi / delta;
  if (s <= 0.0) return {0.0, 0.0};
  if (s >= 1.0) return {1.0, xi - 0.5 * delta};
  return {smoothstep(s), delta * (s * s * s - 0.5 * s * s * s * s)};
}

// ---------------------------------------------------------------------------
// Weak-form residual

/// Test function phi with analytic gradient, evaluated at a point of the box.
using TestFunction = std::function<CutoffSample(std::span<const double>)>;

struct WeakResidualTerms {
  double time_term = 0.0;       // sum u_{h,t} phi h^n
  double diffusion_term = 0.0;  // sum <[mu |grad u|^(p-2) grad u]_h, grad phi> h^n
  double convection_term = 0.0; // sum <[f + g]_h, grad phi> h^n
  double residual = 0.0;        // |time + diffusion - convection|
};

/// Discrete residual of the Steklov-averaged weak form at time t with window
/// h_window: the time term uses the difference quotient of the snapshots, the
/// flux terms their trapezoid averages over [t, t + h_window]. Gradients of phi
/// are analytic at face centers; convective fluxes use the face average of u.
inline WeakResidualTerms weak_form_terms(const SolverRun& run, const FluxModel& model, double p,
                                         const TestFunction& phi, double t, double h_window) {
  require_p(p);
  if (run.snapshots.empty()) throw std::invalid_argument("empty run");
  const auto series = as_series(run);
  if (!series.contains(t) || !series.contains(t + h_window) || !(h_window > 0.0)) {
    throw std::out_of_range("weak-form window lies outside the run");
  }
  const GridSpec& grid = run.grid;
  const double vol = grid.cell_volume();
  const double inv_h = 1.0 / grid.spacing();

  // face-wise integrand <flux, grad phi> for one state
  auto face_integrands = [&](const std::vector<double>& u, double time) {
    std::vector<double> diff_and_conv(2, 0.0);
    const double mu_t = model.mu(time);
    for_each_face(grid, [&](const FaceRef& f) {
      const double x[2] = {f.center[0], f.center[1]};
      const CutoffSample ph = phi(std::span<const double>(x, static_cast<std::size_t>(grid.dim())));
      const double dphi = ph.gradient[static_cast<std::size_t>(f.axis)];
      if (dphi == 0.0) return;
      const double uL = side_value(u, f.left);
      const double uR = side_value(u, f.right);
      diff_and_conv[0] += mu_t * p_flux((uR - uL) * inv_h, p) * dphi;
      if (model.has_convection) {
        diff_and_conv[1] += model.total_flux(f.center, time, 0.5 * (uL + uR))[static_cast<std::size_t>(f.axis)] * dphi;
      }
    });
    return diff_and_conv;
  };

  // time series of the two face integrals over the window (trapezoid knots)
  std::vector<double> knots{t};
  for (double s : series.times) {
    if (s > t && s < t + h_window) knots.push_back(s);
  }
  knots.push_back(t + h_window);
  std::vector<std::vector<double>> integrands;
  integrands.reserve(knots.size());
  for (double s : knots) integrands.push_back(face_integrands(series.at(s), s));
  const TimeSeries<std::vector<double>> flux_series(knots, integrands);
  const auto averaged = steklov_average(flux_series, h_window, t);

  const auto dudt = steklov_derivative(series, h_window, t);
  WeakResidualTerms out;
  for (std::size_t c = 0; c < dudt.size(); ++c) {
    const Vec xc = grid.center(c);
    const double x[2] = {xc[0], xc[1]};
    const double ph = phi(std::span<const double>(x, static_cast<std::size_t>(grid.dim()))).value;
    out.time_term += dudt[c] * ph;
  }
  out.time_term *= vol;
  out.diffusion_term = averaged[0] * vol;
  out.convection_term = averaged[1] * vol;
  out.residual = std::abs(out.time_term + out.diffusion_term - out.convection_term);
  return out;
}

inline double weak_form_residual(const SolverRun& run, const FluxModel& model, double p, const TestFunction& phi,
                                 double t, double h_window) {
  return weak_form_terms(run, model, p, phi, t, h_window).residual;
}

}  // namespace plap
