#pragma once

// Finite-volume semidiscretization of
//   u_t + div f(x,t,u) + div g(t,u) = mu(t) div(|grad u|^(p-2) grad u)
// on the ghost-zero box. Diffusion uses the face-normal two-point gradient;
// convection uses a local Lax-Friedrichs flux. Both are written face by face
// so the cell sum telescopes to the boundary faces.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "plap/flux.hpp"
#include "plap/grid.hpp"

namespace plap {

/// Safety factor on the Lax-Friedrichs dissipation coefficient.
inline constexpr double kWaveSpeedSafety = 1.1;

inline void require_p(double p) {
  if (!(p > 2.0)) throw std::invalid_argument("diffusion exponent p must exceed 2");
}

/// |g|^(p-2) g for a scalar normal component; p must exceed 2.
inline double p_flux(double g, double p) {
  if (p == 3.0) return std::abs(g) * g;
  if (p == 4.0) return g * g * g;
  return g == 0.0 ? 0.0 : std::pow(std::abs(g), p - 2.0) * g;
}

/// d/dg of p_flux: (p-1)|g|^(p-2).
inline double p_flux_slope(double g, double p) {
  if (p == 3.0) return 2.0 * std::abs(g);
  if (p == 4.0) return 3.0 * g * g;
  return (p - 1.0) * std::pow(std::abs(g), p - 2.0);
}

/// |v|^(p-2) v for a vector of any fixed length.
template <std::size_t D>
std::array<double, D> p_flux_vector(const std::array<double, D>& v, double p) {
  require_p(p);
  double norm2 = 0.0;
  for (double c : v) norm2 += c * c;
  std::array<double, D> out{};
  if (norm2 == 0.0) return out;
  const double scale = std::pow(std::sqrt(norm2), p - 2.0);
  for (std::size_t i = 0; i < D; ++i) out[i] = scale * v[i];
  return out;
}

template <std::size_t D>
double dot(const std::array<double, D>& a, const std::array<double, D>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < D; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t D>
double norm(const std::array<double, D>& a) {
  return std::sqrt(dot(a, a));
}

struct MonotonicityGap {
  double lhs = 0.0;  // <a(xi, eta), xi - eta>
  double rhs = 0.0;  // 2^(1-p) |xi - eta|^p
  double flux_difference_norm = 0.0;  // |a(xi, eta)|
  double flux_difference_bound = 0.0; // |xi|^(p-1) + |eta|^(p-1)
};

/// Pointwise monotonicity of the p-flux, with
/// a(xi, eta) = |xi|^(p-2) xi - |eta|^(p-2) eta; the contract is lhs >= rhs >= 0
/// and |a| <= |xi|^(p-1) + |eta|^(p-1).
template <std::size_t D>
MonotonicityGap monotonicity_gap(const std::array<double, D>& xi, const std::array<double, D>& eta, double p) {
  require_p(p);
  const auto a = p_flux_vector(xi, p);
  const auto b = p_flux_vector(eta, p);
  std::array<double, D> diff{};
  std::array<double, D> theta{};
  for (std::size_t i = 0; i < D; ++i) {
    diff[i] = a[i] - b[i];
    theta[i] = xi[i] - eta[i];
  }
  MonotonicityGap out;
  out.lhs = dot(diff, theta);
  out.rhs = std::pow(2.0, 1.0 - p) * std::pow(norm(theta), p);
  out.flux_difference_norm = norm(diff);
  out.flux_difference_bound = std::pow(norm(xi), p - 1.0) + std::pow(norm(eta), p - 1.0);
  return out;
}

/// Dissipation coefficient of the Lax-Friedrichs flux on one face.
/// Uses the declared derivative bounds at m = max(|uL|, |uR|) when the model
/// has them, otherwise the larger normal derivative at the two states.
inline double face_wave_speed(const FluxModel& model, const FaceRef& face, double t, double uL, double uR,
                              double p) {
  if (!model.has_convection) return 0.0;
  const double m = std::max(std::abs(uL), std::abs(uR));
  if (model.declared.F_u && model.declared.G_u) {
    const ConstantArgs args{m, t, p, 0.1};
    const double fk = model.kappa == 0.0 ? 1.0 : std::pow(m, model.kappa);
    const double gk = model.gamma == 0.0 ? 1.0 : std::pow(m, model.gamma);
    return kWaveSpeedSafety * (model.declared.F_u(args) * fk + model.declared.G_u(args) * gk);
  }
  const auto normal = [&](double u) {
    const Vec a = model.f_u(face.center, t, u);
    const Vec b = model.g_u(t, u);
    return std::abs(a[static_cast<std::size_t>(face.axis)] + b[static_cast<std::size_t>(face.axis)]);
  };
  return kWaveSpeedSafety * std::max(normal(uL), normal(uR));
}

/// Local Lax-Friedrichs normal flux through one face.
inline double llf_flux(const FluxModel& model, const FaceRef& face, double t, double uL, double uR,
                       double lambda) {
  const std::size_t a = static_cast<std::size_t>(face.axis);
  const double fl = model.total_flux(face.center, t, uL)[a];
  const double fr = model.total_flux(face.center, t, uR)[a];
  return 0.5 * (fl + fr) - 0.5 * lambda * (uR - uL);
}

namespace detail {

/// Adds -(outflow - inflow)/h of a face flux to its two cells; returns the
/// contribution of a boundary face to the net inflow rate h^(n-1) * flux.
inline double scatter_face(std::vector<double>& out, const FaceRef& face, double flux, double inv_h,
                           double face_area) {
  if (face.left >= 0) out[static_cast<std::size_t>(face.left)] -= flux * inv_h;
  if (face.right >= 0) out[static_cast<std::size_t>(face.right)] += flux * inv_h;
  if (face.left < 0) return flux * face_area;
  if (face.right < 0) return -flux * face_area;
  return 0.0;
}

}  // namespace detail

/// Per-cell mu * div(|grad u|^(p-2) grad u); the optional out-parameter gets
/// the net inflow rate through the box boundary.
inline std::vector<double> plap_divergence(const Field& field, double p, double mu_t,
                                           double* boundary_rate = nullptr) {
  require_p(p);
  if (!(mu_t >= 0.0)) throw std::invalid_argument("mu_t must be nonnegative");
  const GridSpec& grid = field.grid();
  const auto& u = field.values();
  const double inv_h = 1.0 / grid.spacing();
  const double area = grid.face_area();
  std::vector<double> out(u.size(), 0.0);
  double inflow = 0.0;
  for_each_face(grid, [&](const FaceRef& f) {
    const double g = (side_value(u, f.right) - side_value(u, f.left)) * inv_h;
    // diffusive flux -mu |g|^(p-2) g in the +axis direction
    inflow += detail::scatter_face(out, f, -mu_t * p_flux(g, p), inv_h, area);
  });
  if (boundary_rate) *boundary_rate = inflow;
  return out;
}

/// Per-cell div(f + g) with the local Lax-Friedrichs flux; the optional
/// out-parameter gets the net outflow rate h^n * sum(div).
inline std::vector<double> convection_divergence(const Field& field, const FluxModel& model, double t,
                                                 double p = 3.0, double* boundary_outflow = nullptr,
                                                 double* max_wave_speed = nullptr) {
  const GridSpec& grid = field.grid();
  const auto& u = field.values();
  std::vector<double> out(u.size(), 0.0);
  double outflow = 0.0;
  double lam_max = 0.0;
  if (model.has_convection) {
    const double inv_h = 1.0 / grid.spacing();
    const double area = grid.face_area();
    for_each_face(grid, [&](const FaceRef& f) {
      const double uL = side_value(u, f.left);
      const double uR = side_value(u, f.right);
      const double lambda = face_wave_speed(model, f, t, uL, uR, p);
      lam_max = std::max(lam_max, lambda);
      // divergence, so the sign is flipped relative to the update
      outflow += detail::scatter_face(out, f, -llf_flux(model, f, t, uL, uR, lambda), inv_h, area);
    });
  }
  if (boundary_outflow) *boundary_outflow = outflow;
  if (max_wave_speed) *max_wave_speed = lam_max;
  return out;
}

struct SemidiscreteRhs {
  std::vector<double> total;       // du/dt per cell
  std::vector<double> diffusion;   // mu div(|grad u|^(p-2) grad u)
  std::vector<double> convection;  // div(f + g)
  /// Net rate of mass entering the box, assembled from boundary faces only;
  /// equals h^n * sum(total) up to rounding.
  double boundary_rate = 0.0;
  double max_wave_speed = 0.0;
};

/// total = diffusion - convection. mu(t) = 0 is accepted as a convection-only
/// diagnostic mode.
inline SemidiscreteRhs semidiscrete_rhs(const Field& field, const FluxModel& model, double p, double t) {
  require_p(p);
  const double mu_t = model.mu(t);
  if (!(mu_t >= 0.0)) throw std::invalid_argument("mu(t) must be nonnegative");
  SemidiscreteRhs rhs;
  double diff_in = 0.0;
  double conv_out = 0.0;
  rhs.diffusion = plap_divergence(field, p, mu_t, &diff_in);
  rhs.convection = convection_divergence(field, model, t, p, &conv_out, &rhs.max_wave_speed);
  rhs.total.resize(rhs.diffusion.size());
  for (std::size_t c = 0; c < rhs.total.size(); ++c) rhs.total[c] = rhs.diffusion[c] - rhs.convection[c];
  rhs.boundary_rate = diff_in - conv_out;
  return rhs;
}

}  // namespace plap
