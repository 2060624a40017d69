#pragma once

// Flux models f(x,t,u), g(t,u), mu(t) and sampling validators for their
// structural hypotheses: the growth bound on f, the small-|u| bounds on g,
// the Hoelder bounds on f and g, and the derivative bounds on f_u and g_u.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plap/grid.hpp"

namespace plap {

/// Arguments of a declared constant: amplitude bound M, horizon T, diffusion
/// exponent p and the small-|u| threshold used by the g conditions.
struct ConstantArgs {
  double M = 1.0;
  double T = 1.0;
  double p = 3.0;
  double u_small = 0.1;
};

/// Model-declared constant; an empty function means "not declared".
using DeclaredConstant = std::function<double(const ConstantArgs&)>;

struct DeclaredConstants {
  DeclaredConstant K_f;      // |f(u) - f(v)| <= K_f |u - v|^(1 - 1/p)
  DeclaredConstant K_g;      // |g(u) - g(v)| <= K_g |u - v|^(1 - 1/p)
  DeclaredConstant F_u;      // |f_u(u)| <= F_u |u|^kappa
  DeclaredConstant G_u;      // |g_u(u)| <= G_u |u|^gamma
  DeclaredConstant C_small;  // |g(u)| <= C |u|^(1 - 1/p) for |u| <= u_small
  DeclaredConstant C_linear; // |g(u)| <= C |u| for |u| <= u_small
};

struct FluxModel {
  std::string name;
  std::function<Vec(const Vec& x, double t, double u)> f;
  std::function<Vec(const Vec& x, double t, double u)> f_u;
  std::function<Vec(double t, double u)> g;
  std::function<Vec(double t, double u)> g_u;
  std::function<double(double t)> mu;
  std::function<double(double t)> F;  // growth modulus of f
  double kappa = 0.0;
  double gamma = 0.0;
  DeclaredConstants declared;
  /// False when f and g vanish identically; lets the operator skip convection.
  bool has_convection = true;

  /// f + g, the total convective flux.
  Vec total_flux(const Vec& x, double t, double u) const {
    const Vec a = f(x, t, u);
    const Vec b = g(t, u);
    return {a[0] + b[0], a[1] + b[1]};
  }
};

inline double euclid(const Vec& v, int dim) {
  return dim == 1 ? std::abs(v[0]) : std::hypot(v[0], v[1]);
}

/// Coefficients for the prototype f = b(x,t)|u|^kappa u, g = c(t)|u|^gamma u.
struct PrototypeCoefficients {
  std::function<Vec(const Vec& x, double t)> b;
  /// sup over x of |b(x, t)|, which becomes F(t)
  std::function<double(double t)> b_sup;
  /// sup over [0, T] of b_sup, used for the declared constants
  std::function<double(double T)> b_bound;
  std::function<Vec(double t)> c;
  /// sup over [0, T] of |c(t)|
  std::function<double(double T)> c_bound;
  std::function<double(double t)> mu;
  double kappa = 0.0;
  double gamma = 0.0;
};

inline double signed_power(double u, double exponent) {
  // |u|^exponent u
  return exponent == 0.0 ? u : (exponent == 1.0 ? std::abs(u) * u : std::pow(std::abs(u), exponent) * u);
}

inline FluxModel prototype_flux(PrototypeCoefficients coeffs) {
  if (!(coeffs.kappa >= 0.0) || !(coeffs.gamma >= 0.0)) {
    throw std::invalid_argument("prototype exponents kappa and gamma must be nonnegative");
  }
  if (!coeffs.b || !coeffs.b_sup || !coeffs.b_bound || !coeffs.c || !coeffs.c_bound || !coeffs.mu) {
    throw std::invalid_argument("prototype coefficients are incomplete");
  }
  const double kappa = coeffs.kappa;
  const double gamma = coeffs.gamma;
  auto b = coeffs.b;
  auto c = coeffs.c;
  auto b_bound = coeffs.b_bound;
  auto c_bound = coeffs.c_bound;

  FluxModel m;
  m.name = "prototype";
  m.kappa = kappa;
  m.gamma = gamma;
  m.mu = coeffs.mu;
  m.F = coeffs.b_sup;
  m.f = [b, kappa](const Vec& x, double t, double u) {
    const Vec bx = b(x, t);
    const double s = signed_power(u, kappa);
    return Vec{bx[0] * s, bx[1] * s};
  };
  m.f_u = [b, kappa](const Vec& x, double t, double u) {
    const Vec bx = b(x, t);
    const double d = (kappa + 1.0) * (kappa == 0.0 ? 1.0 : std::pow(std::abs(u), kappa));
    return Vec{bx[0] * d, bx[1] * d};
  };
  m.g = [c, gamma](double t, double u) {
    const Vec ct = c(t);
    const double s = signed_power(u, gamma);
    return Vec{ct[0] * s, ct[1] * s};
  };
  m.g_u = [c, gamma](double t, double u) {
    const Vec ct = c(t);
    const double d = (gamma + 1.0) * (gamma == 0.0 ? 1.0 : std::pow(std::abs(u), gamma));
    return Vec{ct[0] * d, ct[1] * d};
  };

  // |u|^k u is Lipschitz on [-M, M] with constant (k+1) M^k, and
  // |u - v| <= (2M)^(1/p) |u - v|^(1 - 1/p) there.
  m.declared.F_u = [b_bound, kappa](const ConstantArgs& a) { return (kappa + 1.0) * b_bound(a.T); };
  m.declared.G_u = [c_bound, gamma](const ConstantArgs& a) { return (gamma + 1.0) * c_bound(a.T); };
  m.declared.K_f = [b_bound, kappa](const ConstantArgs& a) {
    return b_bound(a.T) * (kappa + 1.0) * std::pow(a.M, kappa) * std::pow(2.0 * a.M, 1.0 / a.p);
  };
  m.declared.K_g = [c_bound, gamma](const ConstantArgs& a) {
    return c_bound(a.T) * (gamma + 1.0) * std::pow(a.M, gamma) * std::pow(2.0 * a.M, 1.0 / a.p);
  };
  m.declared.C_small = [c_bound, gamma](const ConstantArgs& a) {
    return c_bound(a.T) * std::pow(a.u_small, gamma + 1.0 / a.p);
  };
  m.declared.C_linear = [c_bound, gamma](const ConstantArgs& a) {
    return c_bound(a.T) * std::pow(a.u_small, gamma);
  };

  return m;
}

/// Prototype with constant vectors b and c and a constant mu.
inline FluxModel prototype_flux(const Vec& b, const Vec& c, double kappa, double gamma, double mu = 1.0,
                                int dim = 1) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  const double b_norm = euclid(b, dim);
  const double c_norm = euclid(c, dim);
  PrototypeCoefficients pc;
  pc.b = [b](const Vec&, double) { return b; };
  pc.b_sup = [b_norm](double) { return b_norm; };
  pc.b_bound = [b_norm](double) { return b_norm; };
  pc.c = [c](double) { return c; };
  pc.c_bound = [c_norm](double) { return c_norm; };
  pc.mu = [mu](double) { return mu; };
  pc.kappa = kappa;
  pc.gamma = gamma;
  FluxModel m = prototype_flux(std::move(pc));
  m.has_convection = b_norm > 0.0 || c_norm > 0.0;
  return m;
}

inline FluxModel pure_diffusion(double mu = 1.0) {
  FluxModel m = prototype_flux(Vec{0.0, 0.0}, Vec{0.0, 0.0}, 0.0, 0.0, mu);
  m.name = "pure_diffusion";
  m.has_convection = false;
  return m;
}

// ---------------------------------------------------------------------------
// Condition validators

struct Witness {
  Vec x{};
  double t = 0.0;
  double u = 0.0;
  std::optional<double> v;
};

struct ConditionReport {
  std::string id;  // "1.2", "2.6", "2.9", "3.1", "3.2", "3.3", "3.4"
  bool declared = true;
  std::size_t samples = 0;
  double worst_ratio = 0.0;
  Witness witness;

  static constexpr double kPassSlack = 1e-12;
  bool pass() const { return declared && worst_ratio <= 1.0 + kPassSlack; }
};

struct ValidationOptions {
  double M = 1.0;           // amplitude bound
  double T = 1.0;           // horizon
  double p = 3.0;           // diffusion exponent (Hoelder exponent 1 - 1/p)
  double L = 1.0;           // x sampled in [-L, L]^n
  int dim = 1;
  double u_small = 0.1;     // threshold standing in for |u| << 1
  std::size_t budget = 20000;
  std::size_t seed = 0;     // offset into the low-discrepancy sequence
};

namespace detail {

/// Radical inverse in the given prime base (Halton coordinate).
inline double radical_inverse(std::size_t index, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

inline constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13};

/// Point k of a Halton sequence in [0, 1)^d, d <= 6.
inline std::vector<double> halton(std::size_t k, std::size_t d) {
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = radical_inverse(k + 1, kPrimes[i]);
  return out;
}

inline double ratio(double measured, double bound) {
  if (bound > 0.0) return measured / bound;
  return measured == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

class Tracker {
 public:
  explicit Tracker(std::string id) { report_.id = std::move(id); }
  void offer(double measured, double bound, const Witness& w) {
    ++report_.samples;
    const double r = ratio(measured, bound);
    if (r > report_.worst_ratio || report_.samples == 1) {
      report_.worst_ratio = r;
      report_.witness = w;
    }
  }
  ConditionReport undeclared() {
    report_.declared = false;
    return report_;
  }
  ConditionReport done() { return report_; }

 private:
  ConditionReport report_;
};

/// Maps the unit cube to (x, t, u[, v]); u and v get the endpoints mixed in.
struct SamplePoint {
  Vec x{};
  double t = 0.0;
  double u = 0.0;
  double v = 0.0;
};

inline std::vector<SamplePoint> sample_points(const ValidationOptions& o, double u_range, bool pairs) {
  const std::size_t d = static_cast<std::size_t>(o.dim) + (pairs ? 3 : 2);
  std::vector<SamplePoint> pts;
  pts.reserve(o.budget + 8);
  for (std::size_t k = 0; k < o.budget; ++k) {
    const auto h = halton(k + o.seed, d);
    SamplePoint s;
    s.x[0] = o.L * (2.0 * h[0] - 1.0);
    if (o.dim == 2) s.x[1] = o.L * (2.0 * h[1] - 1.0);
    const std::size_t at = static_cast<std::size_t>(o.dim);
    s.t = o.T * h[at];
    s.u = u_range * (2.0 * h[at + 1] - 1.0);
    if (pairs) s.v = u_range * (2.0 * h[at + 2] - 1.0);
    pts.push_back(s);
  }
  // extremes of the amplitude range are where power-law bounds are tightest
  for (double u : {-u_range, u_range}) {
    for (double t : {0.0, o.T}) pts.push_back(SamplePoint{{}, t, u, pairs ? -u : 0.0});
  }
  return pts;
}

}  // namespace detail

/// Growth bound on f and the two small-|u| bounds on g; returns reports for
/// "1.2", "2.6" and "2.9" in that order.
inline std::vector<ConditionReport> validate_growth(const FluxModel& model, const ValidationOptions& o) {
  if (!(o.M > 0.0) || !(o.T > 0.0)) throw std::invalid_argument("validation needs M > 0 and T > 0");
  std::vector<ConditionReport> out;

  detail::Tracker growth("1.2");
  for (const auto& s : detail::sample_points(o, o.M, false)) {
    const double measured = euclid(model.f(s.x, s.t, s.u), o.dim);
    const double bound = model.F(s.t) * std::pow(std::abs(s.u), model.kappa + 1.0);
    growth.offer(measured, bound, Witness{s.x, s.t, s.u, std::nullopt});
  }
  out.push_back(growth.done());

  const ConstantArgs args{o.M, o.T, o.p, o.u_small};
  const double small = std::min(o.u_small, o.M);
  const auto small_pts = detail::sample_points(o, small, false);

  detail::Tracker sub("2.6");
  if (model.declared.C_small) {
    const double C = model.declared.C_small(args);
    for (const auto& s : small_pts) {
      const double measured = euclid(model.g(s.t, s.u), o.dim);
      sub.offer(measured, C * std::pow(std::abs(s.u), 1.0 - 1.0 / o.p), Witness{s.x, s.t, s.u, std::nullopt});
    }
    out.push_back(sub.done());
  } else {
    out.push_back(sub.undeclared());
  }

  detail::Tracker lin("2.9");
  if (model.declared.C_linear) {
    const double C = model.declared.C_linear(args);
    for (const auto& s : small_pts) {
      const double measured = euclid(model.g(s.t, s.u), o.dim);
      lin.offer(measured, C * std::abs(s.u), Witness{s.x, s.t, s.u, std::nullopt});
    }
    out.push_back(lin.done());
  } else {
    out.push_back(lin.undeclared());
  }
  return out;
}

/// Hoelder bounds "3.1", "3.2" on pairs (u, v) in [-M, M]^2 and derivative
/// bounds "3.3", "3.4", in that order.
inline std::vector<ConditionReport> validate_lipschitz(const FluxModel& model, const ValidationOptions& o) {
  if (!(o.M > 0.0) || !(o.T > 0.0)) throw std::invalid_argument("validation needs M > 0 and T > 0");
  const ConstantArgs args{o.M, o.T, o.p, o.u_small};
  const double expo = 1.0 - 1.0 / o.p;
  const auto pairs = detail::sample_points(o, o.M, true);
  std::vector<ConditionReport> out;

  detail::Tracker kf("3.1");
  if (model.declared.K_f) {
    const double K = model.declared.K_f(args);
    for (const auto& s : pairs) {
      const Vec a = model.f(s.x, s.t, s.u);
      const Vec b = model.f(s.x, s.t, s.v);
      kf.offer(euclid(Vec{a[0] - b[0], a[1] - b[1]}, o.dim), K * std::pow(std::abs(s.u - s.v), expo),
               Witness{s.x, s.t, s.u, s.v});
    }
    out.push_back(kf.done());
  } else {
    out.push_back(kf.undeclared());
  }

  detail::Tracker kg("3.2");
  if (model.declared.K_g) {
    const double K = model.declared.K_g(args);
    for (const auto& s : pairs) {
      const Vec a = model.g(s.t, s.u);
      const Vec b = model.g(s.t, s.v);
      kg.offer(euclid(Vec{a[0] - b[0], a[1] - b[1]}, o.dim), K * std::pow(std::abs(s.u - s.v), expo),
               Witness{s.x, s.t, s.u, s.v});
    }
    out.push_back(kg.done());
  } else {
    out.push_back(kg.undeclared());
  }

  detail::Tracker fu("3.3");
  if (model.declared.F_u && model.f_u) {
    const double Fu = model.declared.F_u(args);
    for (const auto& s : pairs) {
      fu.offer(euclid(model.f_u(s.x, s.t, s.u), o.dim), Fu * std::pow(std::abs(s.u), model.kappa),
               Witness{s.x, s.t, s.u, std::nullopt});
    }
    out.push_back(fu.done());
  } else {
    out.push_back(fu.undeclared());
  }

  detail::Tracker gu("3.4");
  if (model.declared.G_u && model.g_u) {
    const double Gu = model.declared.G_u(args);
    for (const auto& s : pairs) {
      gu.offer(euclid(model.g_u(s.t, s.u), o.dim), Gu * std::pow(std::abs(s.u), model.gamma),
               Witness{s.x, s.t, s.u, std::nullopt});
    }
    out.push_back(gu.done());
  } else {
    out.push_back(gu.undeclared());
  }
  return out;
}

}  // namespace plap
