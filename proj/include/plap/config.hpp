#pragma once

// Experiment configuration: flat `key = value` lines with dotted keys,
// `#` starts a comment. Unknown keys are errors.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "plap/flux.hpp"
#include "plap/grid.hpp"
#include "plap/stepper.hpp"

namespace plap {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatumSpec {
  std::string type = "gaussian";  // gaussian | bump | step | twin-bump | file
  double amplitude = 1.0;
  Vec center{};
  double width = 0.1;
  double separation = 0.2;  // twin-bump: distance between the two centers
  double radius = 0.0;      // gaussian cut radius; 0 picks the largest that fits the inner half-box
  double noise = 0.0;       // relative seeded perturbation of nonzero values
  std::string file;
};

struct Tolerances {
  double mass = 1e-10;
  double l1 = 1e-12;
  double contraction = 1e-12;
  double comparison = 1e-12;
  double continuity_ratio = 1e-2;
  double energy_c1 = 2e4;
  double energy_c2 = 0.0;
  double energy_q = 4.0;
  double gradient_factor = 1.05;
};

struct ExperimentConfig {
  int n = 1;
  double L = 1.0;
  int N = 100;

  std::string model = "pure_diffusion";  // prototype | pure_diffusion
  Vec b_const{};
  Vec c_const{};
  double kappa = 0.0;
  double gamma = 0.0;
  double mu = 1.0;

  double p = 3.0;
  double T = 0.1;
  std::vector<double> record_times;
  std::size_t record_every = 0;
  double cfl = 0.4;
  double dt_max = kInfinity;
  double leak_tol = 1e-8;

  Tolerances tol;
  DatumSpec datum;
  std::string output_dir = "out";
  std::uint64_t seed = 0;

  GridSpec grid() const { return GridSpec::build(n, L, N); }

  FluxModel flux_model() const {
    if (model == "pure_diffusion") return pure_diffusion(mu);
    if (model == "prototype") return prototype_flux(b_const, c_const, kappa, gamma, mu, n);
    throw ConfigError("unknown flux.model '" + model + "'");
  }

  StepOptions step_options() const {
    StepOptions o;
    o.cfl = cfl;
    o.dt_max = dt_max;
    o.leak_tol = leak_tol;
    o.record_every = record_every;
    return o;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& text) {
  if (text == "inf" || text == "infinity") return kInfinity;
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw ConfigError("key '" + key + "': '" + text + "' is not a finite number");
  }
  return v;
}

inline long long parse_int(const std::string& key, const std::string& text) {
  long long v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ConfigError("key '" + key + "': '" + text + "' is not an integer");
  return v;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) throw ConfigError("key '" + key + "': empty list entry");
    out.push_back(parse_double(key, t));
  }
  return out;
}

/// A scalar broadcasts to a constant vector along the first axis.
inline Vec parse_vec(const std::string& key, const std::string& text) {
  const auto v = parse_list(key, text);
  if (v.empty() || v.size() > 2) throw ConfigError("key '" + key + "' takes one or two numbers");
  return {v[0], v.size() > 1 ? v[1] : 0.0};
}

}  // namespace detail

/// Parsed key/value pairs in file order.
struct ConfigEntries {
  std::vector<std::pair<std::string, std::string>> items;
};

inline ConfigEntries read_config_entries(std::istream& in) {
  ConfigEntries out;
  std::string line;
  int lineno = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(std::string_view(t).substr(0, eq));
    std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
    if (seen.count(key)) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "' (first on line " +
                        std::to_string(seen[key]) + ")");
    }
    seen[key] = lineno;
    out.items.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

inline void validate(const ExperimentConfig& c) {
  try {
    (void)c.grid();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(c.p > 2.0)) throw ConfigError("run.p must exceed 2");
  if (!(c.T >= 0.0)) throw ConfigError("run.T must be nonnegative");
  if (!(c.cfl > 0.0 && c.cfl <= 1.0)) throw ConfigError("run.cfl must lie in (0, 1]");
  if (!(c.dt_max > 0.0)) throw ConfigError("run.dt_max must be positive");
  if (!(c.leak_tol >= 0.0)) throw ConfigError("run.leak_tol must be nonnegative");
  if (!(c.mu > 0.0)) throw ConfigError("flux.mu must be positive");
  if (c.kappa < 0.0 || c.gamma < 0.0) throw ConfigError("flux.kappa and flux.gamma must be nonnegative");
  for (double r : c.record_times) {
    if (!(r >= 0.0 && r <= c.T)) throw ConfigError("run.record_times must lie in [0, run.T]");
  }
  if (c.model != "prototype" && c.model != "pure_diffusion") {
    throw ConfigError("unknown flux.model '" + c.model + "' (known: prototype, pure_diffusion)");
  }
  static const char* kDatums[] = {"gaussian", "bump", "step", "twin-bump", "file"};
  if (std::find(std::begin(kDatums), std::end(kDatums), c.datum.type) == std::end(kDatums)) {
    throw ConfigError("unknown datum.type '" + c.datum.type + "'");
  }
  if (c.datum.type == "file" && c.datum.file.empty()) throw ConfigError("datum.type = file needs datum.file");
  if (c.datum.type != "file" && !(c.datum.width > 0.0)) throw ConfigError("datum.width must be positive");
  if (!(c.datum.noise >= 0.0 && c.datum.noise < 1.0)) throw ConfigError("datum.noise must lie in [0, 1)");
  if (!(c.tol.energy_q >= 2.0)) throw ConfigError("tol.energy_q must be >= 2");
}

inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  for (const auto& [key, value] : read_config_entries(in).items) {
    using namespace detail;
    auto num = [&] { return parse_double(key, value); };
    if (key == "grid.n") c.n = static_cast<int>(parse_int(key, value));
    else if (key == "grid.L") c.L = num();
    else if (key == "grid.N") c.N = static_cast<int>(parse_int(key, value));
    else if (key == "flux.model") c.model = value;
    else if (key == "flux.b_const") c.b_const = parse_vec(key, value);
    else if (key == "flux.c_const") c.c_const = parse_vec(key, value);
    else if (key == "flux.kappa") c.kappa = num();
    else if (key == "flux.gamma") c.gamma = num();
    else if (key == "flux.mu") c.mu = num();
    else if (key == "run.p") c.p = num();
    else if (key == "run.T") c.T = num();
    else if (key == "run.record_times") c.record_times = parse_list(key, value);
    else if (key == "run.record_every") {
      const auto v = parse_int(key, value);
      if (v < 0) throw ConfigError("run.record_every must be nonnegative");
      c.record_every = static_cast<std::size_t>(v);
    }
    else if (key == "run.cfl") c.cfl = num();
    else if (key == "run.dt_max") c.dt_max = num();
    else if (key == "run.leak_tol") c.leak_tol = num();
    else if (key == "tol.mass") c.tol.mass = num();
    else if (key == "tol.l1") c.tol.l1 = num();
    else if (key == "tol.contraction") c.tol.contraction = num();
    else if (key == "tol.comparison") c.tol.comparison = num();
    else if (key == "tol.continuity_ratio") c.tol.continuity_ratio = num();
    else if (key == "tol.energy_c1") c.tol.energy_c1 = num();
    else if (key == "tol.energy_c2") c.tol.energy_c2 = num();
    else if (key == "tol.energy_q") c.tol.energy_q = num();
    else if (key == "tol.gradient_factor") c.tol.gradient_factor = num();
    else if (key == "datum.type") c.datum.type = value;
    else if (key == "datum.amplitude") c.datum.amplitude = num();
    else if (key == "datum.center") c.datum.center = parse_vec(key, value);
    else if (key == "datum.width") c.datum.width = num();
    else if (key == "datum.separation") c.datum.separation = num();
    else if (key == "datum.radius") c.datum.radius = num();
    else if (key == "datum.noise") c.datum.noise = num();
    else if (key == "datum.file") c.datum.file = value;
    else if (key == "output.dir") c.output_dir = value;
    else if (key == "seed") {
      const auto v = parse_int(key, value);
      if (v < 0) throw ConfigError("seed must be nonnegative");
      c.seed = static_cast<std::uint64_t>(v);
    }
    else throw ConfigError("unknown key '" + key + "'");
  }
  validate(c);
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in);
}

namespace detail {

inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::string format_vec(const Vec& v) { return format_number(v[0]) + "," + format_number(v[1]); }

}  // namespace detail

/// Canonical text form; parse_config(to_text(c)) reproduces c.
inline std::string to_text(const ExperimentConfig& c) {
  using detail::format_number;
  using detail::format_vec;
  std::ostringstream o;
  o << "grid.n = " << c.n << "\n"
    << "grid.L = " << format_number(c.L) << "\n"
    << "grid.N = " << c.N << "\n"
    << "flux.model = " << c.model << "\n"
    << "flux.b_const = " << format_vec(c.b_const) << "\n"
    << "flux.c_const = " << format_vec(c.c_const) << "\n"
    << "flux.kappa = " << format_number(c.kappa) << "\n"
    << "flux.gamma = " << format_number(c.gamma) << "\n"
    << "flux.mu = " << format_number(c.mu) << "\n"
    << "run.p = " << format_number(c.p) << "\n"
    << "run.T = " << format_number(c.T) << "\n";
  if (!c.record_times.empty()) {
    o << "run.record_times = ";
    for (std::size_t k = 0; k < c.record_times.size(); ++k) {
      o << (k ? "," : "") << format_number(c.record_times[k]);
    }
    o << "\n";
  }
  o << "run.record_every = " << c.record_every << "\n"
    << "run.cfl = " << format_number(c.cfl) << "\n"
    << "run.dt_max = " << format_number(c.dt_max) << "\n"
    << "run.leak_tol = " << format_number(c.leak_tol) << "\n"
    << "tol.mass = " << format_number(c.tol.mass) << "\n"
    << "tol.l1 = " << format_number(c.tol.l1) << "\n"
    << "tol.contraction = " << format_number(c.tol.contraction) << "\n"
    << "tol.comparison = " << format_number(c.tol.comparison) << "\n"
    << "tol.continuity_ratio = " << format_number(c.tol.continuity_ratio) << "\n"
    << "tol.energy_c1 = " << format_number(c.tol.energy_c1) << "\n"
    << "tol.energy_c2 = " << format_number(c.tol.energy_c2) << "\n"
    << "tol.energy_q = " << format_number(c.tol.energy_q) << "\n"
    << "tol.gradient_factor = " << format_number(c.tol.gradient_factor) << "\n"
    << "datum.type = " << c.datum.type << "\n"
    << "datum.amplitude = " << format_number(c.datum.amplitude) << "\n"
    << "datum.center = " << format_vec(c.datum.center) << "\n"
    << "datum.width = " << format_number(c.datum.width) << "\n"
    << "datum.separation = " << format_number(c.datum.separation) << "\n"
    << "datum.radius = " << format_number(c.datum.radius) << "\n"
    << "datum.noise = " << format_number(c.datum.noise) << "\n";
  if (!c.datum.file.empty()) o << "datum.file = " << c.datum.file << "\n";
  o << "output.dir = " << c.output_dir << "\n"
    << "seed = " << c.seed << "\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// Initial data

namespace detail {

inline double distance(const Vec& x, const Vec& c, int dim) {
  const double dx = x[0] - c[0];
  const double dy = dim == 2 ? x[1] - c[1] : 0.0;
  return std::sqrt(dx * dx + dy * dy);
}

/// (1 - (r/w)^2)_+^2, a C^1 bump of radius w.
inline double bump_profile(double r, double w) {
  const double s = 1.0 - (r / w) * (r / w);
  return s > 0.0 ? s * s : 0.0;
}

inline double inner_room(const Vec& c, const GridSpec& grid) {
  const double lim = 0.5 * grid.half_width();
  double room = lim - std::abs(c[0]);
  if (grid.dim() == 2) room = std::min(room, lim - std::abs(c[1]));
  return room;
}

}  // namespace detail

/// Analytic (non-file) initial datum on a grid; seeded noise multiplies
/// nonzero values by 1 + noise * U(-1, 1).
inline Field make_datum(const DatumSpec& d, const GridSpec& grid, std::uint64_t seed = 0) {
  const int dim = grid.dim();
  const double A = d.amplitude;
  std::function<double(const Vec&)> fn;
  if (d.type == "gaussian") {
    const double R = d.radius > 0.0 ? d.radius : detail::inner_room(d.center, grid);
    if (!(R > 0.0)) throw ConfigError("gaussian center leaves no room inside the inner half-box");
    const double floor = std::exp(-R * R / (2.0 * d.width * d.width));
    fn = [=](const Vec& x) {
      const double r = detail::distance(x, d.center, dim);
      if (r >= R) return 0.0;
      return A * (std::exp(-r * r / (2.0 * d.width * d.width)) - floor);
    };
  } else if (d.type == "bump") {
    fn = [=](const Vec& x) { return A * detail::bump_profile(detail::distance(x, d.center, dim), d.width); };
  } else if (d.type == "step") {
    fn = [=](const Vec& x) {
      const bool in = std::abs(x[0] - d.center[0]) <= d.width && (dim == 1 || std::abs(x[1] - d.center[1]) <= d.width);
      return in ? A : 0.0;
    };
  } else if (d.type == "twin-bump") {
    const Vec left{d.center[0] - 0.5 * d.separation, d.center[1]};
    const Vec right{d.center[0] + 0.5 * d.separation, d.center[1]};
    fn = [=](const Vec& x) {
      return A * (detail::bump_profile(detail::distance(x, left, dim), d.width) -
                  detail::bump_profile(detail::distance(x, right, dim), d.width));
    };
  } else {
    throw ConfigError("datum type '" + d.type + "' is not generated analytically");
  }
  std::vector<double> v(grid.cell_count());
  for (std::size_t c = 0; c < v.size(); ++c) v[c] = fn(grid.center(c));
  if (d.noise > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (double& x : v) {
      const double r = unit(rng);
      if (x != 0.0) x *= 1.0 + d.noise * r;
    }
  }
  return Field(grid, std::move(v), 0.0);
}

}  // namespace plap
