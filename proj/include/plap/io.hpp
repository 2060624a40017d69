#pragma once

// Text formats: snapshot CSV, run manifest, property reports.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "plap/config.hpp"
#include "plap/grid.hpp"
#include "plap/stepper.hpp"
#include "plap/verify.hpp"

namespace plap {

namespace fs = std::filesystem;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// 17 significant digits, enough to read back the same double.
inline std::string digits17(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double read_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t == "inf") return kInfinity;
  if (t == "-inf") return -kInfinity;
  double v = 0.0;
  const char* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw FormatError(what + ": '" + t + "' is not a number");
  return v;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

inline std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Snapshot CSV
//
//   # n=1,N=400,L=2,t=0.10000000000000001
//   i,x,value                      (2D: i,j,x,y,value)
//   0,-0.99750000000000005,0

inline void write_field_csv(std::ostream& out, const Field& f) {
  using detail::digits17;
  const GridSpec& g = f.grid();
  out << "# n=" << g.dim() << ",N=" << g.cells_per_axis() << ",L=" << digits17(g.half_width())
      << ",t=" << digits17(f.time()) << "\n";
  out << (g.dim() == 1 ? "i,x,value\n" : "i,j,x,y,value\n");
  for (std::size_t c = 0; c < f.size(); ++c) {
    const auto [i, j] = g.cell_ij(c);
    const Vec x = g.center(c);
    if (g.dim() == 1) {
      out << i << "," << digits17(x[0]) << "," << digits17(f[c]) << "\n";
    } else {
      out << i << "," << j << "," << digits17(x[0]) << "," << digits17(x[1]) << "," << digits17(f[c]) << "\n";
    }
  }
}

inline void write_field_csv(const fs::path& path, const Field& f) {
  auto out = detail::open_out(path);
  write_field_csv(out, f);
}

inline Field read_field_csv(std::istream& in, const std::string& name = "field") {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw FormatError(name + ": missing '# n=..' header");
  std::map<std::string, std::string> head;
  for (const auto& kv : detail::split(line.substr(2), ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw FormatError(name + ": bad header entry '" + kv + "'");
    head[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  for (const char* k : {"n", "N", "L", "t"}) {
    if (!head.count(k)) throw FormatError(name + ": header lacks '" + std::string(k) + "'");
  }
  GridSpec grid;
  try {
    grid = GridSpec::build(static_cast<int>(detail::read_double(head["n"], name)),
                           detail::read_double(head["L"], name),
                           static_cast<int>(detail::read_double(head["N"], name)));
  } catch (const std::invalid_argument& e) {
    throw FormatError(name + ": " + e.what());
  }
  const double t = detail::read_double(head["t"], name);
  if (!std::getline(in, line)) throw FormatError(name + ": missing column header");
  const std::size_t cols = grid.dim() == 1 ? 3 : 5;
  std::vector<double> values(grid.cell_count(), 0.0);
  std::vector<bool> filled(values.size(), false);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto parts = detail::split(line, ',');
    if (parts.size() != cols) throw FormatError(name + ": row '" + line + "' has the wrong column count");
    const int i = static_cast<int>(detail::read_double(parts[0], name));
    const int j = grid.dim() == 2 ? static_cast<int>(detail::read_double(parts[1], name)) : 0;
    if (i < 0 || i >= grid.cells_per_axis() || j < 0 || j >= grid.cells_per_axis()) {
      throw FormatError(name + ": cell index out of range in '" + line + "'");
    }
    const std::size_t c = grid.index(i, j);
    if (filled[c]) throw FormatError(name + ": duplicate cell in '" + line + "'");
    filled[c] = true;
    values[c] = detail::read_double(parts.back(), name);
    ++rows;
  }
  if (rows != values.size()) {
    throw FormatError(name + ": expected " + std::to_string(values.size()) + " rows, got " + std::to_string(rows));
  }
  try {
    return Field(grid, std::move(values), t);
  } catch (const std::invalid_argument& e) {
    throw FormatError(name + ": " + e.what());
  }
}

inline Field read_field_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return read_field_csv(in, path.string());
}

/// Initial datum for a config, reading the file when datum.type = file.
inline Field initial_datum(const ExperimentConfig& c, const fs::path& base = {}) {
  const GridSpec grid = c.grid();
  if (c.datum.type != "file") return make_datum(c.datum, grid, c.seed);
  fs::path p(c.datum.file);
  if (p.is_relative() && !base.empty()) p = base / p;
  Field f = read_field_csv(p);
  if (!(f.grid() == grid)) throw ConfigError("datum.file grid does not match grid.*");
  return Field(grid, f.values(), 0.0);
}

// ---------------------------------------------------------------------------
// Run manifest
//
// Line-oriented `key = value`. The snapshot list is `snapshot = path, time, step`,
// one line per snapshot in order; the dt history lives in a side file.

struct Manifest {
  fs::path dir;
  ExperimentConfig config;
  SolverRun run;
};

inline void write_run(const fs::path& dir, const ExperimentConfig& config, const SolverRun& run) {
  using detail::digits17;
  fs::create_directories(dir);
  {
    auto out = detail::open_out(dir / "config.txt");
    out << to_text(config);
  }
  {
    auto out = detail::open_out(dir / "dt.csv");
    out << "step,dt\n";
    for (std::size_t k = 0; k < run.dt_history.size(); ++k) out << k << "," << digits17(run.dt_history[k]) << "\n";
  }
  auto out = detail::open_out(dir / "manifest.txt");
  out << "config = config.txt\n";
  out << "dt_history = dt.csv\n";
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%05zu.csv", k);
    write_field_csv(dir / name, run.snapshots[k]);
    out << "snapshot = " << name << ", " << digits17(run.snapshots[k].time()) << ", " << run.snapshot_steps[k]
        << "\n";
  }
  double dt_min = kInfinity;
  double dt_max = 0.0;
  double dt_sum = 0.0;
  for (double d : run.dt_history) {
    dt_min = std::min(dt_min, d);
    dt_max = std::max(dt_max, d);
    dt_sum += d;
  }
  const std::size_t steps = run.dt_history.size();
  out << "horizon = " << digits17(run.horizon) << "\n"
      << "steps = " << steps << "\n"
      << "dt.min = " << digits17(steps ? dt_min : 0.0) << "\n"
      << "dt.max = " << digits17(dt_max) << "\n"
      << "dt.mean = " << digits17(steps ? dt_sum / static_cast<double>(steps) : 0.0) << "\n"
      << "bounds.M1 = " << digits17(run.bounds.M1) << "\n"
      << "bounds.Minf = " << digits17(run.bounds.Minf) << "\n"
      << "bounds.G = " << digits17(run.bounds.G) << "\n"
      << "boundary_leak = " << digits17(run.boundary_leak) << "\n"
      << "net_inflow = " << digits17(run.net_inflow) << "\n"
      << "initial_mass = " << digits17(run.initial_mass) << "\n"
      << "initial_l1 = " << digits17(run.initial_l1) << "\n";
}

inline Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest '" + path.string() + "'");
  Manifest m;
  m.dir = path.parent_path();
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw FormatError(path.string() + ": bad line '" + t + "'");
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    if (key == "snapshot") {
      const auto parts = detail::split(value, ',');
      if (parts.size() != 3) throw FormatError(path.string() + ": bad snapshot line '" + t + "'");
      Field f = read_field_csv(m.dir / parts[0]);
      if (f.time() != detail::read_double(parts[1], "snapshot time")) {
        throw FormatError(path.string() + ": snapshot time mismatch for " + parts[0]);
      }
      m.run.snapshots.push_back(std::move(f));
      m.run.snapshot_steps.push_back(static_cast<std::size_t>(detail::read_double(parts[2], "snapshot step")));
    } else {
      kv[key] = value;
    }
  }
  if (m.run.snapshots.empty()) throw FormatError(path.string() + ": no snapshots");
  for (const char* k : {"config", "dt_history", "horizon", "bounds.M1", "bounds.Minf", "bounds.G", "boundary_leak"}) {
    if (!kv.count(k)) throw FormatError(path.string() + ": missing '" + std::string(k) + "'");
  }
  m.config = load_config((m.dir / kv["config"]).string());
  m.run.grid = m.run.snapshots.front().grid();
  if (!(m.run.grid == m.config.grid())) throw FormatError(path.string() + ": snapshots do not match the config grid");
  auto num = [&](const char* k) { return detail::read_double(kv[k], k); };
  m.run.horizon = num("horizon");
  m.run.bounds = {num("bounds.M1"), num("bounds.Minf"), num("bounds.G")};
  m.run.boundary_leak = num("boundary_leak");
  if (kv.count("net_inflow")) m.run.net_inflow = num("net_inflow");
  if (kv.count("initial_mass")) m.run.initial_mass = num("initial_mass");
  if (kv.count("initial_l1")) m.run.initial_l1 = num("initial_l1");
  std::ifstream dt(m.dir / kv["dt_history"]);
  if (!dt) throw FormatError(path.string() + ": cannot open dt history");
  std::getline(dt, line);
  while (std::getline(dt, line)) {
    if (detail::trim(line).empty()) continue;
    const auto parts = detail::split(line, ',');
    if (parts.size() != 2) throw FormatError("dt history: bad row '" + line + "'");
    m.run.dt_history.push_back(detail::read_double(parts[1], "dt"));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Reports

inline void write_report(std::ostream& out, const PropertyReport& r) {
  using detail::digits17;
  out << "property_id,pass,violation,tolerance,lhs,rhs\n";
  out << r.id << "," << to_string(r.verdict) << "," << digits17(r.violation) << "," << digits17(r.tolerance) << ","
      << digits17(r.lhs) << "," << digits17(r.rhs) << "\n";
}

inline void write_trace(std::ostream& out, const PropertyReport& r) {
  using detail::digits17;
  out << "time,lhs,rhs,violation\n";
  for (const auto& row : r.trace) {
    out << digits17(row.time) << "," << digits17(row.lhs) << "," << digits17(row.rhs) << ","
        << digits17(row.violation) << "\n";
  }
}

/// Writes <id>.csv and <id>_trace.csv into dir.
inline void write_report_files(const fs::path& dir, const PropertyReport& r) {
  {
    auto out = detail::open_out(dir / (r.id + ".csv"));
    write_report(out, r);
  }
  auto out = detail::open_out(dir / (r.id + "_trace.csv"));
  write_trace(out, r);
}

inline PropertyReport to_report(const GradientBoundReport& g) {
  PropertyReport r;
  r.id = "gradient_bound";
  r.lhs = g.lhs;
  r.rhs = g.factor * g.rhs;
  r.violation = std::max(0.0, r.lhs - r.rhs);
  r.tolerance = 0.0;
  r.verdict = g.pass ? Verdict::pass : Verdict::fail;
  r.trace.push_back({0.0, g.lhs, g.rhs, r.violation});
  r.metrics = {{"final_l2_squared", g.final_l2_squared},
               {"dissipation_integral", g.dissipation_integral},
               {"bound_datum_term", g.bound_datum_term},
               {"bound_flux_term", g.bound_flux_term},
               {"q_prime", g.q_prime},
               {"factor", g.factor}};
  return r;
}

/// One stable line per property.
inline std::string summary_line(const PropertyReport& r) {
  using detail::digits17;
  std::string verdict = to_string(r.verdict);
  for (auto& ch : verdict) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  std::string s = verdict + " " + r.id + " violation=" + digits17(r.violation) + " tolerance=" +
                  digits17(r.tolerance) + " lhs=" + digits17(r.lhs) + " rhs=" + digits17(r.rhs);
  if (!r.note.empty()) s += " (" + r.note + ")";
  return s;
}

}  // namespace plap
