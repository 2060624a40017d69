// plap: run simulations, check properties on saved runs, and run the
// Barenblatt convergence ladder.
//
// Exit codes: 0 success, 1 input or config error, 2 boundary leak abort,
// 3 a checked property failed.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "plap/barenblatt.hpp"
#include "plap/config.hpp"
#include "plap/flux.hpp"
#include "plap/io.hpp"
#include "plap/regularizers.hpp"
#include "plap/stepper.hpp"
#include "plap/verify.hpp"

namespace fs = std::filesystem;
using namespace plap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitLeak = 2;
constexpr int kExitFailed = 3;

const std::vector<std::string> kSingleProps = {"mass",          "l1_monotone", "l1_continuity",
                                               "energy_l2",     "energy_lq",   "gradient_bound"};
const std::vector<std::string> kPairedProps = {"contraction", "parts", "comparison"};

std::vector<std::string> split_props(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

int cmd_run(const std::string& config_path, const std::string& out_flag, const std::string& pair_path) {
  ExperimentConfig cfg;
  ExperimentConfig cfg2;
  Field u0;
  Field v0;
  try {
    cfg = load_config(config_path);
    u0 = initial_datum(cfg, fs::path(config_path).parent_path());
    if (!pair_path.empty()) {
      cfg2 = load_config(pair_path);
      v0 = initial_datum(cfg2, fs::path(pair_path).parent_path());
      if (!(cfg2.grid() == cfg.grid()) || cfg2.p != cfg.p || cfg2.T != cfg.T || cfg2.model != cfg.model ||
          cfg2.b_const != cfg.b_const || cfg2.c_const != cfg.c_const || cfg2.kappa != cfg.kappa ||
          cfg2.gamma != cfg.gamma || cfg2.mu != cfg.mu || cfg2.record_times != cfg.record_times) {
        std::cerr << "error: paired configs must share grid, model, p, T and record times\n";
        return kExitInput;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  const fs::path out = out_flag.empty() ? fs::path(cfg.output_dir) : fs::path(out_flag);
  try {
    const FluxModel model = cfg.flux_model();
    if (pair_path.empty()) {
      const SolverRun run = evolve(u0, model, cfg.p, cfg.T, cfg.record_times, cfg.step_options());
      write_run(out, cfg, run);
      std::cout << "run: " << run.snapshots.size() << " snapshots, " << run.dt_history.size()
                << " steps, manifest " << (out / "manifest.txt").string() << "\n";
    } else {
      const auto [a, b] = evolve_pair(u0, v0, model, cfg.p, cfg.T, cfg.record_times, cfg.step_options());
      write_run(out / "a", cfg, a);
      write_run(out / "b", cfg2, b);
      std::cout << "run: paired, " << a.snapshots.size() << " snapshots, " << a.dt_history.size()
                << " steps, manifests " << (out / "a" / "manifest.txt").string() << " "
                << (out / "b" / "manifest.txt").string() << "\n";
    }
  } catch (const BoundaryLeakError& e) {
    std::cerr << "leak: " << e.what() << "\n";
    return kExitLeak;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}

int cmd_verify(const std::string& manifest_path, const std::string& pair_path, const std::string& props_flag,
               const std::string& out_flag) {
  Manifest a;
  Manifest b;
  std::vector<std::string> props = split_props(props_flag);
  try {
    a = read_manifest(manifest_path);
    if (!pair_path.empty()) b = read_manifest(pair_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  if (props.empty()) {
    props = {"mass", "l1_monotone", "energy_l2", "gradient_bound"};
    if (!pair_path.empty()) props.insert(props.end(), kPairedProps.begin(), kPairedProps.end());
  }
  for (const auto& p : props) {
    if (!contains(kSingleProps, p) && !contains(kPairedProps, p)) {
      std::cerr << "error: unknown property '" << p << "'\n";
      return kExitInput;
    }
    if (contains(kPairedProps, p) && pair_path.empty()) {
      std::cerr << "error: property '" << p << "' needs --pair MANIFEST2\n";
      return kExitInput;
    }
  }
  if (contains(props, "energy_l2") || contains(props, "energy_lq") || contains(props, "gradient_bound")) {
    std::size_t gap = 0;
    const auto& steps = a.run.snapshot_steps;
    for (std::size_t k = 1; k < steps.size(); ++k) gap = std::max(gap, steps[k] - steps[k - 1]);
    if (gap > 1) {
      std::cerr << "warning: snapshots are up to " << gap
                << " steps apart; energy and gradient integrals use the left endpoint of each snapshot interval"
                   " (record with run.record_every = 1 for step-level resolution)\n";
    }
  }
  const fs::path out = out_flag.empty() ? a.dir / "reports" : fs::path(out_flag);
  const ExperimentConfig& cfg = a.config;
  std::vector<PropertyReport> reports;
  try {
    const FluxModel model = cfg.flux_model();
    const EnergyOptions energy{cfg.tol.energy_c1, cfg.tol.energy_c2};
    std::optional<PairedReports> paired;
    for (const auto& p : props) {
      if (p == "mass") reports.push_back(check_mass(a.run, cfg.tol.mass));
      else if (p == "l1_monotone") reports.push_back(check_l1_monotone(a.run, cfg.tol.l1));
      else if (p == "l1_continuity") reports.push_back(check_l1_continuity(a.run, {}, cfg.tol.continuity_ratio, cfg.tol.l1));
      else if (p == "energy_l2") reports.push_back(check_energy_l2(a.run, model, cfg.p, energy));
      else if (p == "energy_lq") reports.push_back(check_energy_lq(a.run, model, cfg.p, cfg.tol.energy_q, energy));
      else if (p == "gradient_bound") {
        reports.push_back(to_report(check_gradient_bound(a.run, model, cfg.p, cfg.tol.gradient_factor)));
      } else {
        if (!paired) paired = check_pair(a.run, b.run, cfg.tol.contraction);
        if (p == "contraction") reports.push_back(paired->contraction);
        if (p == "parts") reports.push_back(paired->parts);
        if (p == "comparison") {
          PropertyReport r = check_comparison(a.run, b.run, cfg.tol.comparison);
          reports.push_back(r);
        }
      }
    }
    if (paired && !paired->implications_hold()) {
      std::cerr << "error: paired implication chain broken (parts => contraction / comparison)\n";
      return kExitFailed;
    }
    for (const auto& r : reports) write_report_files(out, r);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  bool ok = true;
  for (const auto& r : reports) {
    std::cout << summary_line(r) << "\n";
    if (r.failed()) ok = false;
  }
  return ok ? kExitOk : kExitFailed;
}

int cmd_barenblatt(double p, int n, double L, const std::vector<int>& Ns, double t0, double t1, double cfl) {
  try {
    const Barenblatt b(p, n);
    // validate the closed form before using it as a reference: weak-form
    // residual against a plateau cutoff on a fine grid
    const GridSpec fine = GridSpec::build(n, L, n == 1 ? 800 : 200);
    std::vector<double> times;
    for (int k = 0; k <= 40; ++k) times.push_back(t0 + (t1 - t0 + 1.0) * k / 40.0);
    const SolverRun exact = barenblatt_run(b, fine, times);
    const double R = 0.5 * b.radius(t0);
    const double S = 0.9 * L - R;
    const TestFunction phi = [&](std::span<const double> x) { return cutoff_plateau(R, S, x); };
    const auto terms = weak_form_terms(exact, pure_diffusion(1.0), p, phi, t0, 0.5);
    std::cout << "profile residual " << detail::digits17(terms.residual) << " (time term "
              << detail::digits17(terms.time_term) << ")\n";
    if (t1 > t0 && !(terms.residual <= 1e-3 * std::max(1.0, std::abs(terms.time_term)))) {
      std::cerr << "error: closed-form profile fails its weak-form check\n";
      return kExitFailed;
    }
    StepOptions opt;
    opt.cfl = cfl;
    const auto ladder = barenblatt_ladder(b, L, Ns, t0, t1, opt);
    std::cout << "N,h,l1_error,order,steps\n";
    bool decreasing = true;
    for (std::size_t k = 0; k < ladder.size(); ++k) {
      const auto& l = ladder[k];
      std::cout << l.N << "," << detail::digits17(l.h) << "," << detail::digits17(l.l1_error) << ","
                << detail::digits17(l.order) << "," << l.steps << "\n";
      if (k > 0 && !(l.l1_error < ladder[k - 1].l1_error)) decreasing = false;
    }
    return decreasing || t1 == t0 ? kExitOk : kExitFailed;
  } catch (const BoundaryLeakError& e) {
    std::cerr << "leak: " << e.what() << "\n";
    return kExitLeak;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

int cmd_validate(const std::string& config_path, double M) {
  try {
    const ExperimentConfig cfg = load_config(config_path);
    const FluxModel model = cfg.flux_model();
    ValidationOptions o;
    o.M = M;
    o.T = std::max(cfg.T, 1e-12);
    o.p = cfg.p;
    o.L = cfg.L;
    o.dim = cfg.n;
    o.seed = cfg.seed;
    bool ok = true;
    auto show = [&](const ConditionReport& r) {
      std::cout << (r.pass() ? "PASS " : "FAIL ") << r.id << " declared=" << (r.declared ? "yes" : "no")
                << " worst_ratio=" << detail::digits17(r.worst_ratio) << " samples=" << r.samples << "\n";
      if (!r.pass()) ok = false;
    };
    for (const auto& r : validate_growth(model, o)) show(r);
    for (const auto& r : validate_lipschitz(model, o)) show(r);
    return ok ? kExitOk : kExitFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-Laplacian evolution solver and property verifier"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string pair;
  auto* run = app.add_subcommand("run", "evolve a configured experiment and write a manifest");
  run->add_option("--config", config, "config file")->required();
  run->add_option("--out", out, "output directory (default: output.dir)");
  run->add_option("--pair", pair, "second config, evolved in lockstep with the first");

  std::string manifest;
  std::string props;
  auto* verify = app.add_subcommand("verify", "check properties on saved runs");
  verify->add_option("--manifest", manifest, "run manifest")->required();
  verify->add_option("--pair", pair, "second manifest for paired properties");
  verify->add_option("--props", props, "comma-separated properties");
  verify->add_option("--out", out, "report directory (default: <run>/reports)");

  double p = 3.0;
  int n = 1;
  double L = 8.0;
  std::vector<int> Ns{100, 200, 400};
  double t0 = 1.0;
  double t1 = 2.0;
  double cfl = 0.4;
  auto* baren = app.add_subcommand("barenblatt", "convergence ladder against the self-similar solution");
  baren->add_option("--p", p, "diffusion exponent")->capture_default_str();
  baren->add_option("--n", n, "dimension")->capture_default_str();
  baren->add_option("--L", L, "box half-width")->capture_default_str();
  baren->add_option("--grids", Ns, "cells per axis for each level")->capture_default_str()->delimiter(',');
  baren->add_option("--t0", t0, "start time of the profile")->capture_default_str();
  baren->add_option("--t1", t1, "end time")->capture_default_str();
  baren->add_option("--cfl", cfl, "step safety factor")->capture_default_str();

  double M = 1.0;
  auto* validate = app.add_subcommand("validate", "sample the structural conditions of a configured flux");
  validate->add_option("--config", config, "config file")->required();
  validate->add_option("--M", M, "amplitude bound")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (*run) return cmd_run(config, out, pair);
  if (*verify) return cmd_verify(manifest, pair, props, out);
  if (*baren) return cmd_barenblatt(p, n, L, Ns, t0, t1, cfl);
  if (*validate) return cmd_validate(config, M);
  return kExitInput;
}
