#include "ahfl/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "ahfl/analytics.hpp"
#include "ahfl/config_file.hpp"
#include "ahfl/engine.hpp"
#include "ahfl/errors.hpp"
#include "ahfl/experiment.hpp"
#include "ahfl/timing_sim.hpp"
#include "ahfl/traces.hpp"

namespace ahfl::cli {

namespace fs = std::filesystem;
using io::format_double;

io::KeyValues analyze_report(const TopologyConfig& top, const TimingConfig& tc) {
  namespace an = analytics;
  const double stale = an::expected_staleness(top);
  const double ideal = an::ideal_expected_staleness(top);
  io::KeyValues kv = {
      {"n", std::to_string(top.n)},
      {"e", std::to_string(top.e)},
      {"l", std::to_string(top.l)},
      {"m", std::to_string(top.m)},
      {"k", std::to_string(top.k)},
      {"alpha", format_double(top.alpha)},
      {"beta", format_double(top.beta)},
      {"availability_wait", format_double(an::expected_availability_wait(tc, top.l, top.m))},
      {"uplink_wait", format_double(an::expected_uplink_wait(tc, top.m, top.k))},
      {"cycle_time", format_double(an::expected_cycle_time(tc, top))},
      {"client_update_time", format_double(an::expected_client_update_time(tc, top))},
      {"cloud_update_rate", format_double(an::expected_cloud_rate(tc, top))},
      {"expected_staleness", format_double(stale)},
      {"ideal_expected_staleness", format_double(ideal)},
  };
  for (const auto& [name, eps] : {std::pair{"0.1", 0.1}, {"0.05", 0.05}, {"0.01", 0.01}}) {
    kv.emplace_back(std::string("bound_M_eps_") + name,
                    std::to_string(an::min_bound_for_confidence(stale, eps)));
    kv.emplace_back(std::string("ideal_bound_M_eps_") + name,
                    std::to_string(an::min_bound_for_confidence(ideal, eps)));
  }
  return kv;
}

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int workers = 1;
  bool quick = false;
  std::optional<std::int64_t> updates;
  std::vector<int> edges;
  bool no_compute = false;
};

fs::path out_dir(const Options& opt) {
  if (opt.out) return *opt.out;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "ahfl_out";
}

std::optional<fs::path> explicit_out_dir(const Options& opt) {
  if (opt.out) return fs::path(*opt.out);
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return fs::path(env);
  return std::nullopt;
}

// Experiment files are accepted anywhere a config is; the [experiment]
// section only matters to figure and analyze.
ExperimentSpec load_spec(const Options& opt) {
  return opt.config.empty() ? ExperimentSpec{} : load_experiment(opt.config);
}

SystemConfig load(const Options& opt) {
  SystemConfig cfg = load_spec(opt).base;
  if (opt.seed) cfg.run.seed = *opt.seed;
  if (opt.quick) cfg.run.T = 2000;
  return cfg;
}

void print(std::ostream& out, const io::KeyValues& kv) { out << io::format_summary(kv); }

int cmd_analyze(const Options& opt, std::ostream& out) {
  const SystemConfig cfg = load(opt);
  const std::vector<int> edges = opt.edges.empty() ? load_spec(opt).edges : opt.edges;
  std::string text;
  if (edges.empty()) {
    text = io::format_summary(analyze_report(cfg.run.topology, cfg.run.timing));
  } else {
    const auto& base = cfg.run.topology;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      TopologyConfig top;
      try {
        top = TopologyConfig::from_fractions(base.n, edges[i], base.alpha, base.beta);
      } catch (const ValidationError& err) {
        throw ValidationError("--edges", "e=" + std::to_string(edges[i]) + ": " + err.what());
      }
      if (i) text += "\n";
      text += io::format_summary(analyze_report(top, cfg.run.timing));
    }
  }
  out << text;
  if (auto dir = explicit_out_dir(opt)) io::write_atomic(*dir / "analyze.txt", text);
  return kOk;
}

struct Check {
  std::string name;
  double analytic;
  double empirical;
  double tolerance;

  double rel_error() const { return std::abs(empirical - analytic) / std::abs(analytic); }
  bool pass() const {
    return analytic == 0.0 ? std::abs(empirical) <= tolerance : rel_error() <= tolerance;
  }
};

int cmd_simulate_timing(const Options& opt, std::ostream& out) {
  const SystemConfig cfg = load(opt);
  const std::int64_t updates = opt.updates.value_or(cfg.run.T);
  const auto& top = cfg.run.topology;
  const auto& tc = cfg.run.timing;

  const TimingResult res = run_timing_sim(top, tc, updates, cfg.run.seed);
  const fs::path dir = out_dir(opt);
  io::write_atomic(dir / "staleness.csv", traces::staleness_csv(res.trace));
  io::write_atomic(dir / "cycles.csv", traces::cycles_csv(res.cycles));
  io::write_atomic(dir / "cloud_gaps.csv", traces::cloud_gaps_csv(res.cloud_gaps));

  const std::vector<Check> checks = {
      {"cycle_time", analytics::expected_cycle_time(tc, top), empirical_mean_cycle_time(res.cycles),
       0.02},
      {"cloud_update_rate", analytics::expected_cloud_rate(tc, top),
       empirical_cloud_rate(res.cloud_gaps), 0.02},
      {"mean_staleness", analytics::expected_staleness(top),
       empirical_mean_staleness(res.trace, cfg.burn_in), 0.05},
  };

  io::KeyValues kv = {
      {"cloud_updates", std::to_string(res.ledger.cloud_version)},
      {"staleness_samples", std::to_string(res.trace.sample_count())},
      {"sim_time", format_double(res.trace.total_time)},
      {"burn_in", format_double(cfg.burn_in)},
  };
  bool ok = true;
  for (const auto& c : checks) {
    kv.emplace_back(c.name + ".analytic", format_double(c.analytic));
    kv.emplace_back(c.name + ".empirical", format_double(c.empirical));
    kv.emplace_back(c.name + ".rel_error", format_double(c.analytic == 0.0 ? std::abs(c.empirical)
                                                                           : c.rel_error()));
    kv.emplace_back(c.name + ".tolerance", format_double(c.tolerance));
    kv.emplace_back(c.name + ".status", c.pass() ? "pass" : "FAIL");
    ok = ok && c.pass();
  }
  kv.emplace_back("ideal_expected_staleness",
                  format_double(analytics::ideal_expected_staleness(top)));
  io::write_atomic(dir / "timing_report.txt", io::format_summary(kv));
  print(out, kv);
  return ok ? kOk : kToleranceFailure;
}

int cmd_train(const Options& opt, std::ostream& out) {
  const SystemConfig cfg = load(opt);
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult result = run(cfg.run);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const fs::path dir = out_dir(opt);
  write_run_outputs(dir, cfg.run, result, cfg.burn_in, wall);
  print(out, run_summary(cfg.run, result, cfg.burn_in, wall));
  return kOk;
}

int cmd_figure(const Options& opt, std::ostream& out, std::ostream& err) {
  if (opt.config.empty()) throw CLI::RequiredError("--config");
  ExperimentSpec spec = load_experiment(opt.config);
  if (opt.seed) spec.master_seed = *opt.seed;
  if (opt.quick) spec.apply_quick();
  const fs::path dir = out_dir(opt);

  if (spec.edges.empty()) {
    err << "warning: experiment lists no edge counts; nothing to plot\n";
    return kOk;
  }
  const auto variants = expand(spec, dir);
  run_variants(variants, opt.workers, !opt.no_compute);
  for (const auto& path : render_figures(spec, variants, dir)) out << "wrote " << path.string() << "\n";
  return kOk;
}

int cmd_validate(const Options& opt, std::ostream& out) {
  if (opt.config.empty()) throw CLI::RequiredError("--config");
  out << write_config(load(opt));
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Timely asynchronous hierarchical federated learning simulator", "ahfl"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Configuration file");
    sub->add_option("--seed", opt.seed, "Override run.seed");
    sub->add_option("--out", opt.out, std::string("Output directory (default $") + kOutDirEnv +
                                          " or ./ahfl_out)");
  };

  auto* analyze = app.add_subcommand("analyze", "Closed-form timing and staleness table");
  common(analyze);
  analyze->add_option("--edges", opt.edges, "Evaluate each edge count at the configured n")
      ->delimiter(',');

  auto* sim = app.add_subcommand("simulate-timing", "Version-counting simulation vs. closed forms");
  common(sim);
  sim->add_option("--updates", opt.updates, "Cloud updates to simulate (default run.T)");
  sim->add_flag("--quick", opt.quick, "Use T = 2000");

  auto* train = app.add_subcommand("train", "Full training run");
  common(train);
  train->add_flag("--quick", opt.quick, "Use T = 2000");

  auto* figure = app.add_subcommand("figure", "Run an experiment grid and plot it");
  common(figure);
  figure->add_option("--workers", opt.workers, "Parallel runs")->check(CLI::PositiveNumber);
  figure->add_flag("--quick", opt.quick, "Use T = 2000 and 3 repetitions");
  figure->add_flag("--no-compute", opt.no_compute, "Fail instead of running absent variants");

  auto* validate = app.add_subcommand("validate", "Parse and validate a config, print it resolved");
  common(validate);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(opt, out);
    if (sim->parsed()) return cmd_simulate_timing(opt, out);
    if (train->parsed()) return cmd_train(opt, out);
    if (figure->parsed()) return cmd_figure(opt, out, err);
    if (validate->parsed()) return cmd_validate(opt, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParseError;
  } catch (const ValidationError& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return kValidationError;
  } catch (const DivergenceError& e) {
    err << "divergence: " << e.what() << "\n";
    return kDivergence;
  } catch (const MissingRunsError& e) {
    err << "error: " << e.what() << "\n";
    return kMissingRuns;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace ahfl::cli
