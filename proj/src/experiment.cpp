#include "ahfl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "ahfl/analytics.hpp"
#include "ahfl/errors.hpp"
#include "ahfl/svg_plot.hpp"
#include "ahfl/timing_sim.hpp"
#include "ahfl/traces.hpp"

namespace ahfl {

namespace fs = std::filesystem;

void ExperimentSpec::apply_quick() {
  base.run.T = 2000;
  repetitions = 3;
}

ExperimentSpec parse_experiment(std::string_view text) {
  const ConfigEntries entries = parse_entries(text);
  ExperimentSpec spec;
  spec.base = config_from_entries(entries, {"experiment"});
  spec.master_seed = spec.base.run.seed;
  spec.name = "n" + std::to_string(spec.base.run.topology.n);

  for (const auto& [key, entry] : entries) {
    if (!key.starts_with("experiment.")) continue;
    const std::string field = key.substr(11);
    try {
      if (field == "edges") {
        for (const auto& part : io::split(entry.value, ',')) {
          auto t = io::trim(part);
          if (t.empty()) continue;
          std::size_t used = 0;
          const int e = std::stoi(std::string(t), &used);
          if (used != t.size()) throw std::invalid_argument("trailing characters");
          spec.edges.push_back(e);
        }
      } else if (field == "repetitions") {
        spec.repetitions = std::stoi(entry.value);
      } else if (field == "master_seed") {
        spec.master_seed = std::stoull(entry.value);
      } else if (field == "name") {
        spec.name = entry.value;
      } else {
        throw ParseError(key, entry.line, "unknown experiment key");
      }
    } catch (const std::logic_error&) {
      throw ParseError(key, entry.line, "cannot parse '" + entry.value + "'");
    }
  }

  if (spec.repetitions < 1) throw ValidationError("experiment.repetitions", "must be positive");
  for (int e : spec.edges) {
    // Surfaces the offending edge count before any run starts.
    try {
      TopologyConfig::from_fractions(spec.base.run.topology.n, e, spec.base.run.topology.alpha,
                                     spec.base.run.topology.beta);
    } catch (const ValidationError& err) {
      throw ValidationError("experiment.edges", "e=" + std::to_string(e) + ": " + err.what());
    }
  }
  return spec;
}

ExperimentSpec load_experiment(const fs::path& path) { return parse_experiment(io::read_file(path)); }

std::string Variant::label() const {
  return "e=" + std::to_string(e) + " rep=" + std::to_string(repetition);
}

std::uint64_t repetition_seed(std::uint64_t master_seed, int repetition) {
  return master_seed + static_cast<std::uint64_t>(repetition);
}

std::vector<Variant> expand(const ExperimentSpec& spec, const fs::path& out_dir) {
  std::vector<Variant> out;
  const TopologyConfig& base = spec.base.run.topology;
  for (int e : spec.edges) {
    for (int r = 0; r < spec.repetitions; ++r) {
      Variant v;
      v.e = e;
      v.repetition = r;
      v.config = spec.base.run;
      v.config.topology = TopologyConfig::from_fractions(base.n, e, base.alpha, base.beta);
      v.config.seed = repetition_seed(spec.master_seed, r);
      v.burn_in = spec.base.burn_in;
      v.dir = out_dir / "runs" / (spec.name + "_e" + std::to_string(e)) / ("rep" + std::to_string(r));
      out.push_back(std::move(v));
    }
  }
  return out;
}

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

bool complete(const Variant& v) { return fs::exists(v.dir / "summary.txt"); }

}  // namespace

MissingRunsError::MissingRunsError(std::vector<std::string> missing)
    : std::runtime_error("missing runs: " + join(missing, ", ")), missing_(std::move(missing)) {}

io::KeyValues run_summary(const RunConfig& cfg, const RunResult& result, double burn_in,
                          double wall_seconds) {
  auto f = [](double v) { return io::format_double(v); };
  const auto& top = cfg.topology;
  double mean_staleness = 0.0;
  try {
    mean_staleness = empirical_mean_staleness(result.staleness_trace, burn_in);
  } catch (const InsufficientDataError&) {
    mean_staleness = empirical_mean_staleness(result.staleness_trace, 0.0);
  }
  return {
      {"n", std::to_string(top.n)},
      {"e", std::to_string(top.e)},
      {"l", std::to_string(top.l)},
      {"m", std::to_string(top.m)},
      {"k", std::to_string(top.k)},
      {"T", std::to_string(cfg.T)},
      {"seed", std::to_string(cfg.seed)},
      {"initial_loss", f(result.loss_trace.front().loss)},
      {"final_loss", f(result.loss_trace.back().loss)},
      {"min_grad_norm_sq", f(result.min_grad_norm_sq)},
      {"mean_staleness", f(mean_staleness)},
      {"expected_staleness", f(analytics::expected_staleness(top))},
      {"ideal_expected_staleness", f(analytics::ideal_expected_staleness(top))},
      {"staleness_samples", std::to_string(result.staleness_trace.sample_count())},
      {"sim_time", f(result.loss_trace.back().sim_time)},
      {"wall_clock_seconds", f(wall_seconds)},
  };
}

void write_run_outputs(const fs::path& dir, const RunConfig& cfg, const RunResult& result,
                       double burn_in, double wall_seconds) {
  io::write_atomic(dir / "loss.csv", traces::loss_csv(result.loss_trace));
  io::write_atomic(dir / "staleness.csv", traces::staleness_csv(result.staleness_trace));
  io::write_atomic(dir / "cycles.csv", traces::cycles_csv(result.cycles));
  io::write_atomic(dir / "summary.txt",
                   io::format_summary(run_summary(cfg, result, burn_in, wall_seconds)));
}

void run_variants(const std::vector<Variant>& variants, int workers, bool compute_missing) {
  std::vector<const Variant*> todo;
  for (const auto& v : variants) {
    if (!complete(v)) todo.push_back(&v);
  }
  if (todo.empty()) return;
  if (!compute_missing) {
    std::vector<std::string> names;
    for (const auto* v : todo) names.push_back(v->label());
    throw MissingRunsError(std::move(names));
  }

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      {
        std::lock_guard lock(err_mu);
        if (first_error) return;
      }
      try {
        const Variant& v = *todo[i];
        const auto t0 = std::chrono::steady_clock::now();
        const RunResult result = run(v.config);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_run_outputs(v.dir, v.config, result, v.burn_in, wall);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const int count = std::clamp<int>(workers, 1, static_cast<int>(todo.size()));
  {
    std::vector<std::jthread> pool;
    for (int i = 0; i < count; ++i) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<fs::path> render_figures(const ExperimentSpec& spec, const std::vector<Variant>& variants,
                                     const fs::path& out_dir) {
  if (spec.edges.empty()) return {};

  svg::Chart loss_chart;
  loss_chart.title = "Global loss vs. cloud updates (n=" + std::to_string(spec.base.run.topology.n) + ")";
  loss_chart.x_label = "cloud updates (epochs)";
  loss_chart.y_label = "regression loss";
  loss_chart.log_y = true;

  svg::Chart stale_chart;
  stale_chart.title = "Staleness (n=" + std::to_string(spec.base.run.topology.n) + ")";
  stale_chart.x_label = "cloud updates (epochs)";
  stale_chart.y_label = "mean staleness per bin";

  constexpr std::size_t kMaxPoints = 800;
  constexpr std::size_t kBins = 100;

  for (std::size_t ei = 0; ei < spec.edges.size(); ++ei) {
    const int e = spec.edges[ei];
    std::vector<double> loss_sum;
    std::vector<double> bin_sum(kBins, 0.0);
    std::vector<double> bin_count(kBins, 0.0);
    int reps = 0;
    std::int64_t T = 0;
    TopologyConfig top;

    for (const auto& v : variants) {
      if (v.e != e) continue;
      top = v.config.topology;
      const auto loss = traces::read_loss_csv(v.dir / "loss.csv");
      const auto stale = traces::read_staleness_csv(v.dir / "staleness.csv");
      if (loss.empty()) continue;
      if (loss_sum.size() < loss.size()) loss_sum.resize(loss.size(), 0.0);
      for (std::size_t i = 0; i < loss.size(); ++i) loss_sum[i] += loss[i].loss;
      T = std::max(T, loss.back().cloud_version);
      ++reps;

      std::vector<double> times;
      times.reserve(loss.size());
      for (const auto& p : loss) times.push_back(p.sim_time);
      for (const auto& s : stale) {
        // Samples are logged at update instants, so the time identifies the version.
        const auto it = std::lower_bound(times.begin(), times.end(), s.sim_time);
        const auto version = static_cast<std::size_t>(std::distance(times.begin(), it));
        const std::size_t bin =
            std::min(kBins - 1, (version * kBins) / static_cast<std::size_t>(std::max<std::int64_t>(1, T + 1)));
        bin_sum[bin] += static_cast<double>(s.staleness);
        bin_count[bin] += 1.0;
      }
    }
    if (reps == 0) continue;

    svg::Series ls;
    ls.label = "e=" + std::to_string(e);
    ls.color = svg::palette(ei);
    const std::size_t stride = std::max<std::size_t>(1, loss_sum.size() / kMaxPoints);
    for (std::size_t i = 0; i < loss_sum.size(); i += stride) {
      ls.x.push_back(static_cast<double>(i));
      ls.y.push_back(loss_sum[i] / reps);
    }
    if ((loss_sum.size() - 1) % stride != 0) {
      ls.x.push_back(static_cast<double>(loss_sum.size() - 1));
      ls.y.push_back(loss_sum.back() / reps);
    }
    loss_chart.series.push_back(std::move(ls));

    svg::Series ss;
    ss.label = "e=" + std::to_string(e);
    ss.color = svg::palette(ei);
    for (std::size_t b = 0; b < kBins; ++b) {
      if (bin_count[b] == 0.0) continue;
      ss.x.push_back((static_cast<double>(b) + 0.5) * static_cast<double>(T + 1) / kBins);
      ss.y.push_back(bin_sum[b] / bin_count[b]);
    }
    stale_chart.series.push_back(std::move(ss));

    const double ideal = analytics::ideal_expected_staleness(top);
    const double exact = analytics::expected_staleness(top);
    stale_chart.hlines.push_back({ideal, "e=" + std::to_string(e) + ": " + io::format_double(ideal),
                                  svg::palette(ei), true});
    if (std::abs(exact - ideal) > 1e-9) {
      stale_chart.hlines.push_back({exact, "n/k-1=" + io::format_double(exact), svg::palette(ei), false});
    }
  }

  const fs::path loss_path = out_dir / ("fig_loss_" + spec.name + ".svg");
  const fs::path stale_path = out_dir / ("fig_staleness_" + spec.name + ".svg");
  io::write_atomic(loss_path, svg::render(loss_chart));
  io::write_atomic(stale_path, svg::render(stale_chart));
  return {loss_path, stale_path};
}

}  // namespace ahfl
