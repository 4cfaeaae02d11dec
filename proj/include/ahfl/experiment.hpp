#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ahfl/config_file.hpp"
#include "ahfl/engine.hpp"
#include "ahfl/io.hpp"

// Sweeps over the number of edge servers at fixed n, with repetitions, and
// the loss/staleness figures built from their outputs.
//
// An experiment file is a config file plus an [experiment] section:
//
//   [experiment]
//   edges = 5, 10, 20
//   repetitions = 3
//   master_seed = 7
//   name = n100
namespace ahfl {

struct ExperimentSpec {
  SystemConfig base;
  std::vector<int> edges;
  int repetitions = 1;
  std::uint64_t master_seed = 1;
  std::string name;

  /// Desk-scale preset: T = 2000 and 3 repetitions.
  void apply_quick();
};

ExperimentSpec parse_experiment(std::string_view text);
ExperimentSpec load_experiment(const std::filesystem::path& path);

struct Variant {
  int e = 0;
  int repetition = 0;
  RunConfig config;
  double burn_in = 0.1;
  std::filesystem::path dir;

  std::string label() const;
};

/// Seed of repetition r; every e shares it so variants differ only in topology.
std::uint64_t repetition_seed(std::uint64_t master_seed, int repetition);

std::vector<Variant> expand(const ExperimentSpec& spec, const std::filesystem::path& out_dir);

class MissingRunsError : public std::runtime_error {
 public:
  explicit MissingRunsError(std::vector<std::string> missing);
  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  std::vector<std::string> missing_;
};

/// Runs every variant whose summary is absent, up to `workers` at a time.
/// With compute_missing == false, absent variants raise MissingRunsError.
void run_variants(const std::vector<Variant>& variants, int workers, bool compute_missing);

/// loss.csv, staleness.csv, cycles.csv, then summary.txt (whose presence marks completion).
void write_run_outputs(const std::filesystem::path& dir, const RunConfig& cfg,
                       const RunResult& result, double burn_in, double wall_seconds);

io::KeyValues run_summary(const RunConfig& cfg, const RunResult& result, double burn_in,
                          double wall_seconds);

/// Writes fig_loss_<name>.svg and fig_staleness_<name>.svg. Returns the written
/// paths, or nothing when the spec lists no edge counts.
std::vector<std::filesystem::path> render_figures(const ExperimentSpec& spec,
                                                  const std::vector<Variant>& variants,
                                                  const std::filesystem::path& out_dir);

}  // namespace ahfl
