#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ahfl/config.hpp"
#include "ahfl/fl_core.hpp"
#include "ahfl/timing_sim.hpp"

// Full training protocol: the timing simulator drives the cycle lifecycle and
// the engine attaches local training, edge aggregation and staleness-weighted
// cloud mixing to it.
namespace ahfl {

struct RunConfig {
  TopologyConfig topology;
  TimingConfig timing;
  LearningConfig learning;
  int d = 100;                       ///< model dimension
  std::size_t dataset_size = 10000;  ///< |D|
  std::int64_t T = 10000;            ///< cloud aggregations
  std::uint64_t seed = 1;
  std::optional<RowSet> eval_rows;   ///< rows for the logged loss; all of D when unset

  void validate() const;
};

struct LossPoint {
  std::int64_t cloud_version = 0;
  double sim_time = 0.0;
  double loss = 0.0;
  double grad_norm_sq = 0.0;  ///< ||grad L(theta_t; D)||^2
};

struct RunResult {
  std::vector<LossPoint> loss_trace;  ///< T + 1 entries, starting at theta_0
  StalenessTrace staleness_trace;
  std::vector<double> cloud_gaps;
  std::vector<CycleRecord> cycles;
  double min_grad_norm_sq = 0.0;
  ModelVector final_model;
};

/// Runs on a dataset generated from (cfg.d, cfg.dataset_size, cfg.topology.n, cfg.seed).
RunResult run(const RunConfig& cfg);

/// Observes every cloud aggregation: the global model before it, the incoming
/// edge model, and the result.
using CloudUpdateHook = std::function<void(std::int64_t new_version, const ModelVector& previous,
                                           const ModelVector& incoming, const ModelVector& updated)>;

/// Runs on a caller-supplied dataset; its shard count must equal cfg.topology.n.
RunResult run(const RunConfig& cfg, const Dataset& ds, const CloudUpdateHook& hook = {});

/// Minimum of ||grad L||^2 over every stride-th logged model.
double min_gradient_norm(const RunResult& result, std::int64_t stride = 1);

/// First cloud version whose loss is <= fraction * initial loss, if any.
std::optional<std::int64_t> updates_to_reach(const RunResult& result, double fraction);

/// Seed for one client's local SGD in one edge cycle.
std::uint64_t local_seed(std::uint64_t run_seed, int edge, std::int64_t cycle, int client);

}  // namespace ahfl
