#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ahfl/config.hpp"
#include "ahfl/event_queue.hpp"
#include "ahfl/random.hpp"

// Discrete-event simulation of the version-counting dynamics: edges run
// availability/training/uplink cycles, every edge aggregation bumps the cloud
// version, and each aggregated client logs its staleness.
namespace ahfl {

struct StalenessSample {
  std::int64_t event_index = 0;  ///< j, 1-based per client
  std::int64_t staleness = 0;    ///< S_i[j]
  double time = 0.0;             ///< T^i_j
};

struct StalenessTrace {
  std::vector<std::vector<StalenessSample>> per_client;
  double total_time = 0.0;

  std::size_t sample_count() const;
  std::int64_t max_staleness() const;
};

/// Cloud and client version counters.
struct VersionLedger {
  std::int64_t cloud_version = 0;
  std::vector<std::int64_t> client_version;
  std::vector<std::int64_t> edge_cycle_tag;  ///< cloud version at each edge's cycle start
  std::vector<std::int64_t> edge_updates;    ///< cloud updates contributed per edge
};

struct CycleRecord {
  int edge_id = 0;
  std::int64_t cycle_index = 0;
  double duration = 0.0;
};

enum class CyclePhase : std::uint8_t { kAwaitingAvailability, kAwaitingUplinks };

struct EdgeCycleState {
  CyclePhase phase = CyclePhase::kAwaitingAvailability;
  std::vector<int> available_set;
  std::vector<int> responded_set;
  double cycle_start_time = 0.0;
  std::int64_t cycle_index = 0;
};

struct TimingResult {
  StalenessTrace trace;
  std::vector<double> cloud_gaps;  ///< time between consecutive cloud updates, first from t = 0
  std::vector<CycleRecord> cycles;
  VersionLedger ledger;
};

/// Hooks into the cycle lifecycle. The timing layer never reads anything
/// back, so observers cannot perturb event order or timing RNG use.
class CycleObserver {
 public:
  virtual ~CycleObserver() = default;

  /// Edge starts a cycle tagged with the current cloud version.
  virtual void on_cycle_start(int /*edge*/, std::int64_t /*cycle*/, std::int64_t /*cloud_version*/,
                              double /*time*/) {}

  /// The m-th client became available; `clients` are dispatched in availability order.
  virtual void on_dispatch(int /*edge*/, std::int64_t /*cycle*/, std::span<const int> /*clients*/,
                           double /*time*/) {}

  /// First k uplinks arrived. `version_gap` is the cloud version before the
  /// increment minus the cycle tag; `new_version` is the version after it.
  virtual void on_aggregate(int /*edge*/, std::int64_t /*cycle*/, std::span<const int> /*responders*/,
                            std::int64_t /*version_gap*/, std::int64_t /*new_version*/,
                            double /*time*/) {}
};

class TimingSimulator {
 public:
  TimingSimulator(const TopologyConfig& top, const TimingConfig& tc, std::uint64_t seed);

  /// Runs until the cloud has aggregated `num_cloud_updates` times.
  TimingResult run(std::int64_t num_cloud_updates, CycleObserver* observer = nullptr);

 private:
  void start_cycle(int edge, double now, CycleObserver* observer);
  void on_available(const Event& ev, CycleObserver* observer);
  bool on_uplink(const Event& ev, std::int64_t target, CycleObserver* observer);

  TopologyConfig top_;
  TimingConfig tc_;
  Rng rng_;
  EventQueue queue_;
  std::vector<EdgeCycleState> edges_;
  TimingResult result_;
  double last_cloud_time_ = 0.0;
};

TimingResult run_timing_sim(const TopologyConfig& top, const TimingConfig& tc,
                            std::int64_t num_cloud_updates, std::uint64_t seed);

/// Mean staleness over samples logged at or after burn_in_fraction * total_time.
/// Throws InsufficientDataError when no sample survives the burn-in.
double empirical_mean_staleness(const StalenessTrace& trace, double burn_in_fraction = 0.1);

/// 1 / mean(gaps).
double empirical_cloud_rate(std::span<const double> gaps);

/// Fraction of samples with S <= M, after the same burn-in rule.
double empirical_bound_satisfaction(const StalenessTrace& trace, std::int64_t M,
                                    double burn_in_fraction = 0.0);

/// Mean cycle duration of one edge, or of all edges when edge < 0.
double empirical_mean_cycle_time(std::span<const CycleRecord> cycles, int edge = -1);

}  // namespace ahfl
