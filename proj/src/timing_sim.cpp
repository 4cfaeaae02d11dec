#include "ahfl/timing_sim.hpp"

#include <algorithm>
#include <numeric>

#include "ahfl/errors.hpp"

namespace ahfl {

std::size_t StalenessTrace::sample_count() const {
  std::size_t n = 0;
  for (const auto& c : per_client) n += c.size();
  return n;
}

std::int64_t StalenessTrace::max_staleness() const {
  std::int64_t best = 0;
  for (const auto& c : per_client)
    for (const auto& s : c) best = std::max(best, s.staleness);
  return best;
}

TimingSimulator::TimingSimulator(const TopologyConfig& top, const TimingConfig& tc,
                                 std::uint64_t seed)
    : top_(top), tc_(tc), rng_(make_rng(seed, Stream::kTiming)) {
  top_.validate();
  tc_.validate();
}

void TimingSimulator::start_cycle(int edge, double now, CycleObserver* observer) {
  EdgeCycleState& st = edges_[edge];
  st.phase = CyclePhase::kAwaitingAvailability;
  st.available_set.clear();
  st.responded_set.clear();
  st.cycle_start_time = now;
  result_.ledger.edge_cycle_tag[edge] = result_.ledger.cloud_version;
  if (observer) observer->on_cycle_start(edge, st.cycle_index, result_.ledger.cloud_version, now);

  // Every client of the cluster draws a fresh availability clock per cycle.
  std::exponential_distribution<double> avail(tc_.lambda);
  const int first = edge * top_.l;
  for (int i = 0; i < top_.l; ++i) {
    queue_.push(Event{now + avail(rng_), EventKind::kClientAvailable, edge, first + i,
                      st.cycle_index});
  }
}

void TimingSimulator::on_available(const Event& ev, CycleObserver* observer) {
  EdgeCycleState& st = edges_[ev.edge_id];
  if (ev.cycle_id != st.cycle_index || st.phase != CyclePhase::kAwaitingAvailability) return;

  st.available_set.push_back(ev.client_id);
  if (static_cast<int>(st.available_set.size()) < top_.m) return;

  st.phase = CyclePhase::kAwaitingUplinks;
  if (observer) observer->on_dispatch(ev.edge_id, st.cycle_index, st.available_set, ev.time);

  std::exponential_distribution<double> uplink(tc_.mu_tilde);
  for (int client : st.available_set) {
    queue_.push(Event{ev.time + tc_.c + uplink(rng_), EventKind::kUplinkArrival, ev.edge_id, client,
                      st.cycle_index});
  }
}

bool TimingSimulator::on_uplink(const Event& ev, std::int64_t target, CycleObserver* observer) {
  EdgeCycleState& st = edges_[ev.edge_id];
  // Stragglers beyond the first k, and anything from an older cycle, are dropped.
  if (ev.cycle_id != st.cycle_index || st.phase != CyclePhase::kAwaitingUplinks) return false;

  st.responded_set.push_back(ev.client_id);
  if (static_cast<int>(st.responded_set.size()) < top_.k) return false;

  VersionLedger& ledger = result_.ledger;
  const std::int64_t before = ledger.cloud_version;
  const std::int64_t after = before + 1;
  for (int client : st.responded_set) {
    auto& samples = result_.trace.per_client[client];
    samples.push_back(StalenessSample{static_cast<std::int64_t>(samples.size()) + 1,
                                      before - ledger.client_version[client], ev.time});
    ledger.client_version[client] = after;
  }
  ledger.cloud_version = after;
  ledger.edge_updates[ev.edge_id] += 1;

  result_.cloud_gaps.push_back(ev.time - last_cloud_time_);
  last_cloud_time_ = ev.time;
  result_.cycles.push_back(CycleRecord{ev.edge_id, st.cycle_index, ev.time - st.cycle_start_time});
  result_.trace.total_time = ev.time;

  if (observer) {
    observer->on_aggregate(ev.edge_id, st.cycle_index, st.responded_set,
                           before - ledger.edge_cycle_tag[ev.edge_id], after, ev.time);
  }
  if (after >= target) return true;

  st.cycle_index += 1;
  start_cycle(ev.edge_id, ev.time, observer);
  return false;
}

TimingResult TimingSimulator::run(std::int64_t num_cloud_updates, CycleObserver* observer) {
  if (num_cloud_updates < 1) {
    throw ValidationError("num_cloud_updates", "must be at least 1");
  }
  queue_ = EventQueue{};
  result_ = TimingResult{};
  last_cloud_time_ = 0.0;
  edges_.assign(top_.e, EdgeCycleState{});
  result_.trace.per_client.assign(top_.n, {});
  result_.ledger.client_version.assign(top_.n, 0);
  result_.ledger.edge_cycle_tag.assign(top_.e, 0);
  result_.ledger.edge_updates.assign(top_.e, 0);
  result_.cloud_gaps.reserve(num_cloud_updates);
  result_.cycles.reserve(num_cloud_updates);

  for (int edge = 0; edge < top_.e; ++edge) start_cycle(edge, 0.0, observer);

  while (!queue_.empty()) {
    const Event ev = queue_.pop();
    if (ev.kind == EventKind::kClientAvailable) {
      on_available(ev, observer);
    } else if (on_uplink(ev, num_cloud_updates, observer)) {
      break;
    }
  }
  return std::move(result_);
}

TimingResult run_timing_sim(const TopologyConfig& top, const TimingConfig& tc,
                            std::int64_t num_cloud_updates, std::uint64_t seed) {
  TimingSimulator sim(top, tc, seed);
  return sim.run(num_cloud_updates);
}

double empirical_mean_staleness(const StalenessTrace& trace, double burn_in_fraction) {
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
    throw ValidationError("burn_in_fraction", "must lie in [0, 1)");
  }
  const double cutoff = burn_in_fraction * trace.total_time;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& client : trace.per_client) {
    for (const auto& s : client) {
      if (s.time < cutoff) continue;
      sum += static_cast<double>(s.staleness);
      ++count;
    }
  }
  if (count == 0) {
    throw InsufficientDataError("no staleness samples remain after burn-in; run longer");
  }
  return sum / static_cast<double>(count);
}

double empirical_cloud_rate(std::span<const double> gaps) {
  if (gaps.empty()) throw InsufficientDataError("no cloud updates recorded");
  const double total = std::accumulate(gaps.begin(), gaps.end(), 0.0);
  return static_cast<double>(gaps.size()) / total;
}

double empirical_bound_satisfaction(const StalenessTrace& trace, std::int64_t M,
                                    double burn_in_fraction) {
  const double cutoff = burn_in_fraction * trace.total_time;
  std::size_t within = 0;
  std::size_t count = 0;
  for (const auto& client : trace.per_client) {
    for (const auto& s : client) {
      if (s.time < cutoff) continue;
      ++count;
      if (s.staleness <= M) ++within;
    }
  }
  if (count == 0) throw InsufficientDataError("empty staleness trace");
  return static_cast<double>(within) / static_cast<double>(count);
}

double empirical_mean_cycle_time(std::span<const CycleRecord> cycles, int edge) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& c : cycles) {
    if (edge >= 0 && c.edge_id != edge) continue;
    sum += c.duration;
    ++count;
  }
  if (count == 0) throw InsufficientDataError("no completed cycles");
  return sum / static_cast<double>(count);
}

}  // namespace ahfl
