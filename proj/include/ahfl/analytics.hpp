#pragma once

#include <cstdint>

#include "ahfl/config.hpp"

// Closed-form timeliness and staleness quantities of the client-edge-cloud
// system. Everything here is a pure function of the configuration.
namespace ahfl::analytics {

/// H_j = sum_{i=1..j} 1/i, with H_0 = 0.
double harmonic(std::int64_t j);

/// E[Z_{m:l}]: mean time until m of l exponential(lambda) clocks fire.
double expected_availability_wait(const TimingConfig& tc, int l, int m);

/// E[X_{k:m}]: mean time until k of m exponential(mu_tilde) uplinks arrive.
double expected_uplink_wait(const TimingConfig& tc, int m, int k);

/// E[Y_t] = E[Z_{m:l}] + c + E[X_{k:m}].
double expected_cycle_time(const TimingConfig& tc, const TopologyConfig& top);

/// E[Y^i_j] = (l / k) E[Y_t], mean time between successive aggregations of one client.
double expected_client_update_time(const TimingConfig& tc, const TopologyConfig& top);

/// Mean cloud update rate e / E[Y_t].
double expected_cloud_rate(const TimingConfig& tc, const TopologyConfig& top);

/// Steady-state staleness n/k - 1 using the integer k actually configured.
double expected_staleness(const TopologyConfig& top);

/// e / (alpha * beta) - 1, the value obtained when k = alpha * beta * l holds exactly.
double ideal_expected_staleness(const TopologyConfig& top);

struct StalenessBound {
  double expected_staleness = 0.0;
  std::int64_t bound_M = 1;
  double confidence = 1.0;  ///< lower bound on P(S <= M)
};

/// Markov lower bound max(0, 1 - E[S] / M) on P(S <= M).
double staleness_bound_probability(const TopologyConfig& top, std::int64_t M);

/// Same bound from a raw expected staleness.
double markov_bound(double expected_staleness, std::int64_t M);

/// Smallest M with staleness_bound_probability(top, M) >= 1 - epsilon.
std::int64_t min_bound_for_confidence(const TopologyConfig& top, double epsilon);

std::int64_t min_bound_for_confidence(double expected_staleness, double epsilon);

StalenessBound staleness_bound(const TopologyConfig& top, std::int64_t M);

}  // namespace ahfl::analytics
