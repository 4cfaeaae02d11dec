#include "ahfl/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ahfl/errors.hpp"

namespace ahfl::analytics {

double harmonic(std::int64_t j) {
  if (j < 0) throw ValidationError("j", "harmonic index must be nonnegative");
  double sum = 0.0;
  for (std::int64_t i = 1; i <= j; ++i) sum += 1.0 / static_cast<double>(i);
  return sum;
}

namespace {

// H_a - H_b for a >= b, summed over the tail only so small differences of
// large harmonic numbers keep full precision.
double harmonic_diff(std::int64_t a, std::int64_t b) {
  double sum = 0.0;
  for (std::int64_t i = b + 1; i <= a; ++i) sum += 1.0 / static_cast<double>(i);
  return sum;
}

}  // namespace

double expected_availability_wait(const TimingConfig& tc, int l, int m) {
  tc.validate();
  if (m < 1 || m > l) {
    throw ValidationError("topology.m", "availability quorum must satisfy 1 <= m <= l (m=" +
                                            std::to_string(m) + ", l=" + std::to_string(l) + ")");
  }
  return harmonic_diff(l, l - m) / tc.lambda;
}

double expected_uplink_wait(const TimingConfig& tc, int m, int k) {
  tc.validate();
  if (k < 1 || k > m) {
    throw ValidationError("topology.k", "aggregation quorum must satisfy 1 <= k <= m (k=" +
                                            std::to_string(k) + ", m=" + std::to_string(m) + ")");
  }
  return harmonic_diff(m, m - k) / tc.mu_tilde;
}

double expected_cycle_time(const TimingConfig& tc, const TopologyConfig& top) {
  top.validate();
  return expected_availability_wait(tc, top.l, top.m) + tc.c +
         expected_uplink_wait(tc, top.m, top.k);
}

double expected_client_update_time(const TimingConfig& tc, const TopologyConfig& top) {
  return static_cast<double>(top.l) / top.k * expected_cycle_time(tc, top);
}

double expected_cloud_rate(const TimingConfig& tc, const TopologyConfig& top) {
  return top.e / expected_cycle_time(tc, top);
}

double expected_staleness(const TopologyConfig& top) {
  top.validate();
  return static_cast<double>(top.n) / top.k - 1.0;
}

double ideal_expected_staleness(const TopologyConfig& top) {
  top.validate();
  return top.e / (top.alpha * top.beta) - 1.0;
}

double markov_bound(double expected_staleness, std::int64_t M) {
  if (M < 1) throw ValidationError("M", "bound must be a positive integer");
  return std::max(0.0, 1.0 - expected_staleness / static_cast<double>(M));
}

double staleness_bound_probability(const TopologyConfig& top, std::int64_t M) {
  return markov_bound(expected_staleness(top), M);
}

std::int64_t min_bound_for_confidence(double expected_staleness, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ValidationError("epsilon", "must lie in (0, 1)");
  }
  if (expected_staleness <= 0.0) return 1;
  auto M = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(expected_staleness / epsilon)));
  // The quotient can land one ulp off an integer; settle on the exact minimum.
  const double target = 1.0 - epsilon;
  while (markov_bound(expected_staleness, M) < target) ++M;
  while (M > 1 && markov_bound(expected_staleness, M - 1) >= target) --M;
  return M;
}

std::int64_t min_bound_for_confidence(const TopologyConfig& top, double epsilon) {
  return min_bound_for_confidence(expected_staleness(top), epsilon);
}

StalenessBound staleness_bound(const TopologyConfig& top, std::int64_t M) {
  StalenessBound b;
  b.expected_staleness = expected_staleness(top);
  b.bound_M = M;
  b.confidence = markov_bound(b.expected_staleness, M);
  return b;
}

}  // namespace ahfl::analytics
