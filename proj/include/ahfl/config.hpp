#pragma once

#include <cstdint>

namespace ahfl {

/// Client-edge-cloud layout. Clusters are symmetric: n = e * l.
struct TopologyConfig {
  int n = 100;  ///< total clients
  int e = 5;    ///< edge servers
  int l = 20;   ///< clients per edge
  int m = 10;   ///< availability quorum per cycle
  int k = 5;    ///< aggregation quorum per cycle
  double alpha = 0.5;
  double beta = 0.5;

  /// Derives l = n / e, m = max(1, round(beta * l)), k = max(1, round(alpha * m)).
  static TopologyConfig from_fractions(int n, int e, double alpha, double beta);

  /// Explicit quorums. alpha and beta are recorded as k/m and m/l.
  static TopologyConfig from_quorums(int n, int e, int m, int k);

  /// Throws ValidationError naming the offending field.
  void validate() const;

  friend bool operator==(const TopologyConfig&, const TopologyConfig&) = default;
};

struct TimingConfig {
  double lambda = 1.0;     ///< availability rate
  double c = 1.0;          ///< deterministic training duration
  double mu_tilde = 1.0;   ///< uplink rate

  void validate() const;

  friend bool operator==(const TimingConfig&, const TimingConfig&) = default;
};

struct LearningConfig {
  double rho = 0.01;             ///< proximal weight
  double eta = 0.01;             ///< learning rate
  int t_tilde = 10;              ///< local steps per cycle
  double sigma_exponent = 0.1;   ///< sigma(gap) = gap^-exponent
  int batch = 0;                 ///< minibatch size; 0 means the full shard

  void validate() const;

  friend bool operator==(const LearningConfig&, const LearningConfig&) = default;
};

}  // namespace ahfl
