#include "ahfl/config.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ahfl/errors.hpp"

namespace ahfl {

namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ValidationError(field, what);
}

}  // namespace

TopologyConfig TopologyConfig::from_fractions(int n, int e, double alpha, double beta) {
  require(e >= 1, "topology.e", "must be a positive integer");
  require(n >= 1, "topology.n", "must be a positive integer");
  require(n % e == 0, "topology.n", "must be divisible by topology.e (symmetric clusters)");
  require(alpha > 0.0 && alpha < 1.0, "topology.alpha", "must lie in (0, 1)");
  require(beta > 0.0 && beta < 1.0, "topology.beta", "must lie in (0, 1)");

  TopologyConfig top;
  top.n = n;
  top.e = e;
  top.l = n / e;
  top.alpha = alpha;
  top.beta = beta;
  top.m = std::max(1, static_cast<int>(std::lround(beta * top.l)));
  top.k = std::max(1, static_cast<int>(std::lround(alpha * top.m)));
  top.validate();
  return top;
}

TopologyConfig TopologyConfig::from_quorums(int n, int e, int m, int k) {
  require(e >= 1, "topology.e", "must be a positive integer");
  require(n >= 1, "topology.n", "must be a positive integer");
  require(n % e == 0, "topology.n", "must be divisible by topology.e (symmetric clusters)");
  TopologyConfig top;
  top.n = n;
  top.e = e;
  top.l = n / e;
  top.m = m;
  top.k = k;
  require(m >= 1 && m <= top.l, "topology.m", "must satisfy 1 <= m <= l");
  require(k >= 1 && k <= m, "topology.k", "must satisfy 1 <= k <= m");
  top.alpha = static_cast<double>(k) / m;
  top.beta = static_cast<double>(m) / top.l;
  top.validate();
  return top;
}

void TopologyConfig::validate() const {
  require(n >= 1, "topology.n", "must be a positive integer");
  require(e >= 1, "topology.e", "must be a positive integer");
  require(l >= 1, "topology.l", "must be a positive integer");
  require(n == e * l, "topology.n", "must equal e * l");
  require(m >= 1 && m <= l, "topology.m", "must satisfy 1 <= m <= l");
  require(k >= 1 && k <= m, "topology.k", "must satisfy 1 <= k <= m");
  require(alpha > 0.0 && alpha <= 1.0, "topology.alpha", "must lie in (0, 1]");
  require(beta > 0.0 && beta <= 1.0, "topology.beta", "must lie in (0, 1]");
}

void TimingConfig::validate() const {
  require(std::isfinite(lambda) && lambda > 0.0, "timing.lambda", "must be positive");
  require(std::isfinite(mu_tilde) && mu_tilde > 0.0, "timing.mu_tilde", "must be positive");
  require(std::isfinite(c) && c >= 0.0, "timing.c", "must be nonnegative");
}

void LearningConfig::validate() const {
  require(std::isfinite(rho) && rho >= 0.0, "learning.rho", "must be nonnegative");
  require(std::isfinite(eta) && eta > 0.0, "learning.eta", "must be positive");
  require(t_tilde >= 0, "learning.t_tilde", "must be nonnegative");
  require(std::isfinite(sigma_exponent) && sigma_exponent > 0.0, "learning.sigma_exponent",
          "must be positive");
  require(batch >= 0, "learning.batch", "must be nonnegative (0 selects the full shard)");
}

}  // namespace ahfl
