#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ahfl/config.hpp"

// Learning side: synthetic regression data, loss and gradient, proximal local
// SGD, and the edge/cloud aggregation rules.
namespace ahfl {

using ModelVector = Eigen::VectorXd;
using RowSet = std::vector<std::size_t>;
using DesignMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Dataset {
  DesignMatrix X;             ///< |D| x d
  Eigen::VectorXd y;          ///< noiseless targets X w*
  std::vector<RowSet> shards; ///< D_i, one per client
  ModelVector w_star;
  std::uint64_t seed = 0;

  std::size_t size() const { return static_cast<std::size_t>(X.rows()); }
  int dim() const { return static_cast<int>(X.cols()); }
  RowSet all_rows() const;
};

/// Rows x ~ 1/2 N((1.5/d) w*, I) + 1/2 N(-(1.5/d) w*, I), w* ~ U[0,1]^d, y = x^T w*.
/// Rows are split into n contiguous blocks of size/n; leftover rows are dealt round-robin.
Dataset generate_dataset(int d, std::size_t size, int n, std::uint64_t seed);

/// Partition used by generate_dataset and load_dataset.
std::vector<RowSet> make_shards(std::size_t size, int n);

/// (1/|rows|) ||X_rows theta - y_rows||^2.
double loss(const ModelVector& theta, const RowSet& rows, const Dataset& ds);
/// Loss over the whole dataset.
double loss(const ModelVector& theta, const Dataset& ds);

/// (2/|rows|) X_rows^T (X_rows theta - y_rows).
Eigen::VectorXd gradient(const ModelVector& theta, const RowSet& rows, const Dataset& ds);
Eigen::VectorXd gradient(const ModelVector& theta, const Dataset& ds);

/// Loss and squared gradient norm over the whole dataset from one residual.
struct LossAndGradNorm {
  double loss = 0.0;
  double grad_norm_sq = 0.0;
};
LossAndGradNorm evaluate(const ModelVector& theta, const Dataset& ds);

/// t_tilde SGD steps on L(theta; shard) + (rho/2)||theta - anchor||^2, starting
/// at theta_init. Minibatches (lc.batch > 0) are drawn without replacement from
/// an RNG seeded by `seed`; the full shard is used otherwise.
/// Throws DivergenceError on any non-finite iterate.
ModelVector local_train(const ModelVector& theta_init, const ModelVector& anchor, const RowSet& shard,
                        const Dataset& ds, const LearningConfig& lc, std::uint64_t seed);

struct WeightedModel {
  ModelVector model;
  std::size_t weight = 0;  ///< |D_i|
};

/// sum_i |D_i| / |D_K| theta_i, accumulated in input order.
ModelVector edge_aggregate(std::span<const WeightedModel> models);

/// sigma(gap) = max(1, gap)^(-exponent).
double staleness_weight(std::int64_t version_gap, double exponent);

/// (1 - sigma) global + sigma incoming.
ModelVector cloud_aggregate(const ModelVector& global, const ModelVector& incoming,
                            std::int64_t version_gap, const LearningConfig& lc);

/// L = (2/|D|) ||X^T X||_2 by power iteration on the Gram matrix. Iteration stops
/// once ||G v - r v|| <= rel_tol * r for the Rayleigh quotient r.
/// Throws std::runtime_error if that does not happen within max_iter steps.
double smoothness_constant(const Dataset& ds, double rel_tol = 1e-8, int max_iter = 200000);

/// CSV with columns x0..x{d-1},y plus a `key: value` sidecar carrying d, size, n, seed, w_star.
void save_dataset(const Dataset& ds, const std::filesystem::path& csv_path,
                  const std::filesystem::path& meta_path);
Dataset load_dataset(const std::filesystem::path& csv_path, const std::filesystem::path& meta_path);

}  // namespace ahfl
