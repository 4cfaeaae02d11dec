#include "ahfl/fl_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ahfl/errors.hpp"
#include "ahfl/io.hpp"
#include "ahfl/random.hpp"

namespace ahfl {

RowSet Dataset::all_rows() const {
  RowSet rows(size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

std::vector<RowSet> make_shards(std::size_t size, int n) {
  if (n < 1) throw ValidationError("n", "client count must be positive");
  if (size < static_cast<std::size_t>(n)) {
    throw ValidationError("size", "dataset must hold at least one row per client");
  }
  std::vector<RowSet> shards(n);
  const std::size_t per = size / n;
  for (int i = 0; i < n; ++i) {
    shards[i].resize(per);
    std::iota(shards[i].begin(), shards[i].end(), per * i);
  }
  for (std::size_t row = per * n, i = 0; row < size; ++row, ++i) shards[i].push_back(row);
  return shards;
}

Dataset generate_dataset(int d, std::size_t size, int n, std::uint64_t seed) {
  if (d < 1) throw ValidationError("d", "dimension must be positive");
  Dataset ds;
  ds.seed = seed;
  ds.shards = make_shards(size, n);

  Rng rng = make_rng(seed, Stream::kDataset);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  ds.w_star.resize(d);
  for (int j = 0; j < d; ++j) ds.w_star[j] = unit(rng);

  const Eigen::VectorXd center = (1.5 / d) * ds.w_star;
  ds.X.resize(static_cast<Eigen::Index>(size), d);
  for (std::size_t r = 0; r < size; ++r) {
    const double sign = coin(rng) ? 1.0 : -1.0;
    for (int j = 0; j < d; ++j) ds.X(r, j) = sign * center[j] + normal(rng);
  }
  ds.y = ds.X * ds.w_star;
  return ds;
}

namespace {

void require_rows(const RowSet& rows) {
  if (rows.empty()) throw ValidationError("rows", "row set must be nonempty");
}

DesignMatrix gather_rows(const Dataset& ds, const RowSet& rows) {
  DesignMatrix out(static_cast<Eigen::Index>(rows.size()), ds.X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = ds.X.row(rows[i]);
  return out;
}

Eigen::VectorXd gather_targets(const Dataset& ds, const RowSet& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = ds.y[rows[i]];
  return out;
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

double loss(const ModelVector& theta, const RowSet& rows, const Dataset& ds) {
  require_rows(rows);
  double sum = 0.0;
  for (std::size_t r : rows) {
    const double res = ds.X.row(r).dot(theta) - ds.y[r];
    sum += res * res;
  }
  return sum / static_cast<double>(rows.size());
}

double loss(const ModelVector& theta, const Dataset& ds) {
  return (ds.X * theta - ds.y).squaredNorm() / static_cast<double>(ds.size());
}

Eigen::VectorXd gradient(const ModelVector& theta, const RowSet& rows, const Dataset& ds) {
  require_rows(rows);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(ds.dim());
  for (std::size_t r : rows) {
    const double res = ds.X.row(r).dot(theta) - ds.y[r];
    g += res * ds.X.row(r).transpose();
  }
  return (2.0 / static_cast<double>(rows.size())) * g;
}

Eigen::VectorXd gradient(const ModelVector& theta, const Dataset& ds) {
  const Eigen::VectorXd residual = ds.X * theta - ds.y;
  return (2.0 / static_cast<double>(ds.size())) * (ds.X.transpose() * residual);
}

LossAndGradNorm evaluate(const ModelVector& theta, const Dataset& ds) {
  const auto count = static_cast<double>(ds.size());
  const Eigen::VectorXd residual = ds.X * theta - ds.y;
  const Eigen::VectorXd grad = (2.0 / count) * (ds.X.transpose() * residual);
  return {residual.squaredNorm() / count, grad.squaredNorm()};
}

ModelVector local_train(const ModelVector& theta_init, const ModelVector& anchor, const RowSet& shard,
                        const Dataset& ds, const LearningConfig& lc, std::uint64_t seed) {
  require_rows(shard);
  lc.validate();

  const std::size_t batch =
      lc.batch <= 0 ? shard.size() : std::min<std::size_t>(lc.batch, shard.size());
  const bool full = batch == shard.size();

  // The full-shard path reuses one gathered block across all steps.
  DesignMatrix Xs;
  Eigen::VectorXd ys;
  if (full) {
    Xs = gather_rows(ds, shard);
    ys = gather_targets(ds, shard);
  }

  Rng rng = make_rng(seed, Stream::kLearning);
  RowSet pool = shard;
  RowSet picked(batch);

  ModelVector theta = theta_init;
  for (int step = 0; step < lc.t_tilde; ++step) {
    Eigen::VectorXd g;
    if (full) {
      g = (2.0 / static_cast<double>(batch)) * (Xs.transpose() * (Xs * theta - ys));
    } else {
      // Partial Fisher-Yates: the first `batch` slots become the minibatch.
      for (std::size_t i = 0; i < batch; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
      std::copy_n(pool.begin(), batch, picked.begin());
      g = gradient(theta, picked, ds);
    }
    g += lc.rho * (theta - anchor);
    theta -= lc.eta * g;
    if (!all_finite(theta)) {
      throw DivergenceError("local SGD diverged at step " + std::to_string(step + 1) +
                            " (eta=" + io::format_double(lc.eta) + " is too large)");
    }
  }
  return theta;
}

ModelVector edge_aggregate(std::span<const WeightedModel> models) {
  if (models.empty()) throw ValidationError("models", "edge aggregation needs at least one model");
  std::size_t total = 0;
  for (const auto& wm : models) {
    if (wm.weight == 0) throw ValidationError("weight", "shard sizes must be positive");
    total += wm.weight;
  }
  ModelVector out = ModelVector::Zero(models.front().model.size());
  for (const auto& wm : models) {
    out += (static_cast<double>(wm.weight) / static_cast<double>(total)) * wm.model;
  }
  return out;
}

double staleness_weight(std::int64_t version_gap, double exponent) {
  if (version_gap < 0) throw ValidationError("version_gap", "must be nonnegative");
  const auto gap = static_cast<double>(std::max<std::int64_t>(1, version_gap));
  return std::pow(gap, -exponent);
}

ModelVector cloud_aggregate(const ModelVector& global, const ModelVector& incoming,
                            std::int64_t version_gap, const LearningConfig& lc) {
  const double sigma = staleness_weight(version_gap, lc.sigma_exponent);
  if (sigma == 1.0) return incoming;
  return (1.0 - sigma) * global + sigma * incoming;
}

double smoothness_constant(const Dataset& ds, double rel_tol, int max_iter) {
  if (ds.size() == 0) throw ValidationError("dataset", "must be nonempty");
  const Eigen::MatrixXd gram = ds.X.transpose() * ds.X;
  const auto scale = 2.0 / static_cast<double>(ds.size());

  Rng rng = make_rng(0x5eedULL, Stream::kLearning);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(gram.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  v.normalize();

  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd gv = gram * v;
    const double rayleigh = v.dot(gv);
    if (rayleigh <= 0.0) return 0.0;  // X == 0
    const double residual = (gv - rayleigh * v).norm();
    if (residual <= rel_tol * rayleigh) return scale * rayleigh;
    v = gv / gv.norm();
  }
  throw std::runtime_error("power iteration did not converge in " + std::to_string(max_iter) +
                           " steps; data may be degenerate");
}

void save_dataset(const Dataset& ds, const std::filesystem::path& csv_path,
                  const std::filesystem::path& meta_path) {
  std::string csv;
  for (int j = 0; j < ds.dim(); ++j) csv += "x" + std::to_string(j) + ",";
  csv += "y\n";
  for (Eigen::Index r = 0; r < ds.X.rows(); ++r) {
    for (int j = 0; j < ds.dim(); ++j) {
      csv += io::format_double(ds.X(r, j));
      csv += ',';
    }
    csv += io::format_double(ds.y[r]);
    csv += '\n';
  }
  std::string wstar;
  for (int j = 0; j < ds.dim(); ++j) {
    if (j) wstar += ',';
    wstar += io::format_double(ds.w_star[j]);
  }
  io::write_atomic(csv_path, csv);
  io::write_atomic(meta_path, io::format_summary({{"d", std::to_string(ds.dim())},
                                                  {"size", std::to_string(ds.size())},
                                                  {"n", std::to_string(ds.shards.size())},
                                                  {"seed", std::to_string(ds.seed)},
                                                  {"w_star", wstar}}));
}

Dataset load_dataset(const std::filesystem::path& csv_path, const std::filesystem::path& meta_path) {
  int d = 0;
  std::size_t size = 0;
  int n = 0;
  Dataset ds;
  std::vector<std::string> wstar;
  for (const auto& [k, v] : io::parse_summary(io::read_file(meta_path))) {
    if (k == "d") d = std::stoi(v);
    else if (k == "size") size = std::stoull(v);
    else if (k == "n") n = std::stoi(v);
    else if (k == "seed") ds.seed = std::stoull(v);
    else if (k == "w_star") wstar = io::split(v, ',');
  }
  if (d < 1 || size == 0 || n < 1 || static_cast<int>(wstar.size()) != d) {
    throw std::runtime_error("malformed dataset metadata: " + meta_path.string());
  }
  ds.w_star.resize(d);
  for (int j = 0; j < d; ++j) ds.w_star[j] = std::stod(wstar[j]);

  const auto lines = io::split(io::read_file(csv_path), '\n');
  ds.X.resize(static_cast<Eigen::Index>(size), d);
  ds.y.resize(static_cast<Eigen::Index>(size));
  std::size_t row = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (io::trim(lines[li]).empty()) continue;
    const auto cells = io::split(lines[li], ',');
    if (static_cast<int>(cells.size()) != d + 1 || row >= size) {
      throw std::runtime_error("malformed dataset row " + std::to_string(li + 1) + " in " +
                               csv_path.string());
    }
    for (int j = 0; j < d; ++j) ds.X(row, j) = std::stod(cells[j]);
    ds.y[row] = std::stod(cells[d]);
    ++row;
  }
  if (row != size) throw std::runtime_error("dataset row count does not match metadata");
  ds.shards = make_shards(size, n);
  return ds;
}

}  // namespace ahfl
