#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include <Eigen/Eigenvalues>

#include "ahfl/errors.hpp"
#include "ahfl/fl_core.hpp"
#include "oracles.hpp"

using namespace ahfl;

namespace {

Dataset tiny(std::vector<std::vector<double>> rows, std::vector<double> y) {
  Dataset ds;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.front().size());
  ds.X.resize(n, d);
  ds.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) ds.X(i, j) = rows[i][j];
    ds.y[i] = y[i];
  }
  ds.w_star = ModelVector::Zero(d);
  ds.shards = make_shards(rows.size(), 1);
  return ds;
}

ModelVector vec(std::initializer_list<double> v) {
  ModelVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ModelVector random_vector(int d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  ModelVector v(d);
  for (int i = 0; i < d; ++i) v[i] = n(rng);
  return v;
}

LearningConfig learning(double rho, double eta, int steps) {
  LearningConfig lc;
  lc.rho = rho;
  lc.eta = eta;
  lc.t_tilde = steps;
  return lc;
}

}  // namespace

TEST_CASE("dataset shapes and sharding") {
  const auto ds = generate_dataset(100, 10000, 100, 1);
  CHECK(ds.X.rows() == 10000);
  CHECK(ds.X.cols() == 100);
  REQUIRE(ds.shards.size() == 100);
  for (const auto& s : ds.shards) CHECK(s.size() == 100);

  const auto ds400 = generate_dataset(100, 10000, 400, 1);
  REQUIRE(ds400.shards.size() == 400);
  for (const auto& s : ds400.shards) CHECK(s.size() == 25);

  for (int j = 0; j < 100; ++j) {
    CHECK(ds.w_star[j] >= 0.0);
    CHECK(ds.w_star[j] <= 1.0);
  }
}

TEST_CASE("shards are disjoint and cover every row, remainder dealt round-robin") {
  for (auto [size, n] : {std::pair<std::size_t, int>{10, 3}, {7, 7}, {100, 9}, {5, 1}}) {
    const auto shards = make_shards(size, n);
    std::vector<int> hits(size, 0);
    std::size_t smallest = size, largest = 0;
    for (const auto& s : shards) {
      for (auto r : s) hits[r] += 1;
      smallest = std::min(smallest, s.size());
      largest = std::max(largest, s.size());
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    CHECK(largest - smallest <= 1);
  }
  CHECK_THROWS_AS(make_shards(3, 4), ValidationError);
}

TEST_CASE("mixture rows straddle +/- (1.5/d) w*") {
  const int d = 4;
  const auto ds = generate_dataset(d, 40000, 4, 5);
  const ModelVector center = (1.5 / d) * ds.w_star;
  // Equal-weight symmetric mixture: mean 0, covariance I + c c^T.
  const Eigen::VectorXd mean = ds.X.colwise().mean();
  CHECK(mean.norm() < 0.05);
  const Eigen::MatrixXd centered = ds.X.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(ds.size());
  const Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(d, d) + center * center.transpose();
  CHECK((cov - expected).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("loss and gradient vanish at w*") {
  const auto ds = generate_dataset(100, 2000, 20, 3);
  const double scale = ds.y.squaredNorm() / static_cast<double>(ds.size());
  CHECK(loss(ds.w_star, ds) <= 1e-10 * scale);
  CHECK(loss(ds.w_star, ds.shards[3], ds) <= 1e-10 * scale);
  CHECK(gradient(ds.w_star, ds).norm() <= 1e-10 * scale);
  CHECK(gradient(ds.w_star, ds.shards[7], ds).norm() <= 1e-10 * scale);
}

TEST_CASE("loss and gradient hand-computed cases") {
  const auto ds = tiny({{1, 0, 0}}, {2});
  CHECK(loss(vec({0, 0, 0}), ds) == 4.0);
  CHECK(loss(vec({0, 0, 0}), RowSet{0}, ds) == 4.0);

  const auto ds2 = tiny({{1, 0}}, {0});
  const auto g = gradient(vec({1, 0}), RowSet{0}, ds2);
  CHECK(g[0] == 2.0);
  CHECK(g[1] == 0.0);

  // theta = w* + delta e1 on one row x gives (delta x_1)^2.
  const auto ds3 = tiny({{0.7, -1.2, 2.0}}, {0.7 * 0.3 - 1.2 * 0.1 + 2.0 * 0.5});
  const double delta = 0.25;
  CHECK(loss(vec({0.3 + delta, 0.1, 0.5}), ds3) == doctest::Approx(std::pow(delta * 0.7, 2)));

  CHECK_THROWS_AS(loss(vec({0, 0, 0}), RowSet{}, ds), ValidationError);
  CHECK_THROWS_AS(gradient(vec({0, 0, 0}), RowSet{}, ds), ValidationError);
}

TEST_CASE("gradient matches central finite differences") {
  const auto ds = generate_dataset(12, 600, 6, 17);
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick_shard(0, 5);
  for (int probe = 0; probe < 20; ++probe) {
    const ModelVector theta = random_vector(12, rng, 2.0);
    const RowSet& rows = ds.shards[pick_shard(rng)];
    auto f = [&](const std::vector<double>& x) {
      return loss(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())),
                  rows, ds);
    };
    const auto fd = oracle::finite_difference(f, std::vector<double>(theta.data(), theta.data() + 12));
    const Eigen::VectorXd g = gradient(theta, rows, ds);
    const Eigen::VectorXd fdv = Eigen::Map<const Eigen::VectorXd>(fd.data(), 12);
    CHECK((g - fdv).norm() <= 1e-5 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("full-data and row-set paths agree") {
  const auto ds = generate_dataset(10, 300, 3, 4);
  std::mt19937_64 rng(8);
  const ModelVector theta = random_vector(10, rng);
  const auto all = ds.all_rows();
  CHECK(loss(theta, all, ds) == doctest::Approx(loss(theta, ds)).epsilon(1e-12));
  CHECK((gradient(theta, all, ds) - gradient(theta, ds)).norm() < 1e-10);
  const auto both = evaluate(theta, ds);
  CHECK(both.loss == doctest::Approx(loss(theta, ds)).epsilon(1e-12));
  CHECK(both.grad_norm_sq == doctest::Approx(gradient(theta, ds).squaredNorm()).epsilon(1e-12));
}

TEST_CASE("local training edge cases") {
  const auto ds = generate_dataset(20, 400, 4, 6);
  const auto& shard = ds.shards[1];

  SUBCASE("starting at w* with anchor w* stays put") {
    const auto out = local_train(ds.w_star, ds.w_star, shard, ds, learning(0.37, 0.01, 10), 1);
    CHECK((out - ds.w_star).norm() < 1e-12);
  }
  SUBCASE("zero steps returns the initial model") {
    std::mt19937_64 rng(3);
    const ModelVector theta = random_vector(20, rng);
    const auto out = local_train(theta, ModelVector::Zero(20), shard, ds, learning(0.01, 0.01, 0), 1);
    CHECK(out == theta);
  }
  SUBCASE("huge learning rate is reported as divergence") {
    CHECK_THROWS_AS(local_train(ModelVector::Zero(20), ModelVector::Zero(20), shard, ds,
                                learning(0.0, 1e6, 200), 1),
                    DivergenceError);
  }
  SUBCASE("empty shard is rejected") {
    CHECK_THROWS_AS(local_train(ModelVector::Zero(20), ModelVector::Zero(20), RowSet{}, ds,
                                learning(0.0, 0.01, 1), 1),
                    ValidationError);
  }
}

TEST_CASE("one full-batch proximal step matches the closed form in 1-d") {
  // L(theta) = (x theta - y)^2, proximal anchor a.
  const double x = 1.5, y = -0.4, theta0 = 0.8, anchor = 0.2, eta = 0.05, rho = 0.3;
  const auto ds = tiny({{x}}, {y});
  const double expected = theta0 - eta * (2.0 * x * (x * theta0 - y) + rho * (theta0 - anchor));
  const auto out = local_train(vec({theta0}), vec({anchor}), RowSet{0}, ds, learning(rho, eta, 1), 0);
  CHECK(out[0] == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("minibatch SGD is reproducible for a fixed seed") {
  const auto ds = generate_dataset(10, 500, 5, 12);
  LearningConfig lc = learning(0.01, 0.01, 15);
  lc.batch = 8;
  const ModelVector z = ModelVector::Zero(10);
  const auto a = local_train(z, z, ds.shards[2], ds, lc, 99);
  const auto b = local_train(z, z, ds.shards[2], ds, lc, 99);
  const auto c = local_train(z, z, ds.shards[2], ds, lc, 100);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(loss(a, ds.shards[2], ds) < loss(z, ds.shards[2], ds));
}

TEST_CASE("full-batch local training with rho = 0 and eta < 1/L decreases the loss every step") {
  const auto ds = generate_dataset(10, 200, 1, 31);
  const double L = smoothness_constant(ds);
  const LearningConfig one = learning(0.0, 0.9 / L, 1);
  ModelVector theta = ModelVector::Zero(10);
  const double initial = loss(theta, ds);
  double prev = initial;
  // Stops once rounding noise dominates.
  for (int step = 0; step < 300 && prev > 1e-24 * initial; ++step) {
    theta = local_train(theta, theta, ds.shards[0], ds, one, 0);
    const double cur = loss(theta, ds);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(prev < 1e-6 * initial);
}

TEST_CASE("edge aggregation") {
  const auto a = vec({1.0, -2.0});
  const auto b = vec({3.0, 6.0});
  CHECK(edge_aggregate(std::vector<WeightedModel>{{a, 10}}) == a);

  const auto mid = edge_aggregate(std::vector<WeightedModel>{{a, 25}, {b, 25}});
  CHECK(mid[0] == doctest::Approx(2.0));
  CHECK(mid[1] == doctest::Approx(2.0));

  const auto skew = edge_aggregate(std::vector<WeightedModel>{{a, 25}, {b, 75}});
  CHECK(skew[0] == doctest::Approx(0.25 * 1.0 + 0.75 * 3.0));
  CHECK(skew[1] == doctest::Approx(0.25 * -2.0 + 0.75 * 6.0));

  CHECK_THROWS_AS(edge_aggregate(std::vector<WeightedModel>{}), ValidationError);
  CHECK_THROWS_AS(edge_aggregate(std::vector<WeightedModel>{{a, 0}}), ValidationError);
}

TEST_CASE("edge aggregation is permutation-invariant and idempotent") {
  std::mt19937_64 rng(55);
  std::uniform_int_distribution<std::size_t> size(1, 100);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<WeightedModel> models;
    const int count = 1 + trial % 7;
    for (int i = 0; i < count; ++i) models.push_back({random_vector(6, rng), size(rng)});
    const auto base = edge_aggregate(models);
    std::shuffle(models.begin(), models.end(), rng);
    CHECK((edge_aggregate(models) - base).norm() <= 1e-12 * (1.0 + base.norm()));

    std::vector<WeightedModel> same(count, {base, 0});
    for (auto& m : same) m.weight = size(rng);
    CHECK((edge_aggregate(same) - base).norm() <= 1e-12 * (1.0 + base.norm()));
  }
}

TEST_CASE("cloud aggregation weight") {
  LearningConfig lc;
  const auto g = vec({0.0, 4.0});
  const auto in = vec({2.0, 0.0});
  CHECK(cloud_aggregate(g, in, 1, lc) == in);
  CHECK(cloud_aggregate(g, in, 0, lc) == in);
  const auto half = cloud_aggregate(g, in, 1024, lc);
  CHECK(half[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(half[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(staleness_weight(1024, 0.1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(staleness_weight(-1, 0.1), ValidationError);
}

TEST_CASE("cloud aggregation is a coordinate-wise convex combination") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::int64_t> gap(0, 5000);
  LearningConfig lc;
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = random_vector(8, rng, 3.0);
    const auto in = random_vector(8, rng, 3.0);
    const auto out = cloud_aggregate(g, in, gap(rng), lc);
    for (int i = 0; i < 8; ++i) {
      CHECK(out[i] >= std::min(g[i], in[i]) - 1e-12);
      CHECK(out[i] <= std::max(g[i], in[i]) + 1e-12);
    }
  }
  for (std::int64_t a = 1; a < 200; ++a) CHECK(staleness_weight(a + 1, 0.1) < staleness_weight(a, 0.1));
}

TEST_CASE("smoothness constant special cases") {
  const auto eye = tiny({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {0, 0, 0});
  CHECK(smoothness_constant(eye) == doctest::Approx(2.0 / 3.0).epsilon(1e-8));

  const auto one = tiny({{1.0, -2.0, 0.5}}, {0});
  CHECK(smoothness_constant(one) == doctest::Approx(2.0 * 5.25).epsilon(1e-8));

  auto ds = generate_dataset(15, 300, 3, 2);
  const double base = smoothness_constant(ds);
  ds.X *= 3.0;
  CHECK(smoothness_constant(ds) == doctest::Approx(9.0 * base).epsilon(1e-7));
}

TEST_CASE("power iteration agrees with a dense eigensolver") {
  const auto ds = generate_dataset(100, 10000, 100, 1);
  const Eigen::MatrixXd gram = ds.X.transpose() * ds.X;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  const double top = solver.eigenvalues().maxCoeff() * 2.0 / static_cast<double>(ds.size());
  CHECK(smoothness_constant(ds) == doctest::Approx(top).epsilon(1e-8));
}

TEST_CASE("gradient differences are L-Lipschitz") {
  const auto ds = generate_dataset(30, 3000, 10, 8);
  const double L = smoothness_constant(ds);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_vector(30, rng, 2.0);
    const auto b = random_vector(30, rng, 2.0);
    const double lhs = (gradient(a, ds) - gradient(b, ds)).norm();
    CHECK(lhs <= L * (a - b).norm() * (1.0 + 1e-8));
  }
}

TEST_CASE("dataset CSV round trip is exact") {
  const auto ds = generate_dataset(7, 53, 5, 91);
  const auto dir = std::filesystem::temp_directory_path() / "ahfl_dataset_rt";
  std::filesystem::remove_all(dir);
  save_dataset(ds, dir / "data.csv", dir / "data.meta");
  const auto back = load_dataset(dir / "data.csv", dir / "data.meta");
  CHECK(back.X == ds.X);
  CHECK(back.y == ds.y);
  CHECK(back.w_star == ds.w_star);
  CHECK(back.seed == ds.seed);
  CHECK(back.shards == ds.shards);
  std::filesystem::remove_all(dir);
}
