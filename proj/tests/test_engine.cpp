#include <doctest.h>

#include <cmath>

#include "ahfl/analytics.hpp"
#include "ahfl/engine.hpp"
#include "ahfl/errors.hpp"
#include "ahfl/traces.hpp"

using namespace ahfl;

namespace {

RunConfig small_config(int n, int e, std::int64_t T, std::uint64_t seed) {
  RunConfig cfg;
  cfg.topology = TopologyConfig::from_fractions(n, e, 0.5, 0.5);
  cfg.d = 20;
  cfg.dataset_size = 2000;
  cfg.T = T;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("loss trace has T + 1 entries starting at the zero model") {
  const auto cfg = small_config(40, 4, 300, 1);
  const auto res = run(cfg);
  REQUIRE(res.loss_trace.size() == 301);
  const auto ds = generate_dataset(cfg.d, cfg.dataset_size, cfg.topology.n, cfg.seed);
  CHECK(res.loss_trace.front().loss ==
        doctest::Approx(ds.y.squaredNorm() / static_cast<double>(ds.size())).epsilon(1e-12));
  for (std::size_t i = 0; i < res.loss_trace.size(); ++i) {
    CHECK(res.loss_trace[i].cloud_version == static_cast<std::int64_t>(i));
    CHECK(std::isfinite(res.loss_trace[i].loss));
  }
  CHECK(res.min_grad_norm_sq >= 0.0);
  CHECK(res.final_model.size() == cfg.d);
}

TEST_CASE("single client degenerates to centralized proximal gradient descent") {
  RunConfig cfg;
  cfg.topology = TopologyConfig::from_quorums(1, 1, 1, 1);
  cfg.d = 10;
  cfg.dataset_size = 200;
  cfg.T = 60;
  cfg.learning.t_tilde = 50;
  cfg.seed = 3;
  const auto ds = generate_dataset(cfg.d, cfg.dataset_size, 1, cfg.seed);
  cfg.learning.eta = 0.5 / smoothness_constant(ds);
  const auto res = run(cfg, ds);
  const double initial = res.loss_trace.front().loss;
  for (std::size_t i = 1; i < res.loss_trace.size() && res.loss_trace[i - 1].loss > 1e-24 * initial; ++i) {
    CHECK(res.loss_trace[i].loss < res.loss_trace[i - 1].loss);
  }
  CHECK(res.loss_trace.back().loss < 1e-6 * res.loss_trace.front().loss);
  for (const auto& client : res.staleness_trace.per_client)
    for (const auto& s : client) CHECK(s.staleness == 0);
}

TEST_CASE("runs are bit-reproducible") {
  const auto cfg = small_config(40, 4, 200, 9);
  const auto a = run(cfg);
  const auto b = run(cfg);
  CHECK(traces::loss_csv(a.loss_trace) == traces::loss_csv(b.loss_trace));
  CHECK(traces::staleness_csv(a.staleness_trace) == traces::staleness_csv(b.staleness_trace));
  CHECK(a.final_model == b.final_model);
}

TEST_CASE("learning does not perturb the timing layer") {
  auto cfg = small_config(40, 4, 500, 12);
  const auto timing = run_timing_sim(cfg.topology, cfg.timing, cfg.T, cfg.seed);
  const auto trained = run(cfg);
  CHECK(traces::staleness_csv(trained.staleness_trace) == traces::staleness_csv(timing.trace));
  CHECK(traces::cycles_csv(trained.cycles) == traces::cycles_csv(timing.cycles));

  // A different learning setup must leave the staleness trace untouched.
  cfg.learning.batch = 5;
  cfg.learning.eta = 0.003;
  const auto other = run(cfg);
  CHECK(traces::staleness_csv(other.staleness_trace) == traces::staleness_csv(timing.trace));
}

TEST_CASE("each cloud model is a coordinate-wise convex combination of its inputs") {
  const auto cfg = small_config(40, 4, 400, 5);
  const auto ds = generate_dataset(cfg.d, cfg.dataset_size, cfg.topology.n, cfg.seed);
  std::int64_t calls = 0;
  bool convex = true;
  const auto res = run(cfg, ds, [&](std::int64_t version, const ModelVector& prev,
                                    const ModelVector& in, const ModelVector& out) {
    CHECK(version == ++calls);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      const double lo = std::min(prev[i], in[i]);
      const double hi = std::max(prev[i], in[i]);
      const double slack = 1e-12 * (1.0 + std::abs(lo) + std::abs(hi));
      convex = convex && out[i] >= lo - slack && out[i] <= hi + slack;
    }
  });
  CHECK(calls == cfg.T);
  CHECK(convex);
  CHECK(res.loss_trace.back().loss < 0.05 * res.loss_trace.front().loss);
}

TEST_CASE("min_gradient_norm stride semantics") {
  const auto cfg = small_config(40, 4, 300, 2);
  const auto res = run(cfg);
  const double s1 = min_gradient_norm(res, 1);
  const double s10 = min_gradient_norm(res, 10);
  CHECK(s1 <= s10);
  CHECK(s1 == res.min_grad_norm_sq);
  CHECK_THROWS_AS(min_gradient_norm(res, 0), ValidationError);

  RunResult at_opt;
  at_opt.loss_trace = {{0, 0.0, 1.0, 4.0}, {1, 1.0, 0.0, 0.0}};
  CHECK(min_gradient_norm(at_opt) == 0.0);
}

TEST_CASE("updates_to_reach finds the first crossing") {
  RunResult r;
  r.loss_trace = {{0, 0, 10.0, 0}, {1, 0, 5.0, 0}, {2, 0, 0.9, 0}, {3, 0, 2.0, 0}, {4, 0, 0.1, 0}};
  CHECK(updates_to_reach(r, 0.1) == 2);
  CHECK(updates_to_reach(r, 0.01) == 4);
  CHECK_FALSE(updates_to_reach(r, 0.001).has_value());
}

TEST_CASE("divergence is reported with the offending cycle") {
  auto cfg = small_config(40, 4, 50, 1);
  cfg.learning.eta = 50.0;
  cfg.learning.t_tilde = 200;
  try {
    run(cfg);
    FAIL("expected divergence");
  } catch (const DivergenceError& err) {
    CHECK(std::string(err.what()).find("cycle") != std::string::npos);
  }
}

TEST_CASE("config validation") {
  auto cfg = small_config(40, 4, 10, 1);
  cfg.T = 0;
  CHECK_THROWS_AS(run(cfg), ValidationError);
  cfg = small_config(40, 4, 10, 1);
  cfg.eval_rows = RowSet{};
  CHECK_THROWS_AS(run(cfg), ValidationError);
  cfg = small_config(40, 4, 10, 1);
  const auto ds = generate_dataset(cfg.d, cfg.dataset_size, 20, 1);
  CHECK_THROWS_AS(run(cfg, ds), ValidationError);
}

TEST_CASE("eval_rows restricts the logged loss") {
  auto cfg = small_config(40, 4, 20, 4);
  cfg.eval_rows = RowSet{0, 1, 2, 3, 4};
  const auto ds = generate_dataset(cfg.d, cfg.dataset_size, cfg.topology.n, cfg.seed);
  const auto res = run(cfg, ds);
  CHECK(res.loss_trace.back().loss == doctest::Approx(loss(res.final_model, *cfg.eval_rows, ds)));
}

TEST_CASE("engine staleness matches the closed form on a longer run") {
  RunConfig cfg;
  cfg.topology = TopologyConfig::from_fractions(40, 2, 0.5, 0.5);
  cfg.d = 5;
  cfg.dataset_size = 400;
  cfg.T = 20000;
  cfg.seed = 6;
  cfg.learning.t_tilde = 1;
  const auto res = run(cfg);
  const double expected = analytics::expected_staleness(cfg.topology);
  CHECK(std::abs(empirical_mean_staleness(res.staleness_trace, 0.1) / expected - 1.0) < 0.05);
}
