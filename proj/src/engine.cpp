#include "ahfl/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "ahfl/errors.hpp"

namespace ahfl {

void RunConfig::validate() const {
  topology.validate();
  timing.validate();
  learning.validate();
  if (d < 1) throw ValidationError("learning.d", "must be a positive integer");
  if (dataset_size < static_cast<std::size_t>(topology.n)) {
    throw ValidationError("learning.dataset_size", "must be at least topology.n");
  }
  if (T < 1) throw ValidationError("run.T", "must be at least 1");
  if (eval_rows && eval_rows->empty()) throw ValidationError("eval_rows", "must be nonempty");
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class TrainingObserver final : public CycleObserver {
 public:
  TrainingObserver(const RunConfig& cfg, const Dataset& ds, RunResult& out,
                   const CloudUpdateHook& hook)
      : cfg_(cfg), ds_(ds), out_(out), hook_(hook), anchors_(cfg.topology.e), trained_(cfg.topology.e) {
    global_ = ModelVector::Zero(ds.dim());
    log(0, 0.0);
  }

  void on_cycle_start(int edge, std::int64_t, std::int64_t, double) override {
    anchors_[edge] = global_;
  }

  void on_dispatch(int edge, std::int64_t cycle, std::span<const int> clients, double) override {
    auto& slot = trained_[edge];
    slot.clear();
    for (int client : clients) {
      try {
        slot.emplace_back(client, local_train(anchors_[edge], anchors_[edge], ds_.shards[client], ds_,
                                              cfg_.learning,
                                              local_seed(cfg_.seed, edge, cycle, client)));
      } catch (const DivergenceError& err) {
        throw DivergenceError("client " + std::to_string(client) + " in edge " +
                              std::to_string(edge) + " cycle " + std::to_string(cycle) + ": " +
                              err.what());
      }
    }
  }

  void on_aggregate(int edge, std::int64_t cycle, std::span<const int> responders,
                    std::int64_t version_gap, std::int64_t new_version, double time) override {
    std::vector<int> ids(responders.begin(), responders.end());
    std::sort(ids.begin(), ids.end());

    std::vector<WeightedModel> models;
    models.reserve(ids.size());
    for (int client : ids) {
      auto it = std::find_if(trained_[edge].begin(), trained_[edge].end(),
                             [client](const auto& p) { return p.first == client; });
      models.push_back({std::move(it->second), ds_.shards[client].size()});
    }
    trained_[edge].clear();

    const ModelVector edge_model = edge_aggregate(models);
    ModelVector updated = cloud_aggregate(global_, edge_model, version_gap, cfg_.learning);
    if (hook_) hook_(new_version, global_, edge_model, updated);
    global_ = std::move(updated);
    log(new_version, time);
    if (!std::isfinite(out_.loss_trace.back().loss) || !global_.allFinite()) {
      throw DivergenceError("global model became non-finite at cloud version " +
                            std::to_string(new_version) + " (edge " + std::to_string(edge) +
                            " cycle " + std::to_string(cycle) + ")");
    }
  }

  const ModelVector& global() const { return global_; }

 private:
  void log(std::int64_t version, double time) {
    LossPoint p{version, time, 0.0, 0.0};
    const LossAndGradNorm full = evaluate(global_, ds_);
    p.grad_norm_sq = full.grad_norm_sq;
    p.loss = cfg_.eval_rows ? loss(global_, *cfg_.eval_rows, ds_) : full.loss;
    out_.loss_trace.push_back(p);
  }

  const RunConfig& cfg_;
  const Dataset& ds_;
  RunResult& out_;
  const CloudUpdateHook& hook_;
  ModelVector global_;
  std::vector<ModelVector> anchors_;
  std::vector<std::vector<std::pair<int, ModelVector>>> trained_;
};

}  // namespace

std::uint64_t local_seed(std::uint64_t run_seed, int edge, std::int64_t cycle, int client) {
  std::uint64_t h = splitmix(run_seed);
  h = splitmix(h ^ static_cast<std::uint64_t>(edge));
  h = splitmix(h ^ static_cast<std::uint64_t>(cycle));
  return splitmix(h ^ static_cast<std::uint64_t>(client));
}

RunResult run(const RunConfig& cfg) {
  cfg.validate();
  const Dataset ds = generate_dataset(cfg.d, cfg.dataset_size, cfg.topology.n, cfg.seed);
  return run(cfg, ds);
}

RunResult run(const RunConfig& cfg, const Dataset& ds, const CloudUpdateHook& hook) {
  cfg.validate();
  if (static_cast<int>(ds.shards.size()) != cfg.topology.n) {
    throw ValidationError("topology.n", "dataset has " + std::to_string(ds.shards.size()) +
                                            " shards but the topology has " +
                                            std::to_string(cfg.topology.n) + " clients");
  }

  RunResult result;
  result.loss_trace.reserve(static_cast<std::size_t>(cfg.T) + 1);
  TrainingObserver observer(cfg, ds, result, hook);
  TimingSimulator sim(cfg.topology, cfg.timing, cfg.seed);
  TimingResult timing = sim.run(cfg.T, &observer);

  result.staleness_trace = std::move(timing.trace);
  result.cloud_gaps = std::move(timing.cloud_gaps);
  result.cycles = std::move(timing.cycles);
  result.final_model = observer.global();
  result.min_grad_norm_sq = min_gradient_norm(result, 1);
  return result;
}

double min_gradient_norm(const RunResult& result, std::int64_t stride) {
  if (stride < 1) throw ValidationError("stride", "must be positive");
  if (result.loss_trace.empty()) throw InsufficientDataError("empty loss trace");
  double best = result.loss_trace.front().grad_norm_sq;
  for (std::size_t i = 0; i < result.loss_trace.size(); i += static_cast<std::size_t>(stride)) {
    best = std::min(best, result.loss_trace[i].grad_norm_sq);
  }
  return best;
}

std::optional<std::int64_t> updates_to_reach(const RunResult& result, double fraction) {
  if (result.loss_trace.empty()) return std::nullopt;
  const double threshold = fraction * result.loss_trace.front().loss;
  for (const auto& p : result.loss_trace) {
    if (p.loss <= threshold) return p.cloud_version;
  }
  return std::nullopt;
}

}  // namespace ahfl
