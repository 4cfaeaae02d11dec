#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ahfl/engine.hpp"
#include "ahfl/timing_sim.hpp"

// CSV layouts shared by every producer:
//   staleness.csv   client_id,event_index,sim_time,staleness
//   cycles.csv      edge_id,cycle_index,cycle_duration
//   cloud_gaps.csv  update_index,gap
//   loss.csv        cloud_version,sim_time,loss,grad_norm_sq
namespace ahfl::traces {

std::string staleness_csv(const StalenessTrace& trace);
std::string cycles_csv(std::span<const CycleRecord> cycles);
std::string cloud_gaps_csv(std::span<const double> gaps);
std::string loss_csv(std::span<const LossPoint> points);

struct StalenessRow {
  int client_id = 0;
  std::int64_t event_index = 0;
  double sim_time = 0.0;
  std::int64_t staleness = 0;
};

std::vector<StalenessRow> read_staleness_csv(const std::filesystem::path& path);
std::vector<LossPoint> read_loss_csv(const std::filesystem::path& path);

}  // namespace ahfl::traces
