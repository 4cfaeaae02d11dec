#include "ahfl/traces.hpp"

#include <stdexcept>

#include "ahfl/io.hpp"

namespace ahfl::traces {

using io::format_double;

std::string staleness_csv(const StalenessTrace& trace) {
  std::string out = "client_id,event_index,sim_time,staleness\n";
  for (std::size_t client = 0; client < trace.per_client.size(); ++client) {
    for (const auto& s : trace.per_client[client]) {
      out += std::to_string(client) + ',' + std::to_string(s.event_index) + ',' +
             format_double(s.time) + ',' + std::to_string(s.staleness) + '\n';
    }
  }
  return out;
}

std::string cycles_csv(std::span<const CycleRecord> cycles) {
  std::string out = "edge_id,cycle_index,cycle_duration\n";
  for (const auto& c : cycles) {
    out += std::to_string(c.edge_id) + ',' + std::to_string(c.cycle_index) + ',' +
           format_double(c.duration) + '\n';
  }
  return out;
}

std::string cloud_gaps_csv(std::span<const double> gaps) {
  std::string out = "update_index,gap\n";
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    out += std::to_string(i + 1) + ',' + format_double(gaps[i]) + '\n';
  }
  return out;
}

std::string loss_csv(std::span<const LossPoint> points) {
  std::string out = "cloud_version,sim_time,loss,grad_norm_sq\n";
  for (const auto& p : points) {
    out += std::to_string(p.cloud_version) + ',' + format_double(p.sim_time) + ',' +
           format_double(p.loss) + ',' + format_double(p.grad_norm_sq) + '\n';
  }
  return out;
}

namespace {

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path,
                                                std::size_t columns) {
  const auto lines = io::split(io::read_file(path), '\n');
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (io::trim(lines[i]).empty()) continue;
    auto cells = io::split(lines[i], ',');
    if (cells.size() != columns) {
      throw std::runtime_error(path.string() + ":" + std::to_string(i + 1) + ": expected " +
                               std::to_string(columns) + " columns");
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

std::vector<StalenessRow> read_staleness_csv(const std::filesystem::path& path) {
  std::vector<StalenessRow> out;
  for (const auto& c : read_rows(path, 4)) {
    out.push_back({std::stoi(c[0]), std::stoll(c[1]), std::stod(c[2]), std::stoll(c[3])});
  }
  return out;
}

std::vector<LossPoint> read_loss_csv(const std::filesystem::path& path) {
  std::vector<LossPoint> out;
  for (const auto& c : read_rows(path, 4)) {
    out.push_back({std::stoll(c[0]), std::stod(c[1]), std::stod(c[2]), std::stod(c[3])});
  }
  return out;
}

}  // namespace ahfl::traces
