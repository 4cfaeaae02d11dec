#pragma once

#include <cstdint>
#include <queue>
#include <tuple>
#include <vector>

namespace ahfl {

enum class EventKind : std::uint8_t {
  kClientAvailable = 0,
  kUplinkArrival = 1,
};

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::kClientAvailable;
  int edge_id = 0;
  int client_id = 0;
  std::int64_t cycle_id = 0;

  auto key() const { return std::tie(time, kind, edge_id, client_id, cycle_id); }
};

/// Min-heap on (time, kind, edge_id, client_id, cycle_id). The key is a total
/// order over distinct events, so pop order never depends on insertion order.
class EventQueue {
 public:
  void push(const Event& ev) { heap_.push(ev); }

  Event pop() {
    Event ev = heap_.top();
    heap_.pop();
    return ev;
  }

  const Event& top() const { return heap_.top(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const { return a.key() > b.key(); }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
};

}  // namespace ahfl
