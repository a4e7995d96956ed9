#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hetmtt/geometry.hpp"
#include "hetmtt/world.hpp"

namespace hetmtt {

// ---------------------------------------------------------------------------
// Neighbor graph

/// Undirected communication graph over robot ids 0..n-1, no self loops.
class NeighborGraph {
 public:
  NeighborGraph() = default;
  explicit NeighborGraph(std::size_t n, double radius = 0.0) : adjacency_(n), radius_(radius) {}

  static NeighborGraph complete(std::size_t n) {
    NeighborGraph g(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) g.add_edge(static_cast<RobotId>(i), static_cast<RobotId>(j));
    return g;
  }

  void add_edge(RobotId a, RobotId b) {
    if (a == b || connected(a, b)) return;
    insert_sorted(adjacency_[a], b);
    insert_sorted(adjacency_[b], a);
  }

  std::size_t size() const { return adjacency_.size(); }
  double radius() const { return radius_; }
  const std::vector<RobotId>& neighbors(RobotId i) const { return adjacency_[i]; }
  std::size_t degree(RobotId i) const { return adjacency_[i].size(); }

  std::size_t max_degree() const {
    std::size_t d = 0;
    for (const auto& a : adjacency_) d = std::max(d, a.size());
    return d;
  }

  bool connected(RobotId a, RobotId b) const {
    const auto& adj = adjacency_[a];
    return std::binary_search(adj.begin(), adj.end(), b);
  }

  std::size_t edge_count() const {
    std::size_t e = 0;
    for (const auto& a : adjacency_) e += a.size();
    return e / 2;
  }

 private:
  static void insert_sorted(std::vector<RobotId>& v, RobotId x) { v.insert(std::upper_bound(v.begin(), v.end(), x), x); }

  std::vector<std::vector<RobotId>> adjacency_;
  double radius_ = 0.0;
};

/// Edge (i, j) iff ||q_i - q_j|| <= radius and i != j.
inline NeighborGraph build_graph(std::span<const Vec2> positions, double radius) {
  NeighborGraph g(positions.size(), radius);
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (std::size_t j = i + 1; j < positions.size(); ++j)
      if (squared_distance(positions[i], positions[j]) <= r2) g.add_edge(static_cast<RobotId>(i), static_cast<RobotId>(j));
  return g;
}

struct Connectivity {
  bool connected = true;
  std::vector<std::vector<RobotId>> components;  // each sorted, ordered by smallest member
};

inline Connectivity connectivity_check(const NeighborGraph& g) {
  Connectivity out;
  std::vector<bool> seen(g.size(), false);
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (seen[s]) continue;
    std::vector<RobotId> comp;
    std::queue<RobotId> frontier;
    frontier.push(static_cast<RobotId>(s));
    seen[s] = true;
    while (!frontier.empty()) {
      const RobotId u = frontier.front();
      frontier.pop();
      comp.push_back(u);
      for (RobotId v : g.neighbors(u)) {
        if (!seen[v]) {
          seen[v] = true;
          frontier.push(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.components.push_back(std::move(comp));
  }
  out.connected = out.components.size() <= 1;
  return out;
}

// ---------------------------------------------------------------------------
// Messages and payload accounting

enum class MessageKind : std::uint8_t {
  generator,        // generator point + weight broadcast
  consensus,        // scalar consensus state
  capacity,         // per-robot capacity quota
  ccvd_request,     // served robot -> serving robot: cell set + COD
  ccvd_assignment,  // serving robot -> served robot: swapped cell set
  power_partition,  // power-partition vertex list
  phd_slice,        // (cell, value) records
  count_
};

inline constexpr std::size_t kMessageKinds = static_cast<std::size_t>(MessageKind::count_);

inline const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::generator: return "generator";
    case MessageKind::consensus: return "consensus";
    case MessageKind::capacity: return "capacity";
    case MessageKind::ccvd_request: return "ccvd_request";
    case MessageKind::ccvd_assignment: return "ccvd_assignment";
    case MessageKind::power_partition: return "power_partition";
    case MessageKind::phd_slice: return "phd_slice";
    case MessageKind::count_: break;
  }
  return "unknown";
}

/// Serialized sizes used by the ledger. These are the bandwidth model's constants,
/// independent of the in-memory representation.
namespace payload {
inline constexpr std::size_t kCoordinateBytes = 8;     // one 2-D position (vertex or cell)
inline constexpr std::size_t kTargetRecordBytes = 12;  // position + detection probability
inline constexpr std::size_t kScalarBytes = 4;

constexpr std::size_t generator() { return kCoordinateBytes + kScalarBytes; }
constexpr std::size_t scalar() { return kScalarBytes; }
constexpr std::size_t power_partition(std::size_t vertices) { return kCoordinateBytes * vertices; }
constexpr std::size_t ccvd_share(std::size_t cells, std::size_t targets) {
  return kCoordinateBytes * cells + kTargetRecordBytes * targets;
}
/// A PHD cell travels as a target-style record: cell position plus value.
constexpr std::size_t phd_slice(std::size_t cells) { return kTargetRecordBytes * cells; }
}  // namespace payload

struct Message {
  RobotId from = 0;
  RobotId to = 0;
  MessageKind kind = MessageKind::generator;
  std::vector<CellIndex> cells;
  std::vector<double> values;
  std::size_t bytes = 0;
};

// ---------------------------------------------------------------------------
// Traffic ledger

struct LedgerRow {
  std::size_t step = 0;
  RobotId robot = 0;
  MessageKind kind = MessageKind::generator;
  std::size_t bytes_sent = 0;
  std::size_t bytes_received = 0;
  std::size_t messages_sent = 0;
};

/// Per-robot, per-kind byte counters. Counters accumulate within a step and are
/// flushed into rows by close_step(); running totals never decrease.
class TrafficLedger {
 public:
  TrafficLedger() = default;
  explicit TrafficLedger(std::size_t robots) { resize(robots); }

  void resize(std::size_t robots) {
    current_.assign(robots, {});
    totals_.assign(robots, {});
  }
  std::size_t robots() const { return current_.size(); }

  void record(const Message& m) {
    auto& s = current_[m.from][index(m.kind)];
    s.bytes_sent += m.bytes;
    s.messages_sent += 1;
    current_[m.to][index(m.kind)].bytes_received += m.bytes;
  }

  void close_step(std::size_t step) {
    for (std::size_t r = 0; r < current_.size(); ++r) {
      for (std::size_t k = 0; k < kMessageKinds; ++k) {
        Counter& c = current_[r][k];
        if (c.bytes_sent == 0 && c.bytes_received == 0 && c.messages_sent == 0) continue;
        rows_.push_back({step, static_cast<RobotId>(r), static_cast<MessageKind>(k), c.bytes_sent, c.bytes_received,
                         c.messages_sent});
        Counter& t = totals_[r][k];
        t.bytes_sent += c.bytes_sent;
        t.bytes_received += c.bytes_received;
        t.messages_sent += c.messages_sent;
        c = {};
      }
    }
  }

  const std::vector<LedgerRow>& rows() const { return rows_; }

  std::size_t total_sent(RobotId r, MessageKind k) const { return totals_[r][index(k)].bytes_sent; }
  std::size_t total_received(RobotId r, MessageKind k) const { return totals_[r][index(k)].bytes_received; }
  std::size_t total_sent(RobotId r) const {
    std::size_t s = 0;
    for (const auto& c : totals_[r]) s += c.bytes_sent;
    return s;
  }
  std::size_t total_received(RobotId r) const {
    std::size_t s = 0;
    for (const auto& c : totals_[r]) s += c.bytes_received;
    return s;
  }
  std::size_t grand_total_sent() const {
    std::size_t s = 0;
    for (std::size_t r = 0; r < totals_.size(); ++r) s += total_sent(static_cast<RobotId>(r));
    return s;
  }
  std::size_t grand_total_received() const {
    std::size_t s = 0;
    for (std::size_t r = 0; r < totals_.size(); ++r) s += total_received(static_cast<RobotId>(r));
    return s;
  }

  void write_csv(std::ostream& os) const {
    os << "step,robot,kind,bytes_sent,bytes_received,messages\n";
    for (const auto& row : rows_) {
      os << row.step << ',' << row.robot << ',' << to_string(row.kind) << ',' << row.bytes_sent << ','
         << row.bytes_received << ',' << row.messages_sent << '\n';
    }
  }

 private:
  struct Counter {
    std::size_t bytes_sent = 0;
    std::size_t bytes_received = 0;
    std::size_t messages_sent = 0;
  };
  static std::size_t index(MessageKind k) { return static_cast<std::size_t>(k); }

  std::vector<std::array<Counter, kMessageKinds>> current_;
  std::vector<std::array<Counter, kMessageKinds>> totals_;
  std::vector<LedgerRow> rows_;
};

// ---------------------------------------------------------------------------
// Synchronous rounds

struct DroppedMessage {
  RobotId from = 0;
  RobotId to = 0;
  MessageKind kind = MessageKind::generator;
};

/// Delivers every message addressed to a graph neighbor exactly once, lossless and
/// delay free. Inboxes are ordered by sender id, then by insertion order.
/// Messages to non-neighbors are dropped and reported.
inline std::vector<std::vector<Message>> exchange_round(std::vector<std::vector<Message>> outboxes,
                                                        const NeighborGraph& graph, TrafficLedger& ledger,
                                                        std::vector<DroppedMessage>* dropped = nullptr) {
  std::vector<std::vector<Message>> inboxes(graph.size());
  for (std::size_t sender = 0; sender < outboxes.size(); ++sender) {
    for (Message& m : outboxes[sender]) {
      m.from = static_cast<RobotId>(sender);
      const bool valid = m.to >= 0 && static_cast<std::size_t>(m.to) < graph.size() && graph.connected(m.from, m.to);
      if (!valid) {
        if (dropped) dropped->push_back({m.from, m.to, m.kind});
        continue;
      }
      ledger.record(m);
      inboxes[m.to].push_back(std::move(m));
    }
  }
  return inboxes;
}

/// Stateful wrapper: robots post into outboxes, then one call delivers the round.
class Network {
 public:
  Network() = default;
  explicit Network(NeighborGraph graph) { set_graph(std::move(graph)); }

  void set_graph(NeighborGraph graph) {
    graph_ = std::move(graph);
    if (ledger_.robots() != graph_.size()) ledger_.resize(graph_.size());
    outboxes_.assign(graph_.size(), {});
  }

  const NeighborGraph& graph() const { return graph_; }
  TrafficLedger& ledger() { return ledger_; }
  const TrafficLedger& ledger() const { return ledger_; }

  void send(Message m) { outboxes_[m.from].push_back(std::move(m)); }

  std::vector<std::vector<Message>> deliver() {
    std::vector<std::vector<Message>> out(graph_.size());
    out.swap(outboxes_);
    ++rounds_;
    return exchange_round(std::move(out), graph_, ledger_, &dropped_);
  }

  std::size_t rounds() const { return rounds_; }
  const std::vector<DroppedMessage>& dropped() const { return dropped_; }
  std::vector<DroppedMessage> take_dropped() { return std::exchange(dropped_, {}); }

 private:
  NeighborGraph graph_;
  TrafficLedger ledger_;
  std::vector<std::vector<Message>> outboxes_;
  std::vector<DroppedMessage> dropped_;
  std::size_t rounds_ = 0;
};

}  // namespace hetmtt
