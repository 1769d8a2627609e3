#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "desklab/common/bytes.hpp"
#include "desklab/common/rng.hpp"
#include "desklab/common/time.hpp"
#include "desklab/config/scenario.hpp"
#include "desklab/metrics/metrics.hpp"
#include "desklab/net/event_queue.hpp"

namespace desklab::net {

struct Envelope {
  NodeId src = 0;
  NodeId dst = 0;
  Bytes payload;
  std::uint32_t size_bytes = 0;
  SimTime send_time{0};
  SimTime deliver_time{0};
  std::uint64_t seq = 0;  // per (src, dst), starting at 1
};

/// Most specific rule wins: exact src and dst, then exact src, then exact
/// dst, then wildcard. Among equally specific rules the first declared wins.
/// Without a match the link is ideal (zero delay, no loss, unlimited rate).
class Router {
 public:
  explicit Router(std::vector<config::LinkSpec> rules) : rules_(std::move(rules)) {}
  const config::LinkSpec& classify(const std::string& src, const std::string& dst) const;
  /// Largest delay any rule can produce (delay + jitter).
  Duration max_delay() const;

 private:
  std::vector<config::LinkSpec> rules_;
  config::LinkSpec ideal_;
};

struct FlowStats {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::map<std::string, std::uint64_t> drops_by_reason;
  std::uint64_t in_flight() const { return sent - delivered - dropped; }
};

struct RunStats {
  std::uint64_t events = 0;
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t in_flight = 0;
  SimTime end_time{0};
};

class LivelockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using TimerId = std::uint64_t;

/// Virtual-time network emulator. Single threaded; every callback runs from
/// inside run_until().
class Simulator {
 public:
  struct Options {
    std::uint64_t max_events = 100'000'000;
    std::ostream* event_log = nullptr;  // JSONL, one event per line
  };

  using DeliveryHandler = std::function<void(const Envelope&)>;

  Simulator(std::vector<std::string> node_names, std::vector<config::LinkSpec> links, StreamFactory streams,
            metrics::MetricStore* store, Options options);
  Simulator(std::vector<std::string> node_names, std::vector<config::LinkSpec> links, StreamFactory streams,
            metrics::MetricStore* store = nullptr)
      : Simulator(std::move(node_names), std::move(links), std::move(streams), store, Options{}) {}

  SimTime now() const { return now_; }
  std::size_t node_count() const { return names_.size(); }
  const std::string& name(NodeId n) const { return names_.at(n); }
  std::optional<NodeId> find(const std::string& name) const;
  const Router& router() const { return router_; }

  void on_delivery(DeliveryHandler h) { deliver_ = std::move(h); }

  /// Puts a message on the (src, dst) flow as if sent at `at` (>= now).
  void send(NodeId src, NodeId dst, Bytes payload, std::uint32_t size_bytes, std::optional<SimTime> at = std::nullopt);

  /// Node-local timer; silently discarded if the node crashes before it fires.
  TimerId set_timer(NodeId node, SimTime at, std::function<void()> fn);
  void cancel_timer(TimerId id) { cancelled_.insert(id); }

  /// Arbitrary event (faults, load operations) at an absolute time.
  void schedule(SimTime at, Priority priority, NodeId node, std::function<void()> fn);

  void crash(NodeId n);
  /// Clears a crash and every partition involving the node.
  void restore(NodeId n);
  void partition(NodeId n, const std::vector<NodeId>& peers);
  bool crashed(NodeId n) const { return nodes_.at(n).crashed; }
  bool partitioned(NodeId a, NodeId b) const;

  /// Processes events with time <= end (and stops early once `stop` returns
  /// true after an event). The clock ends at `end` unless stopped early.
  RunStats run_until(SimTime end, const std::function<bool()>& stop = {});
  bool idle() const { return queue_.empty(); }

  const std::map<std::pair<NodeId, NodeId>, FlowStats>& flows() const { return flow_stats_; }
  RunStats totals() const;
  /// net.sent / net.delivered / net.dropped / net.in_flight per flow.
  void emit_flow_metrics(metrics::MetricStore& store) const;

 private:
  struct NodeState {
    bool crashed = false;
    std::uint64_t epoch = 0;  // bumps on crash, invalidating timers
  };

  struct Held {
    Envelope env;
    SimTime deliver_at;
  };

  struct FlowState {
    const config::LinkSpec* spec = nullptr;
    Rng rng{0};
    std::uint64_t seq = 0;
    SimTime busy_until{0};
    std::deque<SimTime> tx_ends;  // transmission end times still ahead
    std::optional<Held> held;     // reordered packet waiting for its successor
  };

  FlowState& flow(NodeId src, NodeId dst);
  void drop(const Envelope& env, SimTime at, const char* reason);
  void schedule_delivery(Envelope env, SimTime at);
  void release_held();
  void log(const char* kind, SimTime t, NodeId src, NodeId dst, std::uint64_t seq, std::uint32_t size);

  std::vector<std::string> names_;
  std::map<std::string, NodeId> index_;
  Router router_;
  StreamFactory streams_;
  metrics::MetricStore* store_;
  Options options_;
  DeliveryHandler deliver_;

  SimTime now_{0};
  EventQueue queue_;
  std::uint64_t processed_ = 0;
  std::vector<NodeState> nodes_;
  std::set<std::pair<NodeId, NodeId>> partitions_;
  std::map<std::pair<NodeId, NodeId>, FlowState> flows_;
  std::map<std::pair<NodeId, NodeId>, FlowStats> flow_stats_;
  std::unordered_set<TimerId> cancelled_;
  TimerId next_timer_ = 1;
};

}  // namespace desklab::net
