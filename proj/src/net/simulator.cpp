#include "desklab/net/simulator.hpp"

#include <algorithm>
#include <ostream>

#include "json.hpp"

namespace desklab::net {

const config::LinkSpec& Router::classify(const std::string& src, const std::string& dst) const {
  const config::LinkSpec* best = nullptr;
  int best_rank = -1;
  for (const auto& r : rules_) {
    const bool src_exact = r.match.src != config::kWildcard;
    const bool dst_exact = r.match.dst != config::kWildcard;
    if (src_exact && r.match.src != src) continue;
    if (dst_exact && r.match.dst != dst) continue;
    const int rank = (src_exact ? 2 : 0) + (dst_exact ? 1 : 0);
    if (rank > best_rank) {
      best = &r;
      best_rank = rank;
    }
  }
  return best ? *best : ideal_;
}

Duration Router::max_delay() const {
  Duration out{0};
  for (const auto& r : rules_) out = std::max(out, r.delay + r.jitter);
  return out;
}

Simulator::Simulator(std::vector<std::string> node_names, std::vector<config::LinkSpec> links, StreamFactory streams,
                     metrics::MetricStore* store, Options options)
    : names_(std::move(node_names)),
      router_(std::move(links)),
      streams_(std::move(streams)),
      store_(store),
      options_(options),
      nodes_(names_.size()) {
  for (NodeId i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) throw std::invalid_argument("duplicate node name " + names_[i]);
  }
}

std::optional<NodeId> Simulator::find(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Simulator::FlowState& Simulator::flow(NodeId src, NodeId dst) {
  const auto key = std::make_pair(src, dst);
  auto it = flows_.find(key);
  if (it == flows_.end()) {
    FlowState f;
    f.spec = &router_.classify(names_[src], names_[dst]);
    f.rng = streams_.stream({"link", names_[src] + "->" + names_[dst]});
    it = flows_.emplace(key, std::move(f)).first;
  }
  return it->second;
}

void Simulator::log(const char* kind, SimTime t, NodeId src, NodeId dst, std::uint64_t seq, std::uint32_t size) {
  if (!options_.event_log) return;
  nlohmann::ordered_json j;
  j["time"] = t.count();
  j["kind"] = kind;
  j["src"] = names_[src];
  j["dst"] = names_[dst];
  j["seq"] = seq;
  j["size"] = size;
  *options_.event_log << j.dump() << '\n';
}

void Simulator::drop(const Envelope& env, SimTime at, const char* reason) {
  auto& stats = flow_stats_[{env.src, env.dst}];
  ++stats.dropped;
  ++stats.drops_by_reason[reason];
  log("drop", at, env.src, env.dst, env.seq, env.size_bytes);
  if (store_ && !store_->flushed()) {
    store_->record({at, names_[env.src], "net.drop", std::int64_t{1}, {{"dst", names_[env.dst]}, {"reason", reason}}});
  }
}

void Simulator::send(NodeId src, NodeId dst, Bytes payload, std::uint32_t size_bytes, std::optional<SimTime> at_opt) {
  const SimTime at = at_opt.value_or(now_);
  if (at < now_) throw std::logic_error("send scheduled in the past");
  if (src >= names_.size() || dst >= names_.size()) throw std::out_of_range("send to unknown node");

  FlowState& f = flow(src, dst);
  Envelope env{src, dst, std::move(payload), size_bytes, at, at, ++f.seq};
  ++flow_stats_[{src, dst}].sent;
  log("send", at, src, dst, env.seq, size_bytes);

  if (nodes_[src].crashed) return drop(env, at, "src_crashed");
  if (partitioned(src, dst)) return drop(env, at, "partition");
  const auto& spec = *f.spec;
  if (spec.loss_prob > 0 && f.rng.bernoulli(spec.loss_prob)) return drop(env, at, "loss");

  while (!f.tx_ends.empty() && f.tx_ends.front() <= at) f.tx_ends.pop_front();
  if (spec.queue_limit > 0 && f.tx_ends.size() >= spec.queue_limit) return drop(env, at, "queue_overflow");

  Duration serialization{0};
  if (spec.rate_bps > 0) {
    const unsigned __int128 bits_ns = static_cast<unsigned __int128>(size_bytes) * 8u * 1'000'000'000u;
    serialization = Duration(static_cast<std::int64_t>((bits_ns + spec.rate_bps - 1) / spec.rate_bps));
  }
  const SimTime start = std::max(at, f.busy_until);
  const SimTime tx_end = start + serialization;
  f.busy_until = tx_end;
  if (tx_end > at) f.tx_ends.push_back(tx_end);

  Duration jitter{0};
  if (spec.jitter.count() > 0 && spec.jitter_dist == config::JitterDist::uniform) {
    jitter = Duration(f.rng.uniform_int(-spec.jitter.count(), spec.jitter.count()));
  }
  const SimTime deliver = std::max(tx_end, tx_end + spec.delay + jitter);

  if (f.held) {
    Held h = std::move(*f.held);
    f.held.reset();
    schedule_delivery(std::move(env), deliver);
    schedule_delivery(std::move(h.env), std::max(h.deliver_at, deliver));
    return;
  }
  if (spec.reorder_prob > 0 && f.rng.bernoulli(spec.reorder_prob)) {
    f.held = Held{std::move(env), deliver};
    return;
  }
  schedule_delivery(std::move(env), deliver);
}

void Simulator::schedule_delivery(Envelope env, SimTime at) {
  env.deliver_time = at;
  const NodeId dst = env.dst;
  queue_.push(at, Priority::delivery, dst, [this, env = std::move(env)]() {
    if (nodes_[env.dst].crashed) return drop(env, now_, "dst_crashed");
    ++flow_stats_[{env.src, env.dst}].delivered;
    log("deliver", now_, env.src, env.dst, env.seq, env.size_bytes);
    if (deliver_) deliver_(env);
  });
}

void Simulator::release_held() {
  for (auto& [key, f] : flows_) {
    if (!f.held) continue;
    Held h = std::move(*f.held);
    f.held.reset();
    schedule_delivery(std::move(h.env), std::max(now_, h.deliver_at));
  }
}

TimerId Simulator::set_timer(NodeId node, SimTime at, std::function<void()> fn) {
  if (at < now_) throw std::logic_error("timer scheduled in the past");
  const TimerId id = next_timer_++;
  const auto epoch = nodes_.at(node).epoch;
  queue_.push(at, Priority::timer, node, [this, id, node, epoch, fn = std::move(fn)]() {
    if (cancelled_.erase(id) > 0) return;
    if (nodes_[node].crashed || nodes_[node].epoch != epoch) return;
    log("timer", now_, node, node, id, 0);
    fn();
  });
  return id;
}

void Simulator::schedule(SimTime at, Priority priority, NodeId node, std::function<void()> fn) {
  if (at < now_) throw std::logic_error("event scheduled in the past");
  queue_.push(at, priority, node, std::move(fn));
}

void Simulator::crash(NodeId n) {
  auto& s = nodes_.at(n);
  s.crashed = true;
  ++s.epoch;
  log("crash", now_, n, n, 0, 0);
}

void Simulator::restore(NodeId n) {
  nodes_.at(n).crashed = false;
  std::erase_if(partitions_, [n](const auto& p) { return p.first == n || p.second == n; });
  log("restore", now_, n, n, 0, 0);
}

void Simulator::partition(NodeId n, const std::vector<NodeId>& peers) {
  for (auto p : peers) {
    partitions_.insert({std::min(n, p), std::max(n, p)});
    log("partition", now_, n, p, 0, 0);
  }
}

bool Simulator::partitioned(NodeId a, NodeId b) const { return partitions_.contains({std::min(a, b), std::max(a, b)}); }

RunStats Simulator::run_until(SimTime end, const std::function<bool()>& stop) {
  while (true) {
    if (queue_.empty()) {
      const bool any_held = std::any_of(flows_.begin(), flows_.end(), [](const auto& kv) { return kv.second.held.has_value(); });
      if (!any_held) break;
      release_held();
      continue;
    }
    if (queue_.top().time > end) break;
    auto [key, action] = queue_.pop();
    if (++processed_ > options_.max_events) {
      throw LivelockError("event limit of " + std::to_string(options_.max_events) + " exceeded at t=" +
                          std::to_string(key.time.count()) + "ns on node " + names_.at(key.node) +
                          "; a handler is probably rescheduling itself without progress");
    }
    now_ = key.time;
    action();
    if (stop && stop()) return totals();
  }
  now_ = std::max(now_, end);
  return totals();
}

RunStats Simulator::totals() const {
  RunStats s;
  s.events = processed_;
  for (const auto& [key, f] : flow_stats_) {
    s.sent += f.sent;
    s.delivered += f.delivered;
    s.dropped += f.dropped;
    s.in_flight += f.in_flight();
  }
  s.end_time = now_;
  return s;
}

void Simulator::emit_flow_metrics(metrics::MetricStore& store) const {
  for (const auto& [key, f] : flow_stats_) {
    const metrics::Labels labels{{"dst", names_[key.second]}};
    const auto& src = names_[key.first];
    store.record({now_, src, "net.sent", static_cast<std::int64_t>(f.sent), labels});
    store.record({now_, src, "net.delivered", static_cast<std::int64_t>(f.delivered), labels});
    store.record({now_, src, "net.dropped", static_cast<std::int64_t>(f.dropped), labels});
    store.record({now_, src, "net.in_flight", static_cast<std::int64_t>(f.in_flight()), labels});
  }
}

}  // namespace desklab::net
