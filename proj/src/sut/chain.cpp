#include "desklab/sut/chain.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <unordered_set>

#include "desklab/common/bytes.hpp"
#include "desklab/config/service_schema.hpp"
#include "desklab/sut/frost_services.hpp"

namespace desklab::sut::chain {
namespace {

using namespace std::chrono_literals;

enum class Kind : std::uint8_t { tx = 1, client_ack = 2, relay_ack = 3, block = 4 };

struct Tx {
  std::uint64_t id = 0;
  SimTime sent{0};
  std::uint32_t size = 0;
};

Bytes encode_tx(const Tx& tx) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(Kind::tx));
  w.u64(tx.id);
  w.i64(tx.sent.count());
  w.u32(tx.size);
  return w.take();
}

Tx decode_tx(ByteReader& r) {
  Tx tx;
  tx.id = r.u64();
  tx.sent = SimTime(r.i64());
  tx.size = r.u32();
  return tx;
}

Bytes encode_ack(Kind kind, std::uint64_t id) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(kind));
  w.u64(id);
  return w.take();
}

std::vector<std::string> nodes_of(const config::ScenarioSpec& spec, config::ServiceKind kind) {
  std::vector<std::string> out;
  for (const auto* b : spec.services_of(kind)) out.push_back(b->node);
  return out;
}

std::size_t position(const std::vector<std::string>& nodes, const std::string& node) {
  return static_cast<std::size_t>(std::find(nodes.begin(), nodes.end(), node) - nodes.begin());
}

class Client final : public harness::Service {
 public:
  Client(const config::ServiceBinding& b, const config::ScenarioSpec& spec)
      : prefix_(static_cast<std::uint64_t>(position(nodes_of(spec, config::ServiceKind::chain_client), b.node)) << 40) {}

  void on_start(harness::SutContext& ctx) override { ctx.report_ready(); }

  void on_client_op(harness::SutContext& ctx, const harness::ClientOp& op) override {
    const Tx tx{prefix_ | op.index, ctx.now(), op.payload_bytes};
    ctx.send(op.target, encode_tx(tx), tx.size);
    pending_[tx.id] = {tx.sent, ctx.set_timer_after(2 * frost_default_timeout(ctx.max_link_delay()), tx.id)};
  }

  void on_message(harness::SutContext& ctx, const std::string&, std::span<const std::uint8_t> payload) override {
    ByteReader r(payload);
    if (static_cast<Kind>(r.u8()) != Kind::client_ack) return;
    auto it = pending_.find(r.u64());
    if (it == pending_.end()) return;
    ctx.cancel_timer(it->second.timer);
    ctx.emit("chain.tx_accepted", (ctx.now() - it->second.sent).count());
    pending_.erase(it);
  }

  void on_timer(harness::SutContext& ctx, std::uint64_t id) override {
    if (pending_.erase(id) != 0) ctx.emit("chain.tx_timeout", std::int64_t{1}, {{"cause", "timer"}});
  }

  void on_finish(harness::SutContext& ctx) override {
    for (std::size_t k = 0; k < pending_.size(); ++k) ctx.emit("chain.tx_timeout", std::int64_t{1}, {{"cause", "run_end"}});
    pending_.clear();
  }

 private:
  struct Pending {
    SimTime sent{0};
    harness::TimerId timer = 0;
  };
  std::uint64_t prefix_;
  std::map<std::uint64_t, Pending> pending_;
};

/// Non-participation node: accepts client transactions and hands them to a relay.
class Gateway final : public harness::Service {
 public:
  Gateway(const config::ServiceBinding& b, const config::ScenarioSpec& spec)
      : relays_(nodes_of(spec, config::ServiceKind::chain_relay)) {
    const auto params = config::normalize_params(b.service, b.params);
    ack_timeout_ = config::ParamView(params).duration("ack_timeout");
    if (!relays_.empty()) current_ = position(nodes_of(spec, config::ServiceKind::chain_nonparticipation), b.node) % relays_.size();
  }

  void on_start(harness::SutContext& ctx) override { ctx.report_ready(); }

  void on_message(harness::SutContext& ctx, const std::string& from, std::span<const std::uint8_t> payload) override {
    ByteReader r(payload);
    const auto kind = static_cast<Kind>(r.u8());
    if (kind == Kind::tx) {
      const auto tx = decode_tx(r);
      ctx.send(from, encode_ack(Kind::client_ack, tx.id));
      if (relays_.empty() || unacked_.contains(tx.id)) return;
      ctx.charge("chain.forward");
      forward(ctx, tx);
    } else if (kind == Kind::relay_ack) {
      auto it = unacked_.find(r.u64());
      if (it == unacked_.end()) return;
      ctx.cancel_timer(it->second.timer);
      unacked_.erase(it);
    }
  }

  void on_timer(harness::SutContext& ctx, std::uint64_t id) override {
    auto it = unacked_.find(id);
    if (it == unacked_.end()) return;
    if (it->second.relay == current_) {
      current_ = (current_ + 1) % relays_.size();
      ctx.emit("chain.reroute", std::int64_t{1}, {{"to", relays_[current_]}});
    }
    const auto tx = it->second.tx;
    unacked_.erase(it);
    forward(ctx, tx);
  }

 private:
  struct Unacked {
    Tx tx;
    std::size_t relay = 0;
    harness::TimerId timer = 0;
  };

  void forward(harness::SutContext& ctx, const Tx& tx) {
    ctx.send(relays_[current_], encode_tx(tx), tx.size);
    const auto wait = ack_timeout_ > 0ns ? ack_timeout_ : frost_default_timeout(ctx.max_link_delay());
    unacked_[tx.id] = {tx, current_, ctx.set_timer_after(wait, tx.id)};
  }

  std::vector<std::string> relays_;
  Duration ack_timeout_{0};
  std::size_t current_ = 0;
  std::map<std::uint64_t, Unacked> unacked_;
};

class Relay final : public harness::Service {
 public:
  Relay(const config::ServiceBinding& b, const config::ScenarioSpec& spec)
      : participants_(nodes_of(spec, config::ServiceKind::chain_participation)) {
    const auto params = config::normalize_params(b.service, b.params);
    const config::ParamView p(params);
    capacity_ = p.number("capacity");
    queue_limit_ = p.uint("queue_limit");
    sample_ = p.duration("sample_interval");
  }

  void on_start(harness::SutContext& ctx) override { ctx.report_ready(); }

  void on_scenario_start(harness::SutContext& ctx) override {
    if (sample_ > 0ns) ctx.set_timer(ctx.now(), kSample);
  }

  void on_message(harness::SutContext& ctx, const std::string& from, std::span<const std::uint8_t> payload) override {
    ByteReader r(payload);
    if (static_cast<Kind>(r.u8()) != Kind::tx) return;
    const auto tx = decode_tx(r);
    ctx.send(from, encode_ack(Kind::relay_ack, tx.id));
    if (!seen_.insert(tx.id).second) {
      ctx.emit("chain.relay_duplicate", std::int64_t{1});
      return;
    }
    if (!(capacity_ > 0)) {
      broadcast(ctx, tx);
      return;
    }
    if (queue_limit_ > 0 && queue_.size() >= queue_limit_) {
      ctx.emit("chain.relay_drop", std::int64_t{1});
      return;
    }
    queue_.push_back(tx);
    if (!busy_) {
      busy_ = true;
      ctx.set_timer(std::max(ctx.now(), next_free_), kDepart);
    }
  }

  void on_timer(harness::SutContext& ctx, std::uint64_t tag) override {
    if (tag == kSample) {
      ctx.emit("chain.relay_queue", static_cast<std::int64_t>(queue_.size()));
      ctx.set_timer_after(sample_, kSample);
      return;
    }
    broadcast(ctx, queue_.front());
    queue_.pop_front();
    next_free_ = ctx.now() + Duration(static_cast<std::int64_t>(std::llround(1e9 / capacity_)));
    if (queue_.empty()) {
      busy_ = false;
    } else {
      ctx.set_timer(next_free_, kDepart);
    }
  }

 private:
  static constexpr std::uint64_t kDepart = 1;
  static constexpr std::uint64_t kSample = 2;

  void broadcast(harness::SutContext& ctx, const Tx& tx) {
    ctx.charge("chain.relay");
    const auto msg = encode_tx(tx);
    for (const auto& p : participants_) ctx.send(p, msg, tx.size);
  }

  std::vector<std::string> participants_;
  double capacity_ = 0;
  std::uint64_t queue_limit_ = 0;
  Duration sample_{0};
  std::unordered_set<std::uint64_t> seen_;
  std::deque<Tx> queue_;
  bool busy_ = false;
  SimTime next_free_{0};
};

class Participant final : public harness::Service {
 public:
  Participant(const config::ServiceBinding& b, const config::ScenarioSpec& spec)
      : peers_(nodes_of(spec, config::ServiceKind::chain_participation)), me_(position(peers_, b.node)) {
    const auto params = config::normalize_params(b.service, b.params);
    const config::ParamView p(params);
    interval_ = p.duration("block_interval");
    capacity_ = p.uint("block_capacity");
    beta_ = p.number("beta");
  }

  void on_start(harness::SutContext& ctx) override { ctx.report_ready(); }

  void on_scenario_start(harness::SutContext& ctx) override {
    round_start_ = ctx.now();
    schedule_pack(ctx);
  }

  void on_message(harness::SutContext& ctx, const std::string&, std::span<const std::uint8_t> payload) override {
    ByteReader r(payload);
    const auto kind = static_cast<Kind>(r.u8());
    if (kind == Kind::tx) {
      const auto tx = decode_tx(r);
      if (seen_.insert(tx.id).second) pool_.push_back(tx);
    } else if (kind == Kind::block) {
      const auto k = r.u64();
      const SimTime committed(r.i64());
      const auto count = r.u32();
      std::unordered_set<std::uint64_t> ids;
      for (std::uint32_t i = 0; i < count; ++i) ids.insert(r.u64());
      if (k < round_) return;
      seen_.insert(ids.begin(), ids.end());
      std::erase_if(pool_, [&](const Tx& tx) { return ids.contains(tx.id); });
      round_ = k + 1;
      round_start_ = committed;
      schedule_pack(ctx);
    }
  }

  void on_timer(harness::SutContext& ctx, std::uint64_t tag) override {
    if (tag == kPack) {
      const auto take = std::min<std::size_t>(pool_.size(), capacity_);
      packed_.assign(pool_.begin(), pool_.begin() + static_cast<std::ptrdiff_t>(take));
      pool_.erase(pool_.begin(), pool_.begin() + static_cast<std::ptrdiff_t>(take));
      ctx.charge("chain.pack", static_cast<double>(take));
      const double fill = static_cast<double>(take) / static_cast<double>(capacity_);
      block_time_ = Duration(static_cast<std::int64_t>(std::llround(static_cast<double>(interval_.count()) * (1 + fill * beta_))));
      ctx.set_timer(round_start_ + block_time_, kCommit);
      return;
    }
    const auto now = ctx.now();
    const metrics::Labels labels{{"round", std::to_string(round_)}};
    ctx.emit("chain.block_size", static_cast<std::int64_t>(packed_.size()), labels);
    ctx.emit("chain.block_time_ns", block_time_.count(), labels);
    ctx.emit("chain.committed_tps", static_cast<double>(packed_.size()) / std::chrono::duration<double>(block_time_).count(), labels);
    for (const auto& tx : packed_) ctx.emit("chain.commit_latency_ns", (now - tx.sent).count());

    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(Kind::block));
    w.u64(round_);
    w.i64(now.count());
    w.u32(static_cast<std::uint32_t>(packed_.size()));
    for (const auto& tx : packed_) w.u64(tx.id);
    const auto msg = w.take();
    for (std::size_t i = 0; i < peers_.size(); ++i) {
      if (i != me_) ctx.send(peers_[i], msg, static_cast<std::uint32_t>(64 + 8 * packed_.size()));
    }
    packed_.clear();
    ++round_;
    round_start_ = now;
    schedule_pack(ctx);
  }

 private:
  static constexpr std::uint64_t kPack = 1;
  static constexpr std::uint64_t kCommit = 2;

  void schedule_pack(harness::SutContext& ctx) {
    if (round_ % peers_.size() == me_) ctx.set_timer(round_start_ + interval_, kPack);
  }

  std::vector<std::string> peers_;
  std::size_t me_;
  Duration interval_{0};
  std::uint64_t capacity_ = 0;
  double beta_ = 0;
  std::uint64_t round_ = 0;
  SimTime round_start_{0};
  Duration block_time_{0};
  std::unordered_set<std::uint64_t> seen_;
  std::deque<Tx> pool_;
  std::vector<Tx> packed_;
};

}  // namespace

std::unique_ptr<harness::Service> make_service(const config::ServiceBinding& b, const config::ScenarioSpec& spec) {
  switch (b.service) {
    case config::ServiceKind::chain_client:
      return std::make_unique<Client>(b, spec);
    case config::ServiceKind::chain_nonparticipation:
      return std::make_unique<Gateway>(b, spec);
    case config::ServiceKind::chain_relay:
      return std::make_unique<Relay>(b, spec);
    case config::ServiceKind::chain_participation:
      return std::make_unique<Participant>(b, spec);
    default:
      throw std::invalid_argument("not a relay-chain service");
  }
}

}  // namespace desklab::sut::chain
