#include "desklab/sut/pbs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "desklab/common/bytes.hpp"
#include "desklab/config/service_schema.hpp"
#include "desklab/sut/frost_services.hpp"

namespace desklab::sut::pbs {

Block build_block(std::span<const Transaction> pending, std::uint64_t gas_limit, BuildPolicy policy) {
  std::vector<const Transaction*> order;
  order.reserve(pending.size());
  for (const auto& tx : pending) order.push_back(&tx);
  if (policy == BuildPolicy::greedy) {
    std::sort(order.begin(), order.end(), [](const Transaction* a, const Transaction* b) {
      if (a->fee_per_gas != b->fee_per_gas) return a->fee_per_gas > b->fee_per_gas;
      return a->id < b->id;
    });
  }
  Block block;
  for (const auto* tx : order) {
    if (tx->gas > gas_limit - block.gas_used) continue;
    block.txs.push_back(tx->id);
    block.gas_used += tx->gas;
    block.value += tx->value();
  }
  return block;
}

bool BidGate::offer(std::int64_t slot, std::uint64_t value) {
  auto [it, fresh] = best_.try_emplace(slot, value);
  if (fresh) return value > 0;
  if (value <= it->second) return false;
  it->second = value;
  return true;
}

namespace {

using namespace std::chrono_literals;

enum class Kind : std::uint8_t { tx = 1, confirm = 2, bid = 3, slot_result = 4 };

Bytes encode_ids(ByteWriter& w, const std::vector<std::uint64_t>& ids) {
  w.u32(static_cast<std::uint32_t>(ids.size()));
  for (auto id : ids) w.u64(id);
  return w.take();
}

std::vector<std::uint64_t> decode_ids(ByteReader& r) {
  const auto k = r.u32();
  if (static_cast<std::size_t>(k) * 8 > r.remaining()) throw DecodeError("id list exceeds message");
  std::vector<std::uint64_t> ids(k);
  for (auto& id : ids) id = r.u64();
  return ids;
}

std::int64_t slot_of(SimTime now, SimTime start, Duration slot_length) {
  return (now - start) / slot_length;
}

std::size_t ordinal(const config::ScenarioSpec& spec, config::ServiceKind kind, const std::string& node) {
  const auto all = spec.services_of(kind);
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i]->node == node) return i;
  }
  throw std::invalid_argument(node + " does not run " + std::string(config::to_string(kind)));
}

std::vector<std::string> nodes_of(const config::ScenarioSpec& spec, config::ServiceKind kind) {
  std::vector<std::string> out;
  for (const auto* b : spec.services_of(kind)) out.push_back(b->node);
  return out;
}

class Client final : public harness::Service {
 public:
  Client(const config::ServiceBinding& b, const config::ScenarioSpec& spec)
      : prefix_(static_cast<std::uint64_t>(ordinal(spec, config::ServiceKind::pbs_client, b.node)) << 40) {
    const auto params = config::normalize_params(b.service, b.params);
    const config::ParamView p(params);
    timeout_ = p.duration("timeout");
    gas_ = p.uint("tx_gas");
    gas_max_ = std::max(gas_, p.uint("tx_gas_max"));
    base_fee_ = p.uint("base_fee");
    spread_ = p.number("fee_spread");
    for (const auto* builder : spec.services_of(config::ServiceKind::pbs_builder)) {
      const auto bp = config::normalize_params(builder->service, builder->params);
      const config::ParamView v(bp);
      blackout_[builder->node] = std::max(Duration(0), v.duration("blackout_end") - v.duration("blackout_start"));
    }
  }

  void on_start(harness::SutContext& ctx) override { ctx.report_ready(); }

  void on_client_op(harness::SutContext& ctx, const harness::ClientOp& op) override {
    auto& rng = ctx.rng();
    const auto gas = gas_max_ > gas_ ? gas_ + rng.uniform_below(gas_max_ - gas_ + 1) : gas_;
    const double base = std::floor(static_cast<double>(base_fee_) * (1 + spread_ * rng.uniform01()));
    const auto fee = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(base * op.fee_multiplier)));
    const auto id = prefix_ | op.index;

    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(Kind::tx));
    w.u64(id);
    w.u64(gas);
    w.u64(fee);
    w.i64(ctx.now().count());
    ctx.send(op.target, w.take(), std::max<std::uint32_t>(op.payload_bytes, 33));

    auto wait = timeout_;
    if (wait == 0ns) {
      const auto it = blackout_.find(op.target);
      wait = 2 * frost_default_timeout(ctx.max_link_delay()) + (it == blackout_.end() ? 0ns : it->second);
    }
    pending_[id] = {ctx.now(), ctx.set_timer_after(wait, id)};
  }

  void on_message(harness::SutContext& ctx, const std::string&, std::span<const std::uint8_t> payload) override {
    ByteReader r(payload);
    if (static_cast<Kind>(r.u8()) != Kind::confirm) return;
    const auto id = r.u64();
    auto it = pending_.find(id);
    if (it == pending_.end()) return;
    ctx.cancel_timer(it->second.timer);
    ctx.emit("pbs.confirmed", (ctx.now() - it->second.sent).count());
    pending_.erase(it);
  }

  void on_timer(harness::SutContext& ctx, std::uint64_t id) override {
    if (pending_.erase(id) != 0) ctx.emit("pbs.tx_timeout", std::int64_t{1}, {{"cause", "timer"}});
  }

  void on_finish(harness::SutContext& ctx) override {
    for (std::size_t k = 0; k < pending_.size(); ++k) ctx.emit("pbs.tx_timeout", std::int64_t{1}, {{"cause", "run_end"}});
    pending_.clear();
  }

 private:
  struct Pending {
    SimTime sent{0};
    harness::TimerId timer = 0;
  };

  std::uint64_t prefix_;
  Duration timeout_{0};
  std::uint64_t gas_ = 0;
  std::uint64_t gas_max_ = 0;
  std::uint64_t base_fee_ = 0;
  double spread_ = 0;
  std::map<std::string, Duration> blackout_;
  std::map<std::uint64_t, Pending> pending_;
};

class Builder final : public harness::Service {
 public:
  Builder(const config::ServiceBinding& b, const config::ScenarioSpec& spec)
      : id_(static_cast<std::uint32_t>(ordinal(spec, config::ServiceKind::pbs_builder, b.node))),
        relays_(nodes_of(spec, config::ServiceKind::pbs_relay)) {
    const auto params = config::normalize_params(b.service, b.params);
    const config::ParamView p(params);
    gas_limit_ = p.uint("gas_limit");
    slot_length_ = p.duration("slot_length");
    rebuild_ = p.duration("rebuild_interval");
    policy_ = p.string("policy") == "fifo" ? BuildPolicy::fifo : BuildPolicy::greedy;
    blackout_start_ = p.duration("blackout_start");
    blackout_end_ = p.duration("blackout_end");
  }

  void on_start(harness::SutContext& ctx) override { ctx.report_ready(); }

  void on_scenario_start(harness::SutContext& ctx) override {
    start_ = ctx.now();
    ctx.set_timer(start_ + rebuild_, kRebuild);
    if (blackout_end_ > blackout_start_) ctx.set_timer(start_ + blackout_end_, kBlackoutEnd);
  }

  void on_message(harness::SutContext& ctx, const std::string& from, std::span<const std::uint8_t> payload) override {
    ByteReader r(payload);
    const auto kind = static_cast<Kind>(r.u8());
    if (kind == Kind::tx) {
      Transaction tx;
      tx.id = r.u64();
      tx.gas = r.u64();
      tx.fee_per_gas = r.u64();
      tx.arrival = SimTime(r.i64());
      if (in_blackout(ctx.now())) {
        deferred_.push_back({tx, from});
      } else {
        insert(ctx, tx, from);
      }
    } else if (kind == Kind::slot_result) {
      const auto slot = r.i64();
      r.u32();  // winning builder
      r.u64();  // value
      const auto ids = decode_ids(r);
      const std::set<std::uint64_t> won(ids.begin(), ids.end());
      const auto before = mempool_.size();
      std::erase_if(mempool_, [&](const Transaction& t) { return won.contains(t.id); });
      const auto removed = before - mempool_.size();
      if (removed > 0) ctx.emit("pbs.included", static_cast<std::int64_t>(removed), {{"slot", std::to_string(slot)}});
      head_slot_ = std::max(head_slot_, slot);
    }
  }

  void on_timer(harness::SutContext& ctx, std::uint64_t tag) override {
    if (tag == kBlackoutEnd) {
      for (const auto& [tx, from] : deferred_) insert(ctx, tx, from);
      deferred_.clear();
      return;
    }
    ctx.set_timer_after(rebuild_, kRebuild);
    const auto slot = slot_of(ctx.now(), start_, slot_length_);
    if (slot > 0 && head_slot_ < slot - 1) return;  // previous slot's outcome not known yet
    ctx.charge("pbs.build", static_cast<double>(mempool_.size()));
    const auto block = build_block(mempool_, gas_limit_, policy_);
    if (!gate_.offer(slot, block.value)) {
      ctx.emit("pbs.bid_suppressed", static_cast<std::int64_t>(block.value), {{"slot", std::to_string(slot)}});
      return;
    }
    ctx.emit("pbs.bids", static_cast<std::int64_t>(block.value), {{"slot", std::to_string(slot)}});
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(Kind::bid));
    w.i64(slot);
    w.u32(id_);
    w.u64(block.value);
    const auto msg = encode_ids(w, block.txs);
    for (const auto& relay : relays_) ctx.send(relay, msg);
  }

  void on_finish(harness::SutContext& ctx) override {
    ctx.emit("pbs.pending_at_end", static_cast<std::int64_t>(mempool_.size() + deferred_.size()));
  }

 private:
  static constexpr std::uint64_t kRebuild = 1;
  static constexpr std::uint64_t kBlackoutEnd = 2;

  bool in_blackout(SimTime now) const {
    return blackout_end_ > blackout_start_ && now >= start_ + blackout_start_ && now < start_ + blackout_end_;
  }

  void insert(harness::SutContext& ctx, const Transaction& tx, const std::string& from) {
    if (!seen_.insert(tx.id).second) {
      ctx.emit("pbs.duplicate", std::int64_t{1});
      return;
    }
    ctx.charge("pbs.insert");
    mempool_.push_back(tx);
    ctx.emit("pbs.mempool_latency_ns", (ctx.now() - tx.arrival).count());
    ctx.emit("pbs.queue_size", static_cast<std::int64_t>(mempool_.size()));
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(Kind::confirm));
    w.u64(tx.id);
    ctx.send(from, w.take());
  }

  std::uint32_t id_;
  std::vector<std::string> relays_;
  std::uint64_t gas_limit_ = 0;
  Duration slot_length_{0};
  Duration rebuild_{0};
  BuildPolicy policy_ = BuildPolicy::greedy;
  Duration blackout_start_{0};
  Duration blackout_end_{0};
  SimTime start_{0};
  std::int64_t head_slot_ = -1;
  std::vector<Transaction> mempool_;  // arrival order
  std::vector<std::pair<Transaction, std::string>> deferred_;
  std::set<std::uint64_t> seen_;
  BidGate gate_;
};

class Relay final : public harness::Service {
 public:
  Relay(const config::ServiceBinding& b, const config::ScenarioSpec& spec)
      : builders_(nodes_of(spec, config::ServiceKind::pbs_builder)) {
    const auto params = config::normalize_params(b.service, b.params);
    slot_length_ = config::ParamView(params).duration("slot_length");
  }

  void on_start(harness::SutContext& ctx) override { ctx.report_ready(); }

  void on_scenario_start(harness::SutContext& ctx) override {
    start_ = ctx.now();
    ctx.set_timer(start_ + slot_length_, 0);
  }

  void on_message(harness::SutContext& ctx, const std::string&, std::span<const std::uint8_t> payload) override {
    ByteReader r(payload);
    if (static_cast<Kind>(r.u8()) != Kind::bid) return;
    Bid bid;
    bid.slot = r.i64();
    bid.builder = r.u32();
    bid.value = r.u64();
    bid.txs = decode_ids(r);
    const metrics::Labels labels{{"slot", std::to_string(bid.slot)}, {"builder", std::to_string(bid.builder)}};
    if (bid.slot != current_) {
      ctx.emit("pbs.bid_rejected", static_cast<std::int64_t>(bid.value), with(labels, "reason", "late"));
      return;
    }
    if (std::any_of(bid.txs.begin(), bid.txs.end(), [&](std::uint64_t id) { return included_.contains(id); })) {
      ctx.emit("pbs.bid_rejected", static_cast<std::int64_t>(bid.value), with(labels, "reason", "stale"));
      return;
    }
    if (best_ && (bid.value < best_->value || (bid.value == best_->value && bid.builder >= best_->builder))) return;
    ctx.emit("pbs.bid_accepted", static_cast<std::int64_t>(bid.value), labels);
    best_ = std::move(bid);
  }

  void on_timer(harness::SutContext& ctx, std::uint64_t) override {
    metrics::Labels labels{{"slot", std::to_string(current_)}};
    if (best_) labels["builder"] = std::to_string(best_->builder);
    const std::uint64_t value = best_ ? best_->value : 0;
    cumulative_ += value;
    ctx.emit("pbs.slot_value", static_cast<std::int64_t>(value), labels);
    ctx.emit("pbs.cum_value", static_cast<std::int64_t>(cumulative_), labels);
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(Kind::slot_result));
    w.i64(current_);
    w.u32(best_ ? best_->builder : 0);
    w.u64(value);
    std::vector<std::uint64_t> ids;
    if (best_) {
      ids = best_->txs;
      included_.insert(ids.begin(), ids.end());
    }
    const auto msg = encode_ids(w, ids);
    for (const auto& b : builders_) ctx.send(b, msg);
    best_.reset();
    ++current_;
    ctx.set_timer(start_ + (current_ + 1) * slot_length_, 0);
  }

 private:
  struct Bid {
    std::int64_t slot = 0;
    std::uint32_t builder = 0;
    std::uint64_t value = 0;
    std::vector<std::uint64_t> txs;
  };

  static metrics::Labels with(metrics::Labels l, const std::string& k, const std::string& v) {
    l[k] = v;
    return l;
  }

  std::vector<std::string> builders_;
  Duration slot_length_{0};
  SimTime start_{0};
  std::int64_t current_ = 0;
  std::optional<Bid> best_;
  std::uint64_t cumulative_ = 0;
  std::set<std::uint64_t> included_;
};

}  // namespace

std::unique_ptr<harness::Service> make_service(const config::ServiceBinding& b, const config::ScenarioSpec& spec) {
  switch (b.service) {
    case config::ServiceKind::pbs_client:
      return std::make_unique<Client>(b, spec);
    case config::ServiceKind::pbs_builder:
      return std::make_unique<Builder>(b, spec);
    case config::ServiceKind::pbs_relay:
      return std::make_unique<Relay>(b, spec);
    default:
      throw std::invalid_argument("not a PBS service");
  }
}

}  // namespace desklab::sut::pbs
