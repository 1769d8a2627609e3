#include "desklab/sut/frost_services.hpp"

#include <deque>
#include <map>
#include <set>

#include "desklab/config/service_schema.hpp"
#include "desklab/frost/frost.hpp"
#include "desklab/frost/ristretto_group.hpp"
#include "desklab/frost/toy_group.hpp"
#include "desklab/frost/wire.hpp"

namespace desklab::sut {
namespace {

using namespace std::chrono_literals;
using frost::Index;
using frost::PrimeOrderGroup;
namespace fw = frost::wire;

struct Topology {
  std::string coordinator;
  std::vector<std::string> signers;  // signers[i - 1] holds index i
  std::vector<std::string> clients;
  std::uint32_t n = 0;
  std::uint32_t t = 0;
  bool three_round = false;
  std::string group = "ristretto255";
  std::string context;
  std::size_t nonces = 0;
  Duration timeout{0};

  static Topology from(const config::ScenarioSpec& spec) {
    Topology topo;
    const auto coords = spec.services_of(config::ServiceKind::frost_coordinator);
    if (coords.empty()) return topo;
    const auto params = config::normalize_params(config::ServiceKind::frost_coordinator, coords.front()->params);
    const config::ParamView p(params);
    topo.coordinator = coords.front()->node;
    topo.n = static_cast<std::uint32_t>(p.uint("n"));
    topo.t = static_cast<std::uint32_t>(p.uint("t"));
    topo.three_round = p.uint("rounds") == 3;
    topo.group = p.string("group");
    topo.context = p.string("context");
    topo.nonces = p.uint("nonces");
    topo.timeout = p.duration("timeout");
    for (const auto* b : spec.services_of(config::ServiceKind::frost_signer)) {
      if (topo.signers.size() < topo.n) topo.signers.push_back(b->node);
    }
    if (topo.signers.size() < topo.n) throw std::invalid_argument("fewer frost-signer nodes than n");
    for (const auto* b : spec.services_of(config::ServiceKind::frost_client)) topo.clients.push_back(b->node);
    return topo;
  }

  Index index_of(const std::string& node) const {
    for (std::size_t i = 0; i < signers.size(); ++i) {
      if (signers[i] == node) return static_cast<Index>(i + 1);
    }
    return 0;
  }

  Duration coordinator_timeout(Duration max_delay) const {
    return timeout > 0ns ? timeout : frost_default_timeout(max_delay);
  }
};

std::string join(const std::vector<Index>& xs) {
  std::string s;
  for (auto x : xs) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

template <PrimeOrderGroup G>
void send(harness::SutContext& ctx, const std::string& dst, const fw::Message<G>& msg) {
  ctx.send(dst, fw::encode<G>(msg));
}

template <PrimeOrderGroup G>
class Signer final : public harness::Service {
 public:
  Signer(Topology topo, Index index) : topo_(std::move(topo)), index_(index) {}

  void on_start(harness::SutContext& ctx) override {
    if (index_ == 0) {  // spare signer beyond n
      ctx.report_ready();
      return;
    }
    ctx.charge("frost.dkg_round1");
    dkg_.emplace(index_, topo_.n, topo_.t, topo_.context, ctx.rng());
    const fw::DkgRound1<G> msg{dkg_->broadcast()};
    for (Index j = 1; j <= topo_.n; ++j) {
      if (j != index_) send<G>(ctx, topo_.signers[j - 1], msg);
    }
    send<G>(ctx, topo_.coordinator, msg);
    progress(ctx);
  }

  void on_message(harness::SutContext& ctx, const std::string& from, std::span<const std::uint8_t> payload) override {
    if (index_ == 0) return;
    auto msg = fw::decode<G>(payload);
    if (auto* m = std::get_if<fw::DkgRound1<G>>(&msg)) {
      ctx.charge("frost.verify");
      dkg_->accept_round1(m->broadcast);
      round1_from_.insert(m->broadcast.sender);
      if (auto it = early_shares_.find(m->broadcast.sender); it != early_shares_.end()) {
        ctx.charge("frost.verify_share");
        dkg_->accept_share(it->first, it->second);
        early_shares_.erase(it);
      }
      progress(ctx);
    } else if (auto* m = std::get_if<fw::DkgShare<G>>(&msg)) {
      if (m->to != index_ || topo_.index_of(from) != m->from) throw std::invalid_argument("misaddressed DKG share");
      if (!round1_from_.contains(m->from)) {
        early_shares_.emplace(m->from, m->share);
        return;
      }
      ctx.charge("frost.verify_share");
      dkg_->accept_share(m->from, m->share);
      progress(ctx);
    } else if (auto* m = std::get_if<fw::SignPackage<G>>(&msg)) {
      sign(ctx, *m);
    } else if (auto* m = std::get_if<fw::CommitRequest>(&msg)) {
      if (!key_) return;
      const auto fresh = nonces_.preprocess(1, ctx.rng());
      send<G>(ctx, topo_.coordinator, fw::CommitReply<G>{m->request, index_, fresh.front()});
    }
  }

 private:
  void progress(harness::SutContext& ctx) {
    if (!shares_sent_ && dkg_->has_all_round1()) {
      shares_sent_ = true;
      for (Index j = 1; j <= topo_.n; ++j) {
        if (j == index_) continue;
        ctx.charge("frost.share");
        send<G>(ctx, topo_.signers[j - 1], fw::DkgShare<G>{index_, j, dkg_->share_for(j)});
      }
    }
    if (shares_sent_ && !key_ && dkg_->has_all_shares()) {
      ctx.charge("frost.dkg_finish");
      key_ = dkg_->finish();
      const auto count = topo_.three_round ? 0 : topo_.nonces;
      ctx.charge("frost.preprocess", static_cast<double>(count));
      send<G>(ctx, topo_.coordinator, fw::NonceBatch<G>{index_, nonces_.preprocess(count, ctx.rng())});
      ctx.report_ready();
    }
  }

  void sign(harness::SutContext& ctx, const fw::SignPackage<G>& m) {
    if (!key_) return;
    const auto it = std::find_if(m.entries.begin(), m.entries.end(), [&](const auto& e) { return e.signer == index_; });
    if (it == m.entries.end()) throw std::invalid_argument("signing package without this signer");
    auto& nonce = nonces_.get(it->nonce.id);
    if (ctx.byzantine("withhold-partial")) {
      nonce.consumed = true;
      return;
    }
    const auto behavior =
        ctx.byzantine("bad-partial-sig") ? frost::SignerBehavior::bad_partial_sig : frost::SignerBehavior::honest;
    ctx.charge("frost.sign_partial");
    fw::Partial<G> reply{m.request, frost::sign_partial<G>(*key_, m.to_signing_package(topo_.t), nonce, behavior), {}};
    if (!topo_.three_round) reply.next_nonce = nonces_.preprocess(1, ctx.rng()).front();
    send<G>(ctx, topo_.coordinator, reply);
  }

  Topology topo_;
  Index index_;
  std::optional<frost::DkgParticipant<G>> dkg_;
  std::set<Index> round1_from_;
  std::map<Index, typename G::Scalar> early_shares_;
  bool shares_sent_ = false;
  std::optional<frost::KeyPackage<G>> key_;
  frost::NonceStore<G> nonces_;
};

template <PrimeOrderGroup G>
class Coordinator final : public harness::Service {
 public:
  explicit Coordinator(Topology topo) : topo_(std::move(topo)) {}

  void on_message(harness::SutContext& ctx, const std::string& from, std::span<const std::uint8_t> payload) override {
    auto msg = fw::decode<G>(payload);
    if (auto* m = std::get_if<fw::DkgRound1<G>>(&msg)) {
      ctx.charge("frost.verify");
      if (!frost::verify_round1<G>(m->broadcast, topo_.context, topo_.t)) {
        throw frost::ProtocolError(frost::ProtocolError::Kind::invalid_proof, {m->broadcast.sender}, "round-1 proof rejected");
      }
      commitments_[m->broadcast.sender] = m->broadcast.commitment;
      maybe_ready(ctx);
    } else if (auto* m = std::get_if<fw::NonceBatch<G>>(&msg)) {
      auto& q = nonces_[m->signer];
      q.insert(q.end(), m->commitments.begin(), m->commitments.end());
      batches_.insert(m->signer);
      maybe_ready(ctx);
    } else if (auto* m = std::get_if<fw::SignRequest>(&msg)) {
      start(ctx, from, *m);
    } else if (auto* m = std::get_if<fw::CommitReply<G>>(&msg)) {
      auto it = pending_.find(m->request);
      if (it == pending_.end() || it->second.package) return;
      auto& p = it->second;
      if (std::find(p.signers.begin(), p.signers.end(), m->signer) == p.signers.end()) return;
      p.commits[m->signer] = m->nonce;
      if (p.commits.size() == p.signers.size()) {
        std::vector<fw::PackageEntry<G>> entries;
        for (const auto& [l, c] : p.commits) entries.push_back({l, c});
        send_package(ctx, m->request, p, std::move(entries));
      }
    } else if (auto* m = std::get_if<fw::Partial<G>>(&msg)) {
      on_partial(ctx, *m);
    }
  }

  void on_timer(harness::SutContext& ctx, std::uint64_t request) override {
    auto it = pending_.find(request);
    if (it == pending_.end()) return;
    auto& p = it->second;
    std::vector<Index> missing;
    for (auto l : p.signers) {
      const bool answered = p.package ? p.partials.contains(l) : p.commits.contains(l);
      if (!answered) {
        missing.push_back(l);
        suspected_.insert(l);
      }
    }
    ctx.emit("frost.coordinator_timeout", std::int64_t{1}, {{"missing", join(missing)}});
    ctx.send(p.client, fw::encode<G>(fw::SignFailure{p.client_request, fw::FailureReason::insufficient_signers, missing}));
    pending_.erase(it);
  }

 private:
  struct Pending {
    std::string client;
    std::uint64_t client_request = 0;
    Bytes message;
    std::vector<Index> signers;
    std::map<Index, frost::NonceCommitment<G>> commits;
    std::unique_ptr<frost::SigningPackage<G>> package;
    std::unique_ptr<frost::SigningContext<G>> signing;
    std::map<Index, typename G::Scalar> partials;
    std::vector<Index> invalid;
    harness::TimerId timer = 0;
  };

  void maybe_ready(harness::SutContext& ctx) {
    if (pub_ || commitments_.size() != topo_.n || batches_.size() != topo_.n) return;
    ctx.charge("frost.derive_public");
    pub_ = frost::derive_public_package<G>(topo_.n, topo_.t, commitments_);
    for (const auto& c : topo_.clients) send<G>(ctx, c, fw::GroupKey<G>{topo_.n, topo_.t, pub_->group_key});
    ctx.report_ready();
  }

  void start(harness::SutContext& ctx, const std::string& client, const fw::SignRequest& req) {
    std::vector<Index> chosen;
    for (Index l = 1; l <= topo_.n && chosen.size() < topo_.t; ++l) {
      if (suspected_.contains(l)) continue;
      if (!topo_.three_round && nonces_[l].empty()) continue;
      chosen.push_back(l);
    }
    if (!pub_ || chosen.size() < topo_.t) {
      ctx.emit("frost.rejected", std::int64_t{1});
      ctx.send(client, fw::encode<G>(fw::SignFailure{req.request, fw::FailureReason::insufficient_signers, {}}));
      return;
    }
    const auto id = next_request_++;
    auto& p = pending_[id];
    p.client = client;
    p.client_request = req.request;
    p.message = req.message;
    p.signers = chosen;
    p.timer = ctx.set_timer_after(topo_.coordinator_timeout(ctx.max_link_delay()), id);
    if (topo_.three_round) {
      for (auto l : chosen) send<G>(ctx, topo_.signers[l - 1], fw::CommitRequest{id});
      return;
    }
    std::vector<fw::PackageEntry<G>> entries;
    for (auto l : chosen) {
      entries.push_back({l, nonces_[l].front()});
      nonces_[l].pop_front();
    }
    send_package(ctx, id, p, std::move(entries));
  }

  void send_package(harness::SutContext& ctx, std::uint64_t id, Pending& p, std::vector<fw::PackageEntry<G>> entries) {
    ctx.charge("frost.package");
    fw::SignPackage<G> msg{id, p.message, std::move(entries)};
    p.package = std::make_unique<frost::SigningPackage<G>>(msg.to_signing_package(topo_.t));
    p.signing = std::make_unique<frost::SigningContext<G>>(*p.package, pub_->group_key);
    const auto frame = fw::encode<G>(msg);
    for (auto l : p.signers) ctx.send(topo_.signers[l - 1], frame);
  }

  void on_partial(harness::SutContext& ctx, const fw::Partial<G>& m) {
    const auto signer = m.partial.signer;
    if (m.next_nonce) nonces_[signer].push_back(*m.next_nonce);
    auto it = pending_.find(m.request);
    if (it == pending_.end() || !it->second.package) return;
    auto& p = it->second;
    if (std::find(p.signers.begin(), p.signers.end(), signer) == p.signers.end() || p.partials.contains(signer)) return;
    ctx.charge("frost.verify_partial");
    if (!frost::verify_partial<G>(*p.signing, m.partial, *pub_)) p.invalid.push_back(signer);
    p.partials.emplace(signer, m.partial.z);
    if (p.partials.size() < p.signers.size()) return;

    ctx.cancel_timer(p.timer);
    if (!p.invalid.empty()) {
      for (auto l : p.invalid) {
        suspected_.insert(l);
        ctx.emit("frost.culprit", std::int64_t{l});
      }
      ctx.send(p.client, fw::encode<G>(fw::SignFailure{p.client_request, fw::FailureReason::invalid_partial, p.invalid}));
    } else {
      ctx.charge("frost.aggregate");
      frost::Signature<G> sig{p.signing->group_commitment, typename G::Scalar{}};
      for (const auto& [l, z] : p.partials) sig.z += z;
      ctx.send(p.client, fw::encode<G>(fw::SignatureReply<G>{p.client_request, sig}));
    }
    pending_.erase(it);
  }

  Topology topo_;
  std::map<Index, std::vector<typename G::Element>> commitments_;
  std::set<Index> batches_;
  std::map<Index, std::deque<frost::NonceCommitment<G>>> nonces_;
  std::set<Index> suspected_;
  std::optional<frost::PublicKeyPackage<G>> pub_;
  std::uint64_t next_request_ = 0;
  std::map<std::uint64_t, Pending> pending_;
};

template <PrimeOrderGroup G>
class Client final : public harness::Service {
 public:
  Client(Topology topo, Duration timeout) : topo_(std::move(topo)), timeout_(timeout) {}

  void on_start(harness::SutContext& ctx) override {
    if (topo_.coordinator.empty()) ctx.report_ready();
  }

  void on_message(harness::SutContext& ctx, const std::string&, std::span<const std::uint8_t> payload) override {
    auto msg = fw::decode<G>(payload);
    if (auto* m = std::get_if<fw::GroupKey<G>>(&msg)) {
      key_ = m->key;
      ctx.report_ready();
    } else if (auto* m = std::get_if<fw::SignatureReply<G>>(&msg)) {
      auto it = outstanding_.find(m->request);
      if (it == outstanding_.end()) return;
      const auto latency = ctx.now() - it->second.sent;
      ctx.charge("frost.verify");
      if (frost::verify<G>(*key_, it->second.message, m->signature)) {
        ctx.emit("frost.e2e_ns", latency.count());
      } else {
        ctx.emit("frost.sign_failed", std::int64_t{1}, {{"reason", "bad_signature"}});
      }
      finish(ctx, it);
    } else if (auto* m = std::get_if<fw::SignFailure>(&msg)) {
      auto it = outstanding_.find(m->request);
      if (it == outstanding_.end()) return;
      const char* reason = m->reason == fw::FailureReason::invalid_partial ? "invalid_partial" : "insufficient_signers";
      metrics::Labels labels{{"reason", reason}};
      if (!m->culprits.empty()) labels["culprits"] = join(m->culprits);
      ctx.emit("frost.sign_failed", std::int64_t{1}, std::move(labels));
      finish(ctx, it);
    }
  }

  void on_client_op(harness::SutContext& ctx, const harness::ClientOp& op) override {
    auto& o = outstanding_[op.index];
    o.sent = ctx.now();
    o.message = ctx.rng().bytes(op.payload_bytes);
    const auto wait = timeout_ > 0ns ? timeout_ : 2 * frost_default_timeout(ctx.max_link_delay());
    o.timer = ctx.set_timer_after(wait, op.index);
    ctx.send(op.target, fw::encode<G>(fw::SignRequest{op.index, o.message}));
  }

  void on_timer(harness::SutContext& ctx, std::uint64_t request) override {
    auto it = outstanding_.find(request);
    if (it == outstanding_.end()) return;
    ctx.emit("frost.timeout", std::int64_t{1}, {{"cause", "timer"}});
    outstanding_.erase(it);
  }

  void on_finish(harness::SutContext& ctx) override {
    for (std::size_t k = 0; k < outstanding_.size(); ++k) {
      ctx.emit("frost.timeout", std::int64_t{1}, {{"cause", "run_end"}});
    }
    outstanding_.clear();
  }

 private:
  struct Outstanding {
    SimTime sent{0};
    Bytes message;
    harness::TimerId timer = 0;
  };

  void finish(harness::SutContext& ctx, typename std::map<std::uint64_t, Outstanding>::iterator it) {
    ctx.cancel_timer(it->second.timer);
    outstanding_.erase(it);
  }

  Topology topo_;
  Duration timeout_;
  std::optional<typename G::Element> key_;
  std::map<std::uint64_t, Outstanding> outstanding_;
};

template <PrimeOrderGroup G>
std::unique_ptr<harness::Service> make_for_group(const config::ServiceBinding& b, Topology topo) {
  switch (b.service) {
    case config::ServiceKind::frost_coordinator:
      return std::make_unique<Coordinator<G>>(std::move(topo));
    case config::ServiceKind::frost_signer: {
      const auto index = topo.index_of(b.node);
      return std::make_unique<Signer<G>>(std::move(topo), index);
    }
    case config::ServiceKind::frost_client: {
      const auto params = config::normalize_params(b.service, b.params);
      return std::make_unique<Client<G>>(std::move(topo), config::ParamView(params).duration("timeout"));
    }
    default:
      throw std::invalid_argument("not a FROST service");
  }
}

}  // namespace

Duration frost_default_timeout(Duration max_link_delay) { return std::max<Duration>(10 * max_link_delay, 100ms); }

std::unique_ptr<harness::Service> make_frost_service(const config::ServiceBinding& binding,
                                                     const config::ScenarioSpec& spec) {
  auto topo = Topology::from(spec);
  if (topo.group == "toy") return make_for_group<frost::ToyGroup>(binding, std::move(topo));
  return make_for_group<frost::Ristretto255>(binding, std::move(topo));
}

}  // namespace desklab::sut
