#include <algorithm>
#include <cmath>
#include <set>

#include "desklab/config/scenario.hpp"
#include "desklab/config/service_schema.hpp"

namespace desklab::config {
namespace {

bool is_client_service(ServiceKind k) {
  return k == ServiceKind::frost_client || k == ServiceKind::pbs_client || k == ServiceKind::chain_client;
}

/// Service a client of kind `k` must target.
ServiceKind load_target_for(ServiceKind k) {
  switch (k) {
    case ServiceKind::frost_client:
      return ServiceKind::frost_coordinator;
    case ServiceKind::pbs_client:
      return ServiceKind::pbs_builder;
    default:
      return ServiceKind::chain_nonparticipation;
  }
}

class Checker {
 public:
  Checker(const ScenarioSpec& s, const std::string& source) : s_(s), source_(source) {}

  void run() {
    check_name(s_.name, "name");
    if (s_.duration.count() <= 0) fail("duration", "must be > 0");
    if (s_.repetitions < 1) fail("repetitions", "must be >= 1");
    check_nodes();
    check_links();
    check_services();
    check_loads();
    check_faults();
    check_process();
  }

 private:
  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    throw ConfigError(source_, 0, 0, field, msg);
  }

  static std::string at(std::string_view section, std::size_t i, std::string_view leaf = {}) {
    std::string f = std::string(section) + "." + std::to_string(i);
    if (!leaf.empty()) f += "." + std::string(leaf);
    return f;
  }

  void check_name(const std::string& name, const std::string& field) const {
    if (name.empty()) fail(field, "must not be empty");
    if (name == "." || name == "..") fail(field, "reserved name");
    for (char c : name) {
      const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
      if (!ok) fail(field, "'" + name + "' may only contain letters, digits, '-', '_' and '.'");
    }
  }

  void require_node(const std::string& id, const std::string& field) const {
    if (!s_.find_node(id)) fail(field, "unknown node '" + id + "'");
  }

  static bool probability(double p) { return p >= 0 && p <= 1; }

  void check_nodes() {
    if (s_.nodes.empty()) fail("nodes", "at least one node is required");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < s_.nodes.size(); ++i) {
      const auto& n = s_.nodes[i];
      if (n.id.empty()) fail(at("nodes", i, "id"), "must not be empty");
      if (n.id == kWildcard) fail(at("nodes", i, "id"), "'*' is reserved for link wildcards");
      if (!seen.insert(n.id).second) fail(at("nodes", i, "id"), "duplicate node id '" + n.id + "'");
      if (!(n.compute_capacity >= 0) || !std::isfinite(n.compute_capacity)) {
        fail(at("nodes", i, "compute_capacity"), "must be >= 0");
      }
      for (const auto& [op, cost] : n.costs) {
        if (!(cost >= 0) || !std::isfinite(cost)) fail(at("nodes", i, "costs." + op), "must be >= 0");
      }
    }
  }

  void check_links() {
    for (std::size_t i = 0; i < s_.links.size(); ++i) {
      const auto& l = s_.links[i];
      if (l.match.src != kWildcard) require_node(l.match.src, at("links", i, "match.src"));
      if (l.match.dst != kWildcard) require_node(l.match.dst, at("links", i, "match.dst"));
      if (l.delay.count() < 0) fail(at("links", i, "delay"), "must be >= 0");
      if (l.jitter.count() < 0) fail(at("links", i, "jitter"), "must be >= 0");
      if (l.jitter > l.delay) fail(at("links", i, "jitter"), "jitter must not exceed delay");
      if (!probability(l.loss_prob)) fail(at("links", i, "loss_prob"), "must be in [0, 1]");
      if (!probability(l.reorder_prob)) fail(at("links", i, "reorder_prob"), "must be in [0, 1]");
    }
  }

  void check_services() {
    std::set<std::string> bound;
    for (std::size_t i = 0; i < s_.services.size(); ++i) {
      const auto& b = s_.services[i];
      require_node(b.node, at("services", i, "node"));
      if (!bound.insert(b.node).second) fail(at("services", i, "node"), "node '" + b.node + "' already has a service");
      try {
        if (normalize_params(b.service, b.params) != b.params) fail(at("services", i, "params"), "parameters not normalized");
      } catch (const std::invalid_argument& e) {
        fail(at("services", i, "params"), e.what());
      }
    }

    const auto coords = s_.services_of(ServiceKind::frost_coordinator);
    if (coords.size() > 1) fail("services", "at most one frost-coordinator is supported");
    if (!coords.empty()) {
      const std::size_t idx = static_cast<std::size_t>(coords.front() - s_.services.data());
      const ParamView p(coords.front()->params);
      const auto n = p.uint("n");
      const auto t = p.uint("t");
      if (n < 1) fail(at("services", idx, "params.n"), "n must be >= 1");
      if (t < 1) fail(at("services", idx, "params.t"), "t must be >= 1");
      if (t > n) fail(at("services", idx, "params.t"), "t=" + std::to_string(t) + " exceeds n=" + std::to_string(n));
      const auto signers = s_.services_of(ServiceKind::frost_signer).size();
      if (n > signers) {
        fail(at("services", idx, "params.n"),
             "n=" + std::to_string(n) + " but only " + std::to_string(signers) + " frost-signer nodes are declared");
      }
      if (n > 65535) fail(at("services", idx, "params.n"), "n must be < 65536");
      if (p.uint("nonces") < 1) fail(at("services", idx, "params.nonces"), "must be >= 1");
    }

    same_param({ServiceKind::pbs_builder, ServiceKind::pbs_relay}, "slot_length");
    for (const char* key : {"block_interval", "block_capacity", "beta"}) same_param({ServiceKind::chain_participation}, key);
    for (std::size_t i = 0; i < s_.services.size(); ++i) {
      const auto& b = s_.services[i];
      const ParamView p(b.params);
      if (b.service == ServiceKind::pbs_builder || b.service == ServiceKind::pbs_relay) {
        if (p.duration("slot_length").count() <= 0) fail(at("services", i, "params.slot_length"), "must be > 0");
      }
      if (b.service == ServiceKind::pbs_builder) {
        if (p.duration("rebuild_interval").count() <= 0) fail(at("services", i, "params.rebuild_interval"), "must be > 0");
        if (p.duration("blackout_end") < p.duration("blackout_start")) {
          fail(at("services", i, "params.blackout_end"), "must not precede blackout_start");
        }
      }
      if (b.service == ServiceKind::pbs_client && p.uint("tx_gas") == 0) fail(at("services", i, "params.tx_gas"), "must be > 0");
      if (b.service == ServiceKind::pbs_client && p.uint("base_fee") == 0) fail(at("services", i, "params.base_fee"), "must be > 0");
      if (b.service == ServiceKind::chain_participation && p.duration("block_interval").count() <= 0) {
        fail(at("services", i, "params.block_interval"), "must be > 0");
      }
      if (b.service == ServiceKind::chain_relay && p.duration("sample_interval").count() <= 0) {
        fail(at("services", i, "params.sample_interval"), "must be > 0");
      }
    }
  }

  void same_param(std::initializer_list<ServiceKind> kinds, const std::string& key) {
    const std::string* first = nullptr;
    for (std::size_t i = 0; i < s_.services.size(); ++i) {
      const auto& b = s_.services[i];
      if (std::find(kinds.begin(), kinds.end(), b.service) == kinds.end()) continue;
      const auto& v = b.params.at(key);
      if (first && *first != v) fail(at("services", i, "params." + key), "must match the other " + key + " values");
      first = &v;
    }
  }

  void check_loads() {
    for (std::size_t i = 0; i < s_.loads.size(); ++i) {
      const auto& l = s_.loads[i];
      require_node(l.client, at("loads", i, "client"));
      require_node(l.target, at("loads", i, "target"));
      const auto* cs = s_.service_on(l.client);
      if (!cs || !is_client_service(cs->service)) {
        fail(at("loads", i, "client"), "node '" + l.client + "' does not run a client service");
      }
      const auto* ts = s_.service_on(l.target);
      const auto want = load_target_for(cs->service);
      if (!ts || ts->service != want) {
        fail(at("loads", i, "target"),
             "node '" + l.target + "' must run " + std::string(to_string(want)) + " to serve " + std::string(to_string(cs->service)));
      }
      if (!(l.rate_tps >= 0) || !std::isfinite(l.rate_tps)) fail(at("loads", i, "rate_tps"), "must be >= 0");
      if (!probability(l.high_fee_share)) fail(at("loads", i, "high_fee_share"), "must be in [0, 1]");
      if (!(l.high_fee_multiplier > 0)) fail(at("loads", i, "high_fee_multiplier"), "must be > 0");
      if (l.start.count() < 0) fail(at("loads", i, "start"), "must be >= 0");
      if (l.start >= l.stop) fail(at("loads", i, "stop"), "stop must be after start");
      if (l.stop > s_.duration) fail(at("loads", i, "stop"), "stop must not exceed the scenario duration");
    }
  }

  void check_faults() {
    for (std::size_t i = 0; i < s_.faults.size(); ++i) {
      const auto& f = s_.faults[i];
      require_node(f.target, at("faults", i, "target"));
      if (f.at.count() < 0) fail(at("faults", i, "at"), "must be >= 0");
      if (f.at >= s_.duration) fail(at("faults", i, "at"), "must be before the end of the scenario");
      if (f.kind != FaultKind::partition && !f.peers.empty()) fail(at("faults", i, "peers"), "only partition faults take peers");
      if (f.kind != FaultKind::byzantine && !f.behavior.empty()) {
        fail(at("faults", i, "behavior"), "only byzantine faults take a behavior");
      }
      if (f.kind == FaultKind::partition) {
        if (f.peers.empty()) fail(at("faults", i, "peers"), "partition needs at least one peer");
        for (std::size_t k = 0; k < f.peers.size(); ++k) {
          require_node(f.peers[k], at("faults", i, "peers." + std::to_string(k)));
          if (f.peers[k] == f.target) fail(at("faults", i, "peers." + std::to_string(k)), "cannot partition a node from itself");
        }
      }
      if (f.kind == FaultKind::byzantine) {
        const auto* svc = s_.service_on(f.target);
        if (!svc) fail(at("faults", i, "target"), "byzantine target '" + f.target + "' runs no service");
        const auto& tags = schema_for(svc->service).byzantine_tags;
        if (std::find(tags.begin(), tags.end(), f.behavior) == tags.end()) {
          std::string known;
          for (auto t : tags) known += (known.empty() ? "" : ", ") + std::string(t);
          fail(at("faults", i, "behavior"), "behavior '" + f.behavior + "' is not recognized by " +
                                                std::string(to_string(svc->service)) +
                                                (known.empty() ? " (it has none)" : " (known: " + known + ")"));
        }
      }
    }
  }

  void check_process() {
    const auto& p = s_.process;
    if (p.output_dir.empty()) fail("process.output_dir", "must not be empty");
    if (p.exports.empty()) fail("process.exports", "at least one export format is required");
    for (std::size_t i = 0; i < p.percentiles.size(); ++i) {
      if (!(p.percentiles[i] >= 0 && p.percentiles[i] <= 100)) fail(at("process.percentiles", i), "must be in [0, 100]");
      if (i > 0 && p.percentiles[i] < p.percentiles[i - 1]) fail(at("process.percentiles", i), "percentiles must be sorted");
    }
    if (p.window.count() <= 0) fail("process.window", "must be > 0");
  }

  const ScenarioSpec& s_;
  const std::string& source_;
};

}  // namespace

void validate(const ScenarioSpec& spec, const std::string& source) { Checker(spec, source).run(); }

}  // namespace desklab::config
