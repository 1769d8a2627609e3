#include <yaml-cpp/yaml.h>

#include "desklab/common/format.hpp"
#include "desklab/config/scenario.hpp"

namespace desklab::config {
namespace {

std::string ns(Duration d) { return std::to_string(d.count()); }

void emit_string_map(YAML::Emitter& e, const char* key, const std::map<std::string, std::string>& m) {
  if (m.empty()) return;
  e << YAML::Key << key << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : m) e << YAML::Key << k << YAML::Value << v;
  e << YAML::EndMap;
}

void emit_spec_body(YAML::Emitter& e, const ScenarioSpec& s) {
  e << YAML::Key << "name" << YAML::Value << s.name;
  e << YAML::Key << "seed" << YAML::Value << s.seed;
  e << YAML::Key << "repetitions" << YAML::Value << s.repetitions;
  e << YAML::Key << "duration" << YAML::Value << ns(s.duration);

  e << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
  for (const auto& n : s.nodes) {
    e << YAML::BeginMap;
    e << YAML::Key << "id" << YAML::Value << n.id;
    e << YAML::Key << "role" << YAML::Value << std::string(to_string(n.role));
    e << YAML::Key << "compute_capacity" << YAML::Value << format_double(n.compute_capacity);
    if (!n.costs.empty()) {
      e << YAML::Key << "costs" << YAML::Value << YAML::BeginMap;
      for (const auto& [op, c] : n.costs) e << YAML::Key << op << YAML::Value << format_double(c);
      e << YAML::EndMap;
    }
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "links" << YAML::Value << YAML::BeginSeq;
  for (const auto& l : s.links) {
    e << YAML::BeginMap;
    e << YAML::Key << "match" << YAML::Value << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "src" << YAML::Value << l.match.src << YAML::Key << "dst" << YAML::Value << l.match.dst;
    e << YAML::EndMap;
    e << YAML::Key << "delay" << YAML::Value << ns(l.delay);
    e << YAML::Key << "jitter" << YAML::Value << ns(l.jitter);
    e << YAML::Key << "jitter_dist" << YAML::Value << std::string(to_string(l.jitter_dist));
    e << YAML::Key << "loss_prob" << YAML::Value << format_double(l.loss_prob);
    e << YAML::Key << "reorder_prob" << YAML::Value << format_double(l.reorder_prob);
    e << YAML::Key << "rate_bps" << YAML::Value << l.rate_bps;
    e << YAML::Key << "queue_limit" << YAML::Value << l.queue_limit;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "services" << YAML::Value << YAML::BeginSeq;
  for (const auto& b : s.services) {
    e << YAML::BeginMap;
    e << YAML::Key << "node" << YAML::Value << b.node;
    e << YAML::Key << "service" << YAML::Value << std::string(to_string(b.service));
    emit_string_map(e, "params", b.params);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "loads" << YAML::Value << YAML::BeginSeq;
  for (const auto& l : s.loads) {
    e << YAML::BeginMap;
    e << YAML::Key << "client" << YAML::Value << l.client;
    e << YAML::Key << "target" << YAML::Value << l.target;
    e << YAML::Key << "pattern" << YAML::Value << std::string(to_string(l.pattern));
    e << YAML::Key << "rate_tps" << YAML::Value << format_double(l.rate_tps);
    e << YAML::Key << "payload_bytes" << YAML::Value << l.payload_bytes;
    e << YAML::Key << "high_fee_share" << YAML::Value << format_double(l.high_fee_share);
    e << YAML::Key << "high_fee_multiplier" << YAML::Value << format_double(l.high_fee_multiplier);
    e << YAML::Key << "start" << YAML::Value << ns(l.start);
    e << YAML::Key << "stop" << YAML::Value << ns(l.stop);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "faults" << YAML::Value << YAML::BeginSeq;
  for (const auto& f : s.faults) {
    e << YAML::BeginMap;
    e << YAML::Key << "at" << YAML::Value << ns(f.at);
    e << YAML::Key << "target" << YAML::Value << f.target;
    e << YAML::Key << "kind" << YAML::Value << std::string(to_string(f.kind));
    if (!f.peers.empty()) e << YAML::Key << "peers" << YAML::Value << YAML::Flow << f.peers;
    if (!f.behavior.empty()) e << YAML::Key << "behavior" << YAML::Value << f.behavior;
    emit_string_map(e, "params", f.params);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  const auto& p = s.process;
  e << YAML::Key << "process" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "output_dir" << YAML::Value << p.output_dir;
  e << YAML::Key << "exports" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto f : p.exports) e << std::string(to_string(f));
  e << YAML::EndSeq;
  e << YAML::Key << "percentiles" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto v : p.percentiles) e << format_double(v);
  e << YAML::EndSeq;
  e << YAML::Key << "window" << YAML::Value << ns(p.window);
  emit_string_map(e, "metadata", p.metadata);
  e << YAML::EndMap;
}

}  // namespace

std::string serialize(const ScenarioSpec& spec) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  emit_spec_body(e, spec);
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::string serialize(const Campaign& campaign) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  emit_spec_body(e, campaign.base);
  if (!campaign.sweeps.empty()) {
    e << YAML::Key << "sweeps" << YAML::Value << YAML::BeginSeq;
    for (const auto& sw : campaign.sweeps) {
      e << YAML::BeginMap << YAML::Key << "path" << YAML::Value << sw.path;
      e << YAML::Key << "values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (const auto& v : sw.values) e << YAML::Load(v);
      e << YAML::EndSeq << YAML::EndMap;
    }
    e << YAML::EndSeq;
  }
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace desklab::config
