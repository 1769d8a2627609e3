#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "desklab/config/scenario.hpp"
#include "desklab/config/service_schema.hpp"

namespace desklab::config {
namespace {

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  Campaign parse(std::string_view text) {
    YAML::Node root;
    try {
      root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
      throw ConfigError(source_, e.mark.line + 1, e.mark.column + 1, "", "syntax error: " + e.msg);
    }
    if (!root.IsMap()) throw ConfigError(source_, 1, 1, "", "scenario document must be a mapping");
    Campaign c;
    try {
      c = read(root);
      validate(c.base, source_);
    } catch (const ConfigError& e) {
      if (e.line() > 0) throw;
      const auto mark = locate(e.field());
      throw ConfigError(source_, mark.line + 1, mark.column + 1, e.field(), e.message());
    }
    return c;
  }

 private:
  [[noreturn]] void fail(const YAML::Node& n, const std::string& field, const std::string& msg) const {
    const auto m = n.Mark();
    throw ConfigError(source_, m.line + 1, m.column + 1, field, msg);
  }

  YAML::Mark locate(std::string field) const {
    while (true) {
      if (const auto it = marks_.find(field); it != marks_.end()) return it->second;
      const auto dot = field.rfind('.');
      if (dot == std::string::npos) break;
      field.resize(dot);
    }
    return root_mark_;
  }

  void note(const std::string& field, const YAML::Node& n) { marks_[field] = n.Mark(); }

  static std::string join(const std::string& a, std::string_view b) { return a.empty() ? std::string(b) : a + "." + std::string(b); }

  void expect_map(const YAML::Node& n, const std::string& field) const {
    if (!n.IsMap()) fail(n, field, "expected a mapping");
  }

  void allow_keys(const YAML::Node& n, const std::string& field, std::initializer_list<std::string_view> allowed) const {
    expect_map(n, field);
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (auto a : allowed) ok = ok || a == key;
      if (!ok) fail(kv.first, join(field, key), "unknown field '" + key + "'");
    }
  }

  static bool present(const YAML::Node& map, std::string_view key) {
    const auto n = map[std::string(key)];
    return n.IsDefined() && !n.IsNull();
  }

  std::vector<YAML::Node> list(const YAML::Node& map, std::string_view key, const std::string& field) {
    std::vector<YAML::Node> out;
    const auto n = map[std::string(key)];
    if (!n.IsDefined() || n.IsNull()) return out;
    note(field, n);
    if (!n.IsSequence()) fail(n, field, "expected a list");
    for (const auto& item : n) out.push_back(item);
    return out;
  }

  std::string scalar(const YAML::Node& n, const std::string& field) {
    if (!n.IsScalar()) fail(n, field, "expected a scalar value");
    note(field, n);
    return n.Scalar();
  }

  std::string string_field(const YAML::Node& map, std::string_view key, const std::string& field) {
    const auto n = map[std::string(key)];
    if (!n.IsDefined() || n.IsNull()) fail(map, field, "missing required field");
    return scalar(n, field);
  }

  std::uint64_t u64(const YAML::Node& n, const std::string& field) {
    const auto s = scalar(n, field);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      fail(n, field, "expected a non-negative integer, got '" + s + "'");
    }
    return v;
  }

  double number(const YAML::Node& n, const std::string& field) {
    const auto s = scalar(n, field);
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
      fail(n, field, "expected a number, got '" + s + "'");
    }
    return v;
  }

  Duration duration(const YAML::Node& n, const std::string& field) {
    const auto s = scalar(n, field);
    try {
      return parse_duration(s);
    } catch (const std::invalid_argument& e) {
      fail(n, field, e.what());
    }
  }

  template <typename E>
  E enumerated(const YAML::Node& n, const std::string& field, std::optional<E> (*parse_fn)(std::string_view)) {
    const auto s = scalar(n, field);
    const auto v = parse_fn(s);
    if (!v) fail(n, field, "unrecognized value '" + s + "'");
    return *v;
  }

  std::map<std::string, std::string> string_map(const YAML::Node& n, const std::string& field) {
    std::map<std::string, std::string> out;
    if (!n.IsDefined() || n.IsNull()) return out;
    expect_map(n, field);
    note(field, n);
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      out[key] = scalar(kv.second, join(field, key));
    }
    return out;
  }

  Campaign read(const YAML::Node& root) {
    root_mark_ = root.Mark();
    allow_keys(root, "", {"name", "seed", "repetitions", "duration", "nodes", "links", "services", "loads", "faults",
                          "process", "sweeps"});
    Campaign c;
    ScenarioSpec& s = c.base;
    s.name = string_field(root, "name", "name");
    if (present(root, "seed")) s.seed = u64(root["seed"], "seed");
    if (present(root, "repetitions")) {
      const auto reps = u64(root["repetitions"], "repetitions");
      if (reps > UINT32_MAX) fail(root["repetitions"], "repetitions", "too large");
      s.repetitions = static_cast<std::uint32_t>(reps);
    }
    if (!present(root, "duration")) fail(root, "duration", "missing required field");
    s.duration = duration(root["duration"], "duration");

    if (!present(root, "nodes")) fail(root, "nodes", "missing required field");
    auto nodes = list(root, "nodes", "nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) s.nodes.push_back(read_node(nodes[i], "nodes." + std::to_string(i)));
    auto links = list(root, "links", "links");
    for (std::size_t i = 0; i < links.size(); ++i) s.links.push_back(read_link(links[i], "links." + std::to_string(i)));
    auto services = list(root, "services", "services");
    for (std::size_t i = 0; i < services.size(); ++i) {
      s.services.push_back(read_service(services[i], "services." + std::to_string(i)));
    }
    auto loads = list(root, "loads", "loads");
    for (std::size_t i = 0; i < loads.size(); ++i) {
      s.loads.push_back(read_load(loads[i], "loads." + std::to_string(i), s.duration));
    }
    auto faults = list(root, "faults", "faults");
    for (std::size_t i = 0; i < faults.size(); ++i) {
      s.faults.push_back(read_fault(faults[i], "faults." + std::to_string(i)));
    }
    if (present(root, "process")) s.process = read_process(root["process"], "process");

    auto sweeps = list(root, "sweeps", "sweeps");
    for (std::size_t i = 0; i < sweeps.size(); ++i) {
      const std::string field = "sweeps." + std::to_string(i);
      allow_keys(sweeps[i], field, {"path", "values"});
      note(field, sweeps[i]);
      Sweep sw;
      sw.path = string_field(sweeps[i], "path", field + ".path");
      for (const auto& v : list(sweeps[i], "values", field + ".values")) {
        if (v.IsScalar()) {
          sw.values.push_back(v.Scalar());
        } else {
          YAML::Emitter e;
          e << YAML::Flow << v;
          sw.values.push_back(e.c_str());
        }
      }
      if (sw.values.empty()) fail(sweeps[i], field + ".values", "sweep needs at least one value");
      c.sweeps.push_back(std::move(sw));
    }
    return c;
  }

  NodeSpec read_node(const YAML::Node& n, const std::string& field) {
    note(field, n);
    allow_keys(n, field, {"id", "role", "compute_capacity", "costs"});
    NodeSpec node;
    node.id = string_field(n, "id", field + ".id");
    if (present(n, "role")) node.role = enumerated<Role>(n["role"], field + ".role", parse_role);
    if (present(n, "compute_capacity")) node.compute_capacity = number(n["compute_capacity"], field + ".compute_capacity");
    if (present(n, "costs")) {
      const auto costs = n["costs"];
      expect_map(costs, field + ".costs");
      for (const auto& kv : costs) {
        const auto op = kv.first.as<std::string>();
        node.costs[op] = number(kv.second, field + ".costs." + op);
      }
    }
    return node;
  }

  LinkSpec read_link(const YAML::Node& n, const std::string& field) {
    note(field, n);
    allow_keys(n, field, {"match", "delay", "jitter", "jitter_dist", "loss_prob", "reorder_prob", "rate_bps",
                          "queue_limit"});
    LinkSpec l;
    if (present(n, "match")) {
      const auto m = n["match"];
      allow_keys(m, field + ".match", {"src", "dst"});
      if (present(m, "src")) l.match.src = scalar(m["src"], field + ".match.src");
      if (present(m, "dst")) l.match.dst = scalar(m["dst"], field + ".match.dst");
    }
    if (present(n, "delay")) l.delay = duration(n["delay"], field + ".delay");
    if (present(n, "jitter")) l.jitter = duration(n["jitter"], field + ".jitter");
    if (present(n, "jitter_dist")) {
      l.jitter_dist = enumerated<JitterDist>(n["jitter_dist"], field + ".jitter_dist", parse_jitter_dist);
    }
    if (present(n, "loss_prob")) l.loss_prob = number(n["loss_prob"], field + ".loss_prob");
    if (present(n, "reorder_prob")) l.reorder_prob = number(n["reorder_prob"], field + ".reorder_prob");
    if (present(n, "rate_bps")) l.rate_bps = u64(n["rate_bps"], field + ".rate_bps");
    if (present(n, "queue_limit")) {
      const auto q = u64(n["queue_limit"], field + ".queue_limit");
      if (q > UINT32_MAX) fail(n["queue_limit"], field + ".queue_limit", "too large");
      l.queue_limit = static_cast<std::uint32_t>(q);
    }
    return l;
  }

  ServiceBinding read_service(const YAML::Node& n, const std::string& field) {
    note(field, n);
    allow_keys(n, field, {"node", "service", "params"});
    ServiceBinding b;
    b.node = string_field(n, "node", field + ".node");
    if (!present(n, "service")) fail(n, field + ".service", "missing required field");
    b.service = enumerated<ServiceKind>(n["service"], field + ".service", parse_service_kind);
    const auto raw = string_map(n["params"], field + ".params");
    try {
      b.params = normalize_params(b.service, raw);
    } catch (const std::invalid_argument& e) {
      fail(present(n, "params") ? n["params"] : n, field + ".params", e.what());
    }
    return b;
  }

  LoadSpec read_load(const YAML::Node& n, const std::string& field, Duration scenario_duration) {
    note(field, n);
    allow_keys(n, field, {"client", "target", "pattern", "rate_tps", "payload_bytes", "high_fee_share",
                          "high_fee_multiplier", "start", "stop"});
    LoadSpec l;
    l.client = string_field(n, "client", field + ".client");
    l.target = string_field(n, "target", field + ".target");
    if (present(n, "pattern")) l.pattern = enumerated<LoadPattern>(n["pattern"], field + ".pattern", parse_load_pattern);
    if (!present(n, "rate_tps")) fail(n, field + ".rate_tps", "missing required field");
    l.rate_tps = number(n["rate_tps"], field + ".rate_tps");
    if (present(n, "payload_bytes")) {
      const auto b = u64(n["payload_bytes"], field + ".payload_bytes");
      if (b > UINT32_MAX) fail(n["payload_bytes"], field + ".payload_bytes", "too large");
      l.payload_bytes = static_cast<std::uint32_t>(b);
    }
    if (present(n, "high_fee_share")) l.high_fee_share = number(n["high_fee_share"], field + ".high_fee_share");
    if (present(n, "high_fee_multiplier")) {
      l.high_fee_multiplier = number(n["high_fee_multiplier"], field + ".high_fee_multiplier");
    }
    if (present(n, "start")) l.start = duration(n["start"], field + ".start");
    l.stop = present(n, "stop") ? duration(n["stop"], field + ".stop") : scenario_duration;
    return l;
  }

  FaultSpec read_fault(const YAML::Node& n, const std::string& field) {
    note(field, n);
    allow_keys(n, field, {"at", "target", "kind", "peers", "behavior", "params"});
    FaultSpec f;
    if (!present(n, "at")) fail(n, field + ".at", "missing required field");
    f.at = duration(n["at"], field + ".at");
    f.target = string_field(n, "target", field + ".target");
    if (!present(n, "kind")) fail(n, field + ".kind", "missing required field");
    f.kind = enumerated<FaultKind>(n["kind"], field + ".kind", parse_fault_kind);
    const auto peers = list(n, "peers", field + ".peers");
    for (std::size_t i = 0; i < peers.size(); ++i) f.peers.push_back(scalar(peers[i], field + ".peers." + std::to_string(i)));
    if (present(n, "behavior")) f.behavior = scalar(n["behavior"], field + ".behavior");
    f.params = string_map(n["params"], field + ".params");
    return f;
  }

  ProcessSpec read_process(const YAML::Node& n, const std::string& field) {
    note(field, n);
    allow_keys(n, field, {"output_dir", "exports", "percentiles", "window", "metadata"});
    ProcessSpec p;
    if (present(n, "output_dir")) p.output_dir = scalar(n["output_dir"], field + ".output_dir");
    if (n["exports"].IsDefined()) {
      p.exports.clear();
      const auto ex = list(n, "exports", field + ".exports");
      for (std::size_t i = 0; i < ex.size(); ++i) {
        const auto f = field + ".exports." + std::to_string(i);
        p.exports.insert(enumerated<ExportFormat>(ex[i], f, parse_export_format));
      }
    }
    if (n["percentiles"].IsDefined()) {
      p.percentiles.clear();
      const auto ps = list(n, "percentiles", field + ".percentiles");
      for (std::size_t i = 0; i < ps.size(); ++i) p.percentiles.push_back(number(ps[i], field + ".percentiles." + std::to_string(i)));
    }
    if (present(n, "window")) p.window = duration(n["window"], field + ".window");
    p.metadata = string_map(n["metadata"], field + ".metadata");
    return p;
  }

  std::string source_;
  std::map<std::string, YAML::Mark> marks_;
  YAML::Mark root_mark_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Campaign parse_campaign(std::string_view text, const std::string& source) { return Parser(source).parse(text); }

ScenarioSpec parse_scenario(std::string_view text, const std::string& source) {
  auto c = parse_campaign(text, source);
  if (!c.sweeps.empty()) throw ConfigError(source, 0, 0, "sweeps", "document is a campaign; expand it first");
  return std::move(c.base);
}

ScenarioSpec load_scenario_file(const std::string& path) { return parse_scenario(read_file(path), path); }
Campaign load_campaign_file(const std::string& path) { return parse_campaign(read_file(path), path); }

}  // namespace desklab::config
