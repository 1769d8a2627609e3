#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "desklab/common/time.hpp"

namespace desklab::config {

inline constexpr std::string_view kWildcard = "*";

enum class Role { coordinator, signer, client, builder, relay, participation, non_participation, generic };

enum class ServiceKind {
  frost_coordinator,
  frost_signer,
  frost_client,
  pbs_client,
  pbs_builder,
  pbs_relay,
  chain_relay,
  chain_participation,
  chain_nonparticipation,
  chain_client,
};

enum class JitterDist { none, uniform };
enum class FaultKind { crash, restore, partition, byzantine };
enum class LoadPattern { constant, poisson };
enum class ExportFormat { csv, jsonl };

std::string_view to_string(Role r);
std::string_view to_string(ServiceKind s);
std::string_view to_string(JitterDist d);
std::string_view to_string(FaultKind k);
std::string_view to_string(LoadPattern p);
std::string_view to_string(ExportFormat f);

std::optional<Role> parse_role(std::string_view s);
std::optional<ServiceKind> parse_service_kind(std::string_view s);
std::optional<JitterDist> parse_jitter_dist(std::string_view s);
std::optional<FaultKind> parse_fault_kind(std::string_view s);
std::optional<LoadPattern> parse_load_pattern(std::string_view s);
std::optional<ExportFormat> parse_export_format(std::string_view s);

struct NodeSpec {
  std::string id;
  Role role = Role::generic;
  /// Work units per virtual second; 0 means compute is free.
  double compute_capacity = 0;
  std::map<std::string, double> costs;

  friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

struct FlowRule {
  std::string src{kWildcard};
  std::string dst{kWildcard};

  friend bool operator==(const FlowRule&, const FlowRule&) = default;
};

struct LinkSpec {
  FlowRule match;
  Duration delay{0};
  Duration jitter{0};
  JitterDist jitter_dist = JitterDist::uniform;
  double loss_prob = 0;
  double reorder_prob = 0;
  std::uint64_t rate_bps = 0;    // 0 = unlimited
  std::uint32_t queue_limit = 0;  // 0 = unlimited

  friend bool operator==(const LinkSpec&, const LinkSpec&) = default;
};

/// Parameters are kept as normalized scalar text; typed access goes through
/// the service schema (see service_schema.hpp).
using Params = std::map<std::string, std::string>;

struct ServiceBinding {
  std::string node;
  ServiceKind service = ServiceKind::frost_signer;
  Params params;

  friend bool operator==(const ServiceBinding&, const ServiceBinding&) = default;
};

struct LoadSpec {
  std::string client;
  std::string target;
  LoadPattern pattern = LoadPattern::constant;
  double rate_tps = 0;
  std::uint32_t payload_bytes = 32;
  double high_fee_share = 0;
  double high_fee_multiplier = 5;
  Duration start{0};
  Duration stop{0};  // filled with the scenario duration when omitted

  friend bool operator==(const LoadSpec&, const LoadSpec&) = default;
};

struct FaultSpec {
  Duration at{0};
  std::string target;
  FaultKind kind = FaultKind::crash;
  std::vector<std::string> peers;  // partition only
  std::string behavior;             // byzantine only
  std::map<std::string, std::string> params;

  friend bool operator==(const FaultSpec&, const FaultSpec&) = default;
};

struct ProcessSpec {
  std::string output_dir = "results";
  std::set<ExportFormat> exports{ExportFormat::csv};
  std::vector<double> percentiles{50, 90, 99};
  Duration window{kNanosPerSecond};
  std::map<std::string, std::string> metadata;

  friend bool operator==(const ProcessSpec&, const ProcessSpec&) = default;
};

struct ScenarioSpec {
  std::string name;
  std::uint64_t seed = 1;
  std::uint32_t repetitions = 1;
  Duration duration{0};
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  std::vector<ServiceBinding> services;
  std::vector<LoadSpec> loads;
  std::vector<FaultSpec> faults;
  ProcessSpec process;

  const NodeSpec* find_node(std::string_view id) const;
  const ServiceBinding* service_on(std::string_view node) const;
  /// Services of one kind in declaration order.
  std::vector<const ServiceBinding*> services_of(ServiceKind kind) const;

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// One swept parameter: a dotted path into the scenario document (list
/// elements by index, e.g. services.0.params.n) and the values it takes.
/// Values are YAML scalar or flow text.
struct Sweep {
  std::string path;
  std::vector<std::string> values;

  friend bool operator==(const Sweep&, const Sweep&) = default;
};

struct Campaign {
  ScenarioSpec base;
  std::vector<Sweep> sweeps;
};

/// Parse or validation failure. line/column are 1-based; 0 when the error is
/// not tied to a position (for example a cross-reference found after parsing).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, int line, int column, std::string field, std::string message);

  const std::string& source() const { return source_; }
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& field() const { return field_; }
  const std::string& message() const { return message_; }

 private:
  std::string source_;
  int line_;
  int column_;
  std::string field_;
  std::string message_;
};

/// Parses a single scenario. A document containing sweeps is rejected; use
/// parse_campaign for those.
ScenarioSpec parse_scenario(std::string_view text, const std::string& source = "<input>");
Campaign parse_campaign(std::string_view text, const std::string& source = "<input>");
ScenarioSpec load_scenario_file(const std::string& path);
Campaign load_campaign_file(const std::string& path);

/// Canonical YAML. parse_scenario(serialize(s)) == s for every valid s.
std::string serialize(const ScenarioSpec& spec);
std::string serialize(const Campaign& campaign);

/// Checks every invariant that parse enforces; throws ConfigError naming the
/// offending field.
void validate(const ScenarioSpec& spec, const std::string& source = "<input>");

/// Cartesian product of the sweeps applied to the base, each result
/// re-validated. Names get a deterministic suffix per swept value and the
/// values are recorded in process.metadata under "sweep.<path>".
std::vector<ScenarioSpec> expand_campaign(const Campaign& campaign);

/// Duration text: an integer (nanoseconds) or a decimal with unit ns, us, ms,
/// s or m. Throws std::invalid_argument on anything else.
Duration parse_duration(std::string_view text);

/// SHA-256 of the canonical serialization, hex encoded.
std::string spec_hash(const ScenarioSpec& spec);

}  // namespace desklab::config
