#include "desklab/config/scenario.hpp"

#include <array>
#include <cctype>
#include <utility>

#include "desklab/common/bytes.hpp"
#include "desklab/common/sha256.hpp"

namespace desklab::config {
namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s) {
  for (const auto& [e, name] : table) {
    if (name == s) return e;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
  for (const auto& [v, name] : table) {
    if (v == e) return name;
  }
  return "?";
}

constexpr std::array<std::pair<Role, std::string_view>, 8> kRoles{{
    {Role::coordinator, "coordinator"},
    {Role::signer, "signer"},
    {Role::client, "client"},
    {Role::builder, "builder"},
    {Role::relay, "relay"},
    {Role::participation, "participation"},
    {Role::non_participation, "non-participation"},
    {Role::generic, "generic"},
}};

constexpr std::array<std::pair<ServiceKind, std::string_view>, 10> kServices{{
    {ServiceKind::frost_coordinator, "frost-coordinator"},
    {ServiceKind::frost_signer, "frost-signer"},
    {ServiceKind::frost_client, "frost-client"},
    {ServiceKind::pbs_client, "pbs-client"},
    {ServiceKind::pbs_builder, "pbs-builder"},
    {ServiceKind::pbs_relay, "pbs-relay"},
    {ServiceKind::chain_relay, "chain-relay"},
    {ServiceKind::chain_participation, "chain-participation"},
    {ServiceKind::chain_nonparticipation, "chain-nonparticipation"},
    {ServiceKind::chain_client, "chain-client"},
}};

constexpr std::array<std::pair<JitterDist, std::string_view>, 2> kJitter{{
    {JitterDist::none, "none"},
    {JitterDist::uniform, "uniform"},
}};

constexpr std::array<std::pair<FaultKind, std::string_view>, 4> kFaults{{
    {FaultKind::crash, "crash"},
    {FaultKind::restore, "restore"},
    {FaultKind::partition, "partition"},
    {FaultKind::byzantine, "byzantine"},
}};

constexpr std::array<std::pair<LoadPattern, std::string_view>, 2> kPatterns{{
    {LoadPattern::constant, "constant"},
    {LoadPattern::poisson, "poisson"},
}};

constexpr std::array<std::pair<ExportFormat, std::string_view>, 2> kExports{{
    {ExportFormat::csv, "csv"},
    {ExportFormat::jsonl, "jsonl"},
}};

std::string format_error(const std::string& source, int line, int column, const std::string& field,
                         const std::string& message) {
  std::string out = source;
  if (line > 0) out += ":" + std::to_string(line) + ":" + std::to_string(column);
  out += ": ";
  if (!field.empty()) out += field + ": ";
  return out + message;
}

}  // namespace

std::string_view to_string(Role r) { return name_of(kRoles, r); }
std::string_view to_string(ServiceKind s) { return name_of(kServices, s); }
std::string_view to_string(JitterDist d) { return name_of(kJitter, d); }
std::string_view to_string(FaultKind k) { return name_of(kFaults, k); }
std::string_view to_string(LoadPattern p) { return name_of(kPatterns, p); }
std::string_view to_string(ExportFormat f) { return name_of(kExports, f); }

std::optional<Role> parse_role(std::string_view s) { return lookup(kRoles, s); }
std::optional<ServiceKind> parse_service_kind(std::string_view s) { return lookup(kServices, s); }
std::optional<JitterDist> parse_jitter_dist(std::string_view s) { return lookup(kJitter, s); }
std::optional<FaultKind> parse_fault_kind(std::string_view s) { return lookup(kFaults, s); }
std::optional<LoadPattern> parse_load_pattern(std::string_view s) { return lookup(kPatterns, s); }
std::optional<ExportFormat> parse_export_format(std::string_view s) { return lookup(kExports, s); }

ConfigError::ConfigError(std::string source, int line, int column, std::string field, std::string message)
    : std::runtime_error(format_error(source, line, column, field, message)),
      source_(std::move(source)),
      line_(line),
      column_(column),
      field_(std::move(field)),
      message_(std::move(message)) {}

const NodeSpec* ScenarioSpec::find_node(std::string_view id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const ServiceBinding* ScenarioSpec::service_on(std::string_view node) const {
  for (const auto& s : services) {
    if (s.node == node) return &s;
  }
  return nullptr;
}

std::vector<const ServiceBinding*> ScenarioSpec::services_of(ServiceKind kind) const {
  std::vector<const ServiceBinding*> out;
  for (const auto& s : services) {
    if (s.service == kind) out.push_back(&s);
  }
  return out;
}

Duration parse_duration(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  std::size_t end = text.size();
  while (end > i && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  const std::string_view s = text.substr(i, end - i);
  const auto bad = [&] { return std::invalid_argument("invalid duration '" + std::string(text) + "'"); };

  std::size_t p = 0;
  std::uint64_t whole = 0;
  std::size_t digits = 0;
  for (; p < s.size() && std::isdigit(static_cast<unsigned char>(s[p])); ++p, ++digits) {
    if (whole > (UINT64_MAX - 9) / 10) throw bad();
    whole = whole * 10 + static_cast<std::uint64_t>(s[p] - '0');
  }
  if (digits == 0) throw bad();
  std::string frac;
  if (p < s.size() && s[p] == '.') {
    for (++p; p < s.size() && std::isdigit(static_cast<unsigned char>(s[p])); ++p) frac += s[p];
    if (frac.empty()) throw bad();
  }
  while (p < s.size() && s[p] == ' ') ++p;
  const std::string_view unit = s.substr(p);

  std::uint64_t scale = 0;
  if (unit.empty()) {
    if (!frac.empty()) throw bad();  // bare numbers are whole nanoseconds
    scale = 1;
  } else if (unit == "ns") {
    scale = 1;
  } else if (unit == "us") {
    scale = 1'000;
  } else if (unit == "ms") {
    scale = 1'000'000;
  } else if (unit == "s") {
    scale = 1'000'000'000;
  } else if (unit == "m") {
    scale = 60'000'000'000;
  } else {
    throw bad();
  }
  if (whole > static_cast<std::uint64_t>(INT64_MAX) / scale) throw bad();
  std::uint64_t ns = whole * scale;
  // Fractional part must land on a whole nanosecond.
  std::uint64_t unit_left = scale;
  for (char c : frac) {
    if (unit_left % 10 != 0) {
      if (c != '0') throw bad();
      continue;
    }
    unit_left /= 10;
    ns += static_cast<std::uint64_t>(c - '0') * unit_left;
  }
  if (ns > static_cast<std::uint64_t>(INT64_MAX)) throw bad();
  return Duration(static_cast<std::int64_t>(ns));
}

std::string spec_hash(const ScenarioSpec& spec) {
  return to_hex(sha256(serialize(spec)));
}

}  // namespace desklab::config
