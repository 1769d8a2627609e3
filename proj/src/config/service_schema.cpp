#include "desklab/config/service_schema.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace desklab::config {
namespace {

using enum ParamType;

const std::vector<ServiceSchema>& registry() {
  static const std::vector<ServiceSchema> schemas{
      {ServiceKind::frost_coordinator,
       {
           {"n", uint, true, "", {}},
           {"t", uint, true, "", {}},
           {"rounds", choice, false, "2", {"2", "3"}},
           {"group", choice, false, "ristretto255", {"toy", "ristretto255"}},
           {"timeout", duration, false, "0", {}},
           {"context", string, false, "desklab-frost", {}},
           {"nonces", uint, false, "16", {}},
       },
       {}},
      {ServiceKind::frost_signer, {}, {"bad-partial-sig", "withhold-partial"}},
      {ServiceKind::frost_client, {{"timeout", duration, false, "0", {}}}, {}},
      {ServiceKind::pbs_client,
       {
           {"timeout", duration, false, "0", {}},
           {"tx_gas", uint, false, "21000", {}},
           {"tx_gas_max", uint, false, "0", {}},
           {"base_fee", uint, false, "10", {}},
           {"fee_spread", number, false, "1", {}},
       },
       {}},
      {ServiceKind::pbs_builder,
       {
           {"gas_limit", uint, false, "30000000", {}},
           {"slot_length", duration, false, "12000000000", {}},
           {"rebuild_interval", duration, false, "1000000000", {}},
           {"policy", choice, false, "greedy", {"greedy", "fifo"}},
           {"blackout_start", duration, false, "0", {}},
           {"blackout_end", duration, false, "0", {}},
       },
       {}},
      {ServiceKind::pbs_relay, {{"slot_length", duration, false, "12000000000", {}}}, {}},
      {ServiceKind::chain_relay,
       {
           {"capacity", number, false, "0", {}},
           {"queue_limit", uint, false, "0", {}},
           {"sample_interval", duration, false, "100000000", {}},
       },
       {}},
      {ServiceKind::chain_participation,
       {
           {"block_interval", duration, false, "1000000000", {}},
           {"block_capacity", uint, false, "5000", {}},
           {"beta", number, false, "0.05", {}},
       },
       {}},
      {ServiceKind::chain_nonparticipation, {{"ack_timeout", duration, false, "0", {}}}, {}},
      {ServiceKind::chain_client, {}, {}},
  };
  return schemas;
}

std::uint64_t parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

double parse_number(std::string_view s) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v) || v < 0) {
    throw std::invalid_argument("expected a non-negative number, got '" + std::string(s) + "'");
  }
  return v;
}

std::string normalize(const ParamSchema& p, const std::string& text) {
  switch (p.type) {
    case uint:
      return std::to_string(parse_uint(text));
    case number: {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, parse_number(text));
      return std::string(buf, res.ptr);
    }
    case duration:
      return std::to_string(parse_duration(text).count());
    case string:
      return text;
    case choice:
      if (std::find(p.choices.begin(), p.choices.end(), text) == p.choices.end()) {
        std::string allowed;
        for (auto c : p.choices) allowed += (allowed.empty() ? "" : ", ") + std::string(c);
        throw std::invalid_argument("'" + text + "' is not one of: " + allowed);
      }
      return text;
  }
  return text;
}

}  // namespace

const ServiceSchema& schema_for(ServiceKind kind) {
  for (const auto& s : registry()) {
    if (s.kind == kind) return s;
  }
  throw std::logic_error("no schema for service");
}

Params normalize_params(ServiceKind kind, const Params& raw) {
  const auto& schema = schema_for(kind);
  Params out;
  for (const auto& [name, value] : raw) {
    const auto it = std::find_if(schema.params.begin(), schema.params.end(), [&](const auto& p) { return p.name == name; });
    if (it == schema.params.end()) {
      throw std::invalid_argument("unknown parameter '" + name + "' for service " + std::string(to_string(kind)));
    }
    try {
      out[name] = normalize(*it, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("parameter '" + name + "': " + e.what());
    }
  }
  for (const auto& p : schema.params) {
    if (out.contains(std::string(p.name))) continue;
    if (p.required) {
      throw std::invalid_argument("missing required parameter '" + std::string(p.name) + "' for service " +
                                  std::string(to_string(kind)));
    }
    out[std::string(p.name)] = std::string(p.default_value);
  }
  return out;
}

const std::string& ParamView::raw(std::string_view name) const {
  const auto it = p_->find(std::string(name));
  if (it == p_->end()) throw std::out_of_range("parameter '" + std::string(name) + "' not set");
  return it->second;
}

std::uint64_t ParamView::uint(std::string_view name) const { return parse_uint(raw(name)); }
double ParamView::number(std::string_view name) const { return parse_number(raw(name)); }
Duration ParamView::duration(std::string_view name) const { return parse_duration(raw(name)); }
const std::string& ParamView::string(std::string_view name) const { return raw(name); }

}  // namespace desklab::config
