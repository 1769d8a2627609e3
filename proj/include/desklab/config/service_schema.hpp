#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "desklab/common/time.hpp"
#include "desklab/config/scenario.hpp"

namespace desklab::config {

enum class ParamType { uint, number, duration, string, choice };

struct ParamSchema {
  std::string_view name;
  ParamType type;
  bool required = false;
  std::string_view default_value;      // normalized text; empty when required
  std::vector<std::string_view> choices;  // ParamType::choice only
};

struct ServiceSchema {
  ServiceKind kind;
  std::vector<ParamSchema> params;
  std::vector<std::string_view> byzantine_tags;
};

const ServiceSchema& schema_for(ServiceKind kind);

/// Validates and normalizes `raw` against the schema: unknown names and
/// ill-typed values throw std::invalid_argument naming the parameter;
/// defaults are filled in.
Params normalize_params(ServiceKind kind, const Params& raw);

/// Typed reads of normalized parameters.
class ParamView {
 public:
  explicit ParamView(const Params& p) : p_(&p) {}

  std::uint64_t uint(std::string_view name) const;
  double number(std::string_view name) const;
  Duration duration(std::string_view name) const;
  const std::string& string(std::string_view name) const;

 private:
  const std::string& raw(std::string_view name) const;
  const Params* p_;
};

}  // namespace desklab::config
