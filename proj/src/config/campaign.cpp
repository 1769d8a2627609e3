#include <yaml-cpp/yaml.h>

#include "desklab/config/scenario.hpp"

namespace desklab::config {
namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    out.push_back(path.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return out;
}

bool is_index(const std::string& s) {
  return !s.empty() && s.size() < 10 && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

/// Replaces the node at `path` with `value`; throws if any step is missing.
void assign_path(YAML::Node root, const std::string& path, const std::string& value, const std::string& source) {
  const auto parts = split_path(path);
  YAML::Node cur = root;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& key = parts[i];
    const bool last = i + 1 == parts.size();
    const auto unresolved = [&] { return ConfigError(source, 0, 0, path, "sweep path does not resolve at '" + key + "'"); };
    if (cur.IsSequence()) {
      if (!is_index(key)) throw unresolved();
      const auto idx = std::stoul(key);
      if (idx >= cur.size()) throw unresolved();
      if (last) {
        cur[idx] = YAML::Load(value);
        return;
      }
      cur.reset(cur[idx]);
    } else if (cur.IsMap()) {
      if (!cur[key].IsDefined()) throw unresolved();
      if (last) {
        cur[key] = YAML::Load(value);
        return;
      }
      YAML::Node next = cur[key];
      cur.reset(next);
    } else {
      throw unresolved();
    }
  }
}

std::string label_text(const std::string& value) {
  std::string out;
  for (char c : value) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
    out += ok ? c : '_';
  }
  return out;
}

}  // namespace

std::vector<ScenarioSpec> expand_campaign(const Campaign& campaign) {
  const auto& base = campaign.base;
  validate(base, base.name);
  if (campaign.sweeps.empty()) return {base};

  const std::string base_text = serialize(base);
  // Short labels use the last path segment unless two sweeps share it.
  std::vector<std::string> labels;
  for (const auto& sw : campaign.sweeps) {
    const auto parts = split_path(sw.path);
    labels.push_back(parts.back());
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (i != j && split_path(campaign.sweeps[i].path).back() == split_path(campaign.sweeps[j].path).back()) {
        labels[i] = label_text(campaign.sweeps[i].path);
      }
    }
  }

  std::vector<ScenarioSpec> out;
  std::vector<std::size_t> pick(campaign.sweeps.size(), 0);
  while (true) {
    YAML::Node tree = YAML::Load(base_text);
    std::string suffix;
    std::string where;
    for (std::size_t k = 0; k < pick.size(); ++k) {
      const auto& sw = campaign.sweeps[k];
      const auto& value = sw.values[pick[k]];
      assign_path(tree, sw.path, value, base.name);
      suffix += "__" + labels[k] + "-" + label_text(value);
      where += (where.empty() ? "" : ", ") + sw.path + "=" + value;
    }
    YAML::Emitter e;
    e << tree;
    const std::string source = base.name + " [" + where + "]";
    ScenarioSpec spec = parse_scenario(e.c_str(), source);
    spec.name = base.name + suffix;
    for (std::size_t k = 0; k < pick.size(); ++k) {
      spec.process.metadata["sweep." + campaign.sweeps[k].path] = campaign.sweeps[k].values[pick[k]];
    }
    validate(spec, source);
    out.push_back(std::move(spec));

    std::size_t k = pick.size();
    while (k > 0) {
      --k;
      if (++pick[k] < campaign.sweeps[k].values.size()) break;
      pick[k] = 0;
      if (k == 0) return out;
    }
  }
}

}  // namespace desklab::config
