#include "desklab/cli/cli.hpp"

#include <filesystem>
#include <fstream>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "desklab/common/format.hpp"
#include "desklab/config/scenario.hpp"
#include "desklab/harness/experiment.hpp"
#include "desklab/metrics/metrics.hpp"
#include "desklab/sut/factory.hpp"

namespace desklab::cli {
namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kInvalid = 2;

struct Loaded {
  std::vector<config::ScenarioSpec> specs;
  int status = kOk;
};

Loaded load(const std::string& path, std::ostream& err) {
  Loaded l;
  if (!fs::exists(path)) {
    err << "error: " << path << ": no such file\n";
    l.status = kFailure;
    return l;
  }
  try {
    l.specs = config::expand_campaign(config::load_campaign_file(path));
  } catch (const config::ConfigError& e) {
    err << e.what() << "\n";
    l.status = kInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    l.status = kFailure;
  }
  return l;
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  const auto l = load(path, err);
  if (l.status != kOk) return l.status;
  out << "OK " << path << " (" << l.specs.size() << " scenario" << (l.specs.size() == 1 ? "" : "s") << ")\n";
  return kOk;
}

struct RunArgs {
  std::string path;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string filter;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  auto l = load(a.path, err);
  if (l.status != kOk) return l.status;
  harness::CampaignOptions opts;
  if (!a.out.empty()) opts.run.output_root = a.out;
  opts.seed = a.seed;
  opts.jobs = std::max(1u, a.jobs);
  opts.filter = a.filter;
  const auto outcomes = harness::run_campaign(std::move(l.specs), sut::builtin_factory(), opts);
  if (outcomes.empty()) {
    err << "error: no scenario matches filter '" << a.filter << "'\n";
    return kFailure;
  }

  std::size_t width = 8;
  for (const auto& o : outcomes) width = std::max(width, o.scenario.size());
  out << std::left << std::setw(static_cast<int>(width)) << "scenario" << "  rep  status  " << std::right << std::setw(10)
      << "events" << std::setw(10) << "sent" << std::setw(10) << "delivered" << std::setw(10) << "dropped" << std::setw(10)
      << "wall_ms" << "\n";
  int failed = 0;
  for (const auto& o : outcomes) {
    out << std::left << std::setw(static_cast<int>(width)) << o.scenario << "  " << std::setw(3) << o.rep << "  "
        << std::setw(6) << (o.ok ? "ok" : "FAILED") << std::right;
    if (o.ok) {
      out << "  " << std::setw(10) << o.stats.events << std::setw(10) << o.stats.sent << std::setw(10) << o.stats.delivered
          << std::setw(10) << o.stats.dropped << std::setw(10) << std::fixed << std::setprecision(1) << o.wall_time_ms;
    }
    out << "\n";
    if (!o.ok) {
      ++failed;
      err << o.scenario << "/" << o.rep << ": " << o.error << "\n";
    }
  }
  out << outcomes.size() - static_cast<std::size_t>(failed) << "/" << outcomes.size() << " runs completed\n";
  return failed == 0 ? kOk : kFailure;
}

struct RunDir {
  fs::path dir;
  nlohmann::json meta;
};

std::vector<RunDir> find_runs(const fs::path& root) {
  std::vector<RunDir> runs;
  if (!fs::is_directory(root)) return runs;
  std::vector<fs::path> metas;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().filename() == "meta.json") metas.push_back(e.path());
  }
  std::sort(metas.begin(), metas.end());
  for (const auto& m : metas) {
    std::ifstream in(m);
    runs.push_back({m.parent_path(), nlohmann::json::parse(in)});
  }
  return runs;
}

std::vector<double> percentiles_for(const fs::path& run_dir) {
  const auto spec_file = run_dir.parent_path() / "spec.yaml";
  if (fs::exists(spec_file)) {
    try {
      return config::load_scenario_file(spec_file.string()).process.percentiles;
    } catch (const std::exception&) {
    }
  }
  return {50, 90, 99};
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

/// Integral values print without exponent; everything else shortest round-trip.
std::string number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) return std::to_string(static_cast<std::int64_t>(v));
  return format_double(v);
}

/// Orders sweep values numerically where they parse as durations or numbers.
bool key_less(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const auto rank = [](const std::string& s) -> std::optional<double> {
    try {
      return static_cast<double>(config::parse_duration(s).count());
    } catch (const std::exception&) {
    }
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (!s.empty() && end == s.c_str() + s.size()) return v;
    return std::nullopt;
  };
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a[i] == b[i]) continue;
    const auto x = rank(a[i]);
    const auto y = rank(b[i]);
    if (x && y && *x != *y) return *x < *y;
    if (x.has_value() != y.has_value()) return x.has_value();
    return a[i] < b[i];
  }
  return a.size() < b.size();
}

struct KeyLess {
  bool operator()(const std::vector<std::string>& a, const std::vector<std::string>& b) const { return key_less(a, b); }
};

struct Group {
  std::vector<std::string> key;
  std::size_t runs = 0;
  std::vector<double> values;
  std::vector<double> percentiles;
};

int cmd_report(const std::string& dir, const std::string& metric, const std::string& format, const std::string& output,
               std::ostream& out, std::ostream& err) {
  const auto runs = find_runs(dir);
  if (runs.empty()) {
    err << "error: no results found under " << dir << "\n";
    return kFailure;
  }

  // sweep metadata keys become the grouping columns
  std::set<std::string> sweep_keys;
  for (const auto& r : runs) {
    for (const auto& [k, v] : r.meta["metadata"].items()) {
      if (k.rfind("sweep.", 0) == 0) sweep_keys.insert(k);
    }
  }
  std::vector<std::string> columns(sweep_keys.begin(), sweep_keys.end());
  const bool by_scenario = columns.empty();

  std::map<std::vector<std::string>, Group, KeyLess> groups;
  std::set<std::string> available;
  for (const auto& r : runs) {
    std::vector<std::string> key;
    if (by_scenario) {
      key.push_back(r.meta["scenario"].get<std::string>());
    } else {
      for (const auto& c : columns) key.push_back(r.meta["metadata"].value(c, std::string("-")));
    }
    auto& g = groups[key];
    g.key = key;
    ++g.runs;
    if (g.percentiles.empty()) g.percentiles = percentiles_for(r.dir);
    for (const auto& rec : metrics::load_run(r.dir)) {
      available.insert(rec.name);
      if (rec.name == metric) g.values.push_back(rec.as_double());
    }
  }
  if (!available.contains(metric)) {
    err << "error: unknown metric '" << metric << "'; available:";
    for (const auto& n : available) err << " " << n;
    err << "\n";
    return kFailure;
  }

  std::ofstream file;
  if (!output.empty()) {
    file.open(output, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "error: cannot write " << output << "\n";
      return kFailure;
    }
  }
  std::ostream& o = output.empty() ? out : file;

  std::vector<std::string> key_names;
  if (by_scenario) {
    key_names.push_back("scenario");
  } else {
    for (const auto& c : columns) key_names.push_back(c.substr(c.rfind('.') + 1));
  }

  if (format == "ecdf") {
    for (const auto& [key, g] : groups) {
      o << "#";
      for (std::size_t i = 0; i < key.size(); ++i) o << " " << key_names[i] << "=" << key[i];
      o << "\n";
      auto sorted = g.values;
      std::sort(sorted.begin(), sorted.end());
      for (const auto& [v, f] : metrics::ecdf(sorted)) o << number(v) << " " << format_double(f) << "\n";
    }
    return kOk;
  }

  std::vector<std::string> header = key_names;
  for (const char* h : {"runs", "count", "mean", "min"}) header.emplace_back(h);
  const auto& pcts = groups.begin()->second.percentiles;
  for (double p : pcts) header.push_back(harness::percentile_key(p));
  header.emplace_back("max");

  std::vector<std::vector<std::string>> rows;
  for (const auto& [key, g] : groups) {
    const auto s = metrics::summarize(g.values, pcts);
    std::vector<std::string> row = key;
    row.push_back(std::to_string(g.runs));
    row.push_back(std::to_string(s.count));
    const auto num = [&](double v) { return s.count == 0 ? std::string("-") : number(v); };
    row.push_back(num(s.mean));
    row.push_back(num(s.min));
    for (std::size_t i = 0; i < pcts.size(); ++i) row.push_back(s.count == 0 ? "-" : number(s.percentiles.at(i).second));
    row.push_back(num(s.max));
    rows.push_back(std::move(row));
  }

  if (format == "csv") {
    for (std::size_t i = 0; i < header.size(); ++i) o << (i ? "," : "") << csv_cell(header[i]);
    o << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) o << (i ? "," : "") << csv_cell(row[i]);
      o << "\n";
    }
    return kOk;
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) o << "  ";
      if (i < key_names.size()) {
        o << std::left << std::setw(static_cast<int>(width[i])) << cells[i];
      } else {
        o << std::right << std::setw(static_cast<int>(width[i])) << cells[i];
      }
    }
    o << "\n";
  };
  o << "metric: " << metric << "\n";
  line(header);
  for (const auto& row : rows) line(row);
  return kOk;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"desklab: deterministic desk-scale experiments for distributed protocols", "desklab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(harness::kVersion));

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a scenario or campaign file");
  validate->add_option("path", validate_path, "Scenario or campaign YAML/JSON")->required();

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run every scenario and repetition of a campaign");
  run->add_option("path", run_args.path, "Scenario or campaign YAML/JSON")->required();
  run->add_option("--out", run_args.out, "Results root (default: process.output_dir of each scenario)");
  run->add_option("--seed", run_args.seed, "Override the seed of every scenario");
  run->add_option("--jobs", run_args.jobs, "Runs executed in parallel")->check(CLI::PositiveNumber);
  run->add_option("--filter", run_args.filter, "Only scenarios whose name contains this text");

  std::string report_dir;
  std::string report_metric;
  std::string report_format = "table";
  std::string report_output;
  auto* report = app.add_subcommand("report", "Summarize one metric across runs");
  report->add_option("results_dir", report_dir, "Results directory")->required();
  report->add_option("--metric", report_metric, "Metric name, e.g. frost.e2e_ns")->required();
  report->add_option("--format", report_format, "table, csv or ecdf")
      ->check(CLI::IsMember({"table", "csv", "ecdf"}));
  report->add_option("--output", report_output, "Write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*validate) return cmd_validate(validate_path, out, err);
    if (*run) return cmd_run(run_args, out, err);
    return cmd_report(report_dir, report_metric, report_format, report_output, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace desklab::cli
