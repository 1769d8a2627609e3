#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "desklab/config/scenario.hpp"
#include "desklab/harness/service.hpp"
#include "desklab/metrics/metrics.hpp"
#include "desklab/net/simulator.hpp"

namespace desklab::harness {

inline constexpr const char* kVersion = "0.1.0";

class SetupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  /// Replaces ScenarioSpec::process.output_dir when set.
  std::optional<std::filesystem::path> output_root;
  bool write_files = true;
  /// Virtual time allowed for every service to report ready.
  Duration setup_limit{std::chrono::seconds(600)};
  std::uint64_t max_events = 100'000'000;
  std::ostream* event_log = nullptr;
};

struct RepResult {
  std::string scenario;
  std::uint32_t rep = 0;
  std::vector<metrics::MetricRecord> records;
  net::RunStats stats;
  SimTime scenario_start{0};
  SimTime end{0};
  double wall_time_ms = 0;
  std::filesystem::path dir;  // empty when nothing was written
};

/// Phases: setup (services start at t=0 and run over the emulated network
/// until all report ready), scenario (faults and loads offset from the ready
/// time, run for the spec's duration), process (finish hooks, flow counters,
/// flush, export). Repetitions differ only in their RNG label ["rep", k].
RepResult run_repetition(const config::ScenarioSpec& spec, std::uint32_t rep, const ServiceFactory& factory,
                         const RunOptions& options = {});

/// Every repetition of one scenario, in order.
std::vector<RepResult> run_experiment(const config::ScenarioSpec& spec, const ServiceFactory& factory,
                                      const RunOptions& options = {});

std::filesystem::path scenario_dir(const config::ScenarioSpec& spec, const RunOptions& options);

/// Summary key for a percentile: 50 -> "p50", 99.9 -> "p99.9".
std::string percentile_key(double p);

/// meta.json text for a finished repetition (deterministic except wall_time_ms).
std::string meta_json(const config::ScenarioSpec& spec, const RepResult& result);

struct CampaignOptions {
  RunOptions run;
  std::optional<std::uint64_t> seed;  // overrides every scenario's seed
  unsigned jobs = 1;
  std::string filter;  // substring of the expanded scenario name
};

struct RunOutcome {
  std::string scenario;
  std::uint32_t rep = 0;
  bool ok = false;
  std::string error;
  net::RunStats stats;
  double wall_time_ms = 0;
  std::filesystem::path dir;
};

/// Runs every (scenario, repetition) pair, up to `jobs` at once. A failing
/// run is reported in its outcome and does not affect the others. Outcomes
/// are in scenario order, then repetition order.
std::vector<RunOutcome> run_campaign(std::vector<config::ScenarioSpec> specs, const ServiceFactory& factory,
                                     const CampaignOptions& options);

}  // namespace desklab::harness
