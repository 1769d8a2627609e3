#include "desklab/harness/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"
#include "desklab/common/format.hpp"
#include "desklab/harness/load.hpp"

namespace desklab::harness {
namespace {

class Engine;

/// Per-node runtime and the SutContext handed to its service.
class NodeContext final : public SutContext {
 public:
  NodeContext(Engine& engine, net::NodeId id, const config::NodeSpec& spec, Rng rng)
      : engine_(engine), id_(id), spec_(spec), rng_(std::move(rng)) {}

  SimTime now() const override;
  const std::string& self() const override { return spec_.id; }
  const config::ScenarioSpec& scenario() const override;
  std::optional<SimTime> scenario_start() const override;
  Duration max_link_delay() const override;
  void send(const std::string& dst, Bytes payload, std::optional<std::uint32_t> size_bytes) override;
  TimerId set_timer(SimTime at, std::uint64_t tag) override;
  void cancel_timer(TimerId id) override;
  void emit(std::string name, metrics::Value value, metrics::Labels labels) override;
  Rng& rng() override { return rng_; }
  void charge(std::string_view op, double count) override;
  bool byzantine(std::string_view tag) const override { return byzantine_.contains(std::string(tag)); }
  void report_ready() override { ready_ = true; }

  bool ready() const { return ready_; }
  void add_byzantine(const std::string& tag) { byzantine_.insert(tag); }

  /// Runs `fn` as one handler invocation on this node's serial CPU.
  template <typename F>
  void invoke(F&& fn);

  std::unique_ptr<Service> service;

 private:
  Engine& engine_;
  net::NodeId id_;
  const config::NodeSpec& spec_;
  Rng rng_;
  std::set<std::string> byzantine_;
  bool ready_ = false;
  bool active_ = false;
  SimTime local_{0};
  SimTime cpu_free_{0};
};

class Engine {
 public:
  Engine(const config::ScenarioSpec& spec, std::uint32_t rep, const ServiceFactory& factory, const RunOptions& options)
      : spec_(spec),
        streams_(spec.seed, {"rep", std::to_string(rep)}),
        sim_(node_names(spec), spec.links, streams_, &store_, net::Simulator::Options{options.max_events, options.event_log}),
        options_(options) {
    for (net::NodeId i = 0; i < spec.nodes.size(); ++i) {
      nodes_.push_back(std::make_unique<NodeContext>(*this, i, spec.nodes[i], streams_.stream({"node", spec.nodes[i].id})));
    }
    for (const auto& b : spec.services) {
      auto& node = *nodes_.at(*sim_.find(b.node));
      node.service = factory(b, spec);
      if (!node.service) throw std::invalid_argument("no implementation for service " + std::string(config::to_string(b.service)));
      with_service_.push_back(&node);
    }
    sim_.on_delivery([this](const net::Envelope& env) {
      auto& node = *nodes_[env.dst];
      if (!node.service) return;
      const auto& from = sim_.name(env.src);
      node.invoke([&] { node.service->on_message(node, from, env.payload); });
    });
  }

  RepResult run() {
    for (auto* n : with_service_) n->invoke([&] { n->service->on_start(*n); });
    const auto all_ready = [this] {
      return std::all_of(with_service_.begin(), with_service_.end(), [](const NodeContext* n) { return n->ready(); });
    };
    if (!all_ready()) sim_.run_until(SimTime(options_.setup_limit), all_ready);
    if (!all_ready()) {
      std::string waiting;
      for (const auto* n : with_service_) {
        if (!n->ready()) waiting += (waiting.empty() ? "" : ", ") + n->self();
      }
      throw SetupError("setup did not complete within " + std::to_string(options_.setup_limit.count()) +
                       "ns of virtual time; still waiting for: " + waiting);
    }
    start_ = sim_.now();
    for (auto* n : with_service_) n->invoke([&] { n->service->on_scenario_start(*n); });

    schedule_faults();
    schedule_loads();
    const SimTime end = *start_ + spec_.duration;
    sim_.run_until(end);
    for (auto* n : with_service_) n->invoke([&] { n->service->on_finish(*n); });
    sim_.emit_flow_metrics(store_);
    store_.flush();

    RepResult r;
    r.scenario = spec_.name;
    r.stats = sim_.totals();
    r.scenario_start = *start_;
    r.end = end;
    r.records = store_.records();
    return r;
  }

  const config::ScenarioSpec& spec() const { return spec_; }
  net::Simulator& sim() { return sim_; }
  metrics::MetricStore& store() { return store_; }
  std::optional<SimTime> start() const { return start_; }

 private:
  static std::vector<std::string> node_names(const config::ScenarioSpec& spec) {
    std::vector<std::string> out;
    for (const auto& n : spec.nodes) out.push_back(n.id);
    return out;
  }

  void schedule_faults() {
    for (const auto& f : spec_.faults) {
      const auto target = *sim_.find(f.target);
      sim_.schedule(*start_ + f.at, net::Priority::fault, target, [this, &f, target] {
        metrics::Labels labels{{"kind", std::string(config::to_string(f.kind))}};
        if (!f.behavior.empty()) labels["behavior"] = f.behavior;
        store_.record({sim_.now(), f.target, "fault.applied", std::int64_t{1}, labels});
        auto& node = *nodes_[target];
        switch (f.kind) {
          case config::FaultKind::crash:
            sim_.crash(target);
            break;
          case config::FaultKind::restore:
            sim_.restore(target);
            if (node.service) node.invoke([&] { node.service->on_restore(node); });
            break;
          case config::FaultKind::partition: {
            std::vector<net::NodeId> peers;
            for (const auto& p : f.peers) peers.push_back(*sim_.find(p));
            sim_.partition(target, peers);
            break;
          }
          case config::FaultKind::byzantine:
            node.add_byzantine(f.behavior);
            if (node.service) node.invoke([&] { node.service->on_byzantine(node, f.behavior); });
            break;
        }
      });
    }
  }

  void schedule_loads() {
    for (std::size_t i = 0; i < spec_.loads.size(); ++i) {
      const auto& load = spec_.loads[i];
      auto arrivals = streams_.stream({"load", std::to_string(i), "arrivals"});
      auto fees = streams_.stream({"load", std::to_string(i), "fees"});
      const auto ops = generate_load(load, arrivals, fees);
      const auto client = *sim_.find(load.client);
      for (std::uint64_t k = 0; k < ops.size(); ++k) {
        ClientOp op{i, k, load.target, load.payload_bytes, ops[k].high_fee,
                    ops[k].high_fee ? load.high_fee_multiplier : 1.0};
        sim_.schedule(*start_ + ops[k].offset, net::Priority::external, client, [this, client, op = std::move(op)] {
          if (sim_.crashed(client)) return;
          auto& node = *nodes_[client];
          if (node.service) node.invoke([&] { node.service->on_client_op(node, op); });
        });
      }
    }
  }

  const config::ScenarioSpec& spec_;
  StreamFactory streams_;
  metrics::MetricStore store_;
  net::Simulator sim_;
  RunOptions options_;
  std::vector<std::unique_ptr<NodeContext>> nodes_;
  std::vector<NodeContext*> with_service_;
  std::optional<SimTime> start_;

  friend class NodeContext;
};

template <typename F>
void NodeContext::invoke(F&& fn) {
  active_ = true;
  local_ = std::max(engine_.sim().now(), cpu_free_);
  fn();
  cpu_free_ = local_;
  active_ = false;
}

SimTime NodeContext::now() const { return active_ ? local_ : engine_.sim().now(); }
const config::ScenarioSpec& NodeContext::scenario() const { return engine_.spec(); }
std::optional<SimTime> NodeContext::scenario_start() const { return engine_.start(); }
Duration NodeContext::max_link_delay() const { return engine_.sim().router().max_delay(); }

void NodeContext::send(const std::string& dst, Bytes payload, std::optional<std::uint32_t> size_bytes) {
  const auto to = engine_.sim().find(dst);
  if (!to) throw std::invalid_argument(spec_.id + " sent to unknown node " + dst);
  const auto size = size_bytes.value_or(static_cast<std::uint32_t>(payload.size()));
  engine_.sim().send(id_, *to, std::move(payload), size, now());
}

TimerId NodeContext::set_timer(SimTime at, std::uint64_t tag) {
  at = std::max(at, now());
  return engine_.sim().set_timer(id_, at, [this, tag] { invoke([&] { service->on_timer(*this, tag); }); });
}

void NodeContext::cancel_timer(TimerId id) { engine_.sim().cancel_timer(id); }

void NodeContext::emit(std::string name, metrics::Value value, metrics::Labels labels) {
  engine_.store().record({now(), spec_.id, std::move(name), value, std::move(labels)});
}

void NodeContext::charge(std::string_view op, double count) {
  if (!(spec_.compute_capacity > 0)) return;
  const auto it = spec_.costs.find(std::string(op));
  if (it == spec_.costs.end() || !(it->second > 0)) return;
  const double ns = it->second * count / spec_.compute_capacity * 1e9;
  const auto d = Duration(static_cast<std::int64_t>(std::llround(ns)));
  if (active_) local_ += d;
  else cpu_free_ = std::max(cpu_free_, engine_.sim().now()) + d;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw std::runtime_error("error writing " + path.string());
}

}  // namespace

std::string percentile_key(double p) {
  auto s = format_double(p);
  if (s.ends_with(".0")) s.resize(s.size() - 2);
  return "p" + s;
}

std::filesystem::path scenario_dir(const config::ScenarioSpec& spec, const RunOptions& options) {
  const std::filesystem::path root = options.output_root.value_or(std::filesystem::path(spec.process.output_dir));
  return root / spec.name;
}

std::string meta_json(const config::ScenarioSpec& spec, const RepResult& r) {
  nlohmann::ordered_json j;
  j["scenario"] = spec.name;
  j["rep"] = r.rep;
  j["seed"] = spec.seed;
  j["spec_sha256"] = config::spec_hash(spec);
  j["version"] = kVersion;
  j["wall_time_ms"] = r.wall_time_ms;
  j["scenario_start_ns"] = r.scenario_start.count();
  j["end_ns"] = r.end.count();
  j["duration_ns"] = spec.duration.count();
  j["window_ns"] = spec.process.window.count();
  j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : spec.process.metadata) j["metadata"][k] = v;
  j["stats"] = {{"events", r.stats.events},
                {"sent", r.stats.sent},
                {"delivered", r.stats.delivered},
                {"dropped", r.stats.dropped},
                {"in_flight", r.stats.in_flight}};

  std::map<std::string, std::vector<double>> by_name;
  for (const auto& rec : r.records) by_name[rec.name].push_back(rec.as_double());
  auto& summaries = j["summaries"] = nlohmann::ordered_json::object();
  for (const auto& [name, values] : by_name) {
    const auto s = metrics::summarize(values, spec.process.percentiles);
    nlohmann::ordered_json o;
    o["count"] = s.count;
    o["mean"] = s.mean;
    o["min"] = s.min;
    o["max"] = s.max;
    for (const auto& [p, v] : s.percentiles) o[percentile_key(p)] = v;
    summaries[name] = o;
  }
  return j.dump(2) + "\n";
}

RepResult run_repetition(const config::ScenarioSpec& spec, std::uint32_t rep, const ServiceFactory& factory,
                         const RunOptions& options) {
  const auto wall_start = std::chrono::steady_clock::now();
  Engine engine(spec, rep, factory, options);
  RepResult r = engine.run();
  r.rep = rep;
  r.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - wall_start).count();
  if (options.write_files) {
    const auto sdir = scenario_dir(spec, options);
    r.dir = sdir / std::to_string(rep);
    std::error_code ec;
    std::filesystem::create_directories(r.dir, ec);
    if (ec) throw std::runtime_error("cannot create " + r.dir.string() + ": " + ec.message());
    const auto& ex = spec.process.exports;
    metrics::export_files(r.records, r.dir, ex.contains(config::ExportFormat::csv), ex.contains(config::ExportFormat::jsonl));
    write_text(r.dir / "meta.json", meta_json(spec, r));
    write_text(sdir / "spec.yaml", config::serialize(spec));
  }
  return r;
}

std::vector<RepResult> run_experiment(const config::ScenarioSpec& spec, const ServiceFactory& factory,
                                      const RunOptions& options) {
  std::vector<RepResult> out;
  for (std::uint32_t rep = 0; rep < spec.repetitions; ++rep) out.push_back(run_repetition(spec, rep, factory, options));
  return out;
}

std::vector<RunOutcome> run_campaign(std::vector<config::ScenarioSpec> specs, const ServiceFactory& factory,
                                     const CampaignOptions& options) {
  std::vector<config::ScenarioSpec> selected;
  for (auto& s : specs) {
    if (!options.filter.empty() && s.name.find(options.filter) == std::string::npos) continue;
    if (options.seed) s.seed = *options.seed;
    selected.push_back(std::move(s));
  }
  std::vector<std::pair<std::size_t, std::uint32_t>> tasks;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    for (std::uint32_t rep = 0; rep < selected[i].repetitions; ++rep) tasks.emplace_back(i, rep);
  }
  std::vector<RunOutcome> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    while (true) {
      const auto k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      const auto& [i, rep] = tasks[k];
      auto& o = outcomes[k];
      o.scenario = selected[i].name;
      o.rep = rep;
      try {
        const auto r = run_repetition(selected[i], rep, factory, options.run);
        o.ok = true;
        o.stats = r.stats;
        o.wall_time_ms = r.wall_time_ms;
        o.dir = r.dir;
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(std::max<std::size_t>(tasks.size(), 1))));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return outcomes;
}

}  // namespace desklab::harness
