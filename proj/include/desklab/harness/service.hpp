#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "desklab/common/bytes.hpp"
#include "desklab/common/rng.hpp"
#include "desklab/common/time.hpp"
#include "desklab/config/scenario.hpp"
#include "desklab/metrics/metrics.hpp"

namespace desklab::harness {

using TimerId = std::uint64_t;

/// One operation injected at a client node by a load generator.
struct ClientOp {
  std::size_t load = 0;     // index into ScenarioSpec::loads
  std::uint64_t index = 0;  // per-load sequence number
  std::string target;
  std::uint32_t payload_bytes = 0;
  bool high_fee = false;
  double fee_multiplier = 1;
};

/// Everything a service may touch. Services see the world only through this
/// interface and the read-only scenario.
class SutContext {
 public:
  virtual ~SutContext() = default;

  /// Node-local time: the triggering event's time plus compute charged so far.
  virtual SimTime now() const = 0;
  virtual const std::string& self() const = 0;
  virtual const config::ScenarioSpec& scenario() const = 0;
  /// Start of the measured phase; unset while setup is still running.
  virtual std::optional<SimTime> scenario_start() const = 0;
  /// Largest configured delay + jitter over all link rules.
  virtual Duration max_link_delay() const = 0;

  /// Sends payload; size_bytes (default: payload size) drives rate shaping.
  virtual void send(const std::string& dst, Bytes payload, std::optional<std::uint32_t> size_bytes = std::nullopt) = 0;
  virtual TimerId set_timer(SimTime at, std::uint64_t tag) = 0;
  TimerId set_timer_after(Duration d, std::uint64_t tag) { return set_timer(now() + d, tag); }
  virtual void cancel_timer(TimerId id) = 0;

  virtual void emit(std::string name, metrics::Value value, metrics::Labels labels = {}) = 0;
  virtual Rng& rng() = 0;

  /// Advances local time by the node's cost for `op` (times `count`) divided
  /// by its compute capacity. Free when either is zero or unset.
  virtual void charge(std::string_view op, double count = 1) = 0;
  virtual bool byzantine(std::string_view tag) const = 0;
  /// Setup for this node is complete. The scenario starts once every service
  /// has reported.
  virtual void report_ready() = 0;
};

class Service {
 public:
  virtual ~Service() = default;

  virtual void on_start(SutContext&) {}
  virtual void on_scenario_start(SutContext&) {}
  virtual void on_message(SutContext& ctx, const std::string& from, std::span<const std::uint8_t> payload) = 0;
  virtual void on_timer(SutContext&, std::uint64_t /*tag*/) {}
  virtual void on_client_op(SutContext&, const ClientOp&) {}
  virtual void on_byzantine(SutContext&, const std::string& /*tag*/) {}
  virtual void on_restore(SutContext&) {}
  /// End of the run; clients settle every outstanding operation here.
  virtual void on_finish(SutContext&) {}
};

using ServiceFactory =
    std::function<std::unique_ptr<Service>(const config::ServiceBinding&, const config::ScenarioSpec&)>;

}  // namespace desklab::harness
