#pragma once
// Proposer-builder separation model: clients submit transactions to a
// builder's mempool, the builder periodically rebuilds its block and bids it
// to the relay, the relay picks the best bid per slot.
//
// Metrics: pbs.mempool_latency_ns, pbs.queue_size, pbs.duplicate, pbs.bids,
// pbs.bid_suppressed, pbs.included, pbs.pending_at_end (builder);
// pbs.bid_accepted, pbs.bid_rejected, pbs.slot_value, pbs.cum_value (relay);
// pbs.confirmed, pbs.tx_timeout (client terminal).

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "desklab/harness/service.hpp"

namespace desklab::sut::pbs {

struct Transaction {
  std::uint64_t id = 0;
  std::uint64_t gas = 0;
  std::uint64_t fee_per_gas = 0;
  SimTime arrival{0};

  std::uint64_t value() const { return gas * fee_per_gas; }
};

struct Block {
  std::vector<std::uint64_t> txs;  // ids in packing order
  std::uint64_t gas_used = 0;
  std::uint64_t value = 0;
};

enum class BuildPolicy { greedy, fifo };

/// Greedy: descending fee per gas, ties to the lower id. FIFO: the given
/// (arrival) order. Both skip any transaction that no longer fits.
Block build_block(std::span<const Transaction> pending, std::uint64_t gas_limit, BuildPolicy policy);

/// Builder-side suppression: a bid goes out only if it beats every earlier
/// bid of the same slot.
class BidGate {
 public:
  bool offer(std::int64_t slot, std::uint64_t value);

 private:
  std::map<std::int64_t, std::uint64_t> best_;
};

std::unique_ptr<harness::Service> make_service(const config::ServiceBinding& binding, const config::ScenarioSpec& spec);

}  // namespace desklab::sut::pbs
