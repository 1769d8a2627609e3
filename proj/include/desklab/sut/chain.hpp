#pragma once
// Relay-chain throughput model. Clients submit to a non-participation node,
// which forwards to one relay (rotating to the next on an ack timeout); the
// relay forwards at its capacity to every participation node; participation
// nodes take turns (round-robin) packing the oldest pending transactions into
// a block. Block k is packed one interval after block k-1 committed and
// commits after interval * (1 + fill * beta), fill = size / block_capacity.
//
// Metrics: chain.tx_accepted, chain.tx_timeout (client terminal);
// chain.reroute (non-participation); chain.relay_queue, chain.relay_drop,
// chain.relay_duplicate (relay); chain.block_size, chain.block_time_ns,
// chain.committed_tps, chain.commit_latency_ns (block leader).

#include <memory>

#include "desklab/harness/service.hpp"

namespace desklab::sut::chain {

std::unique_ptr<harness::Service> make_service(const config::ServiceBinding& binding, const config::ScenarioSpec& spec);

}  // namespace desklab::sut::chain
