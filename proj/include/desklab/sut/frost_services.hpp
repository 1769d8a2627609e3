#pragma once
// Coordinator-based FROST over the emulated network.
//
// Setup: the first n frost-signer nodes (declaration order, indices 1..n) run
// the DKG by broadcasting round-1 packages to each other and the coordinator,
// then exchange shares. Each signer then sends a nonce batch to the
// coordinator, which derives the public key package and announces the group
// key to every frost-client.
//
// Signing (2 rounds): client -> coordinator SignRequest; coordinator picks the
// lowest t unsuspected signers holding a cached nonce and sends the package;
// signers answer with a partial plus a replacement nonce; the coordinator
// verifies, aggregates and replies. With a uniform one-way delay d and free
// compute the client sees 4d. The 3-round variant fetches commitments on
// demand first (6d).
//
// Metrics: frost.e2e_ns, frost.sign_failed, frost.timeout (client terminal);
// frost.coordinator_timeout, frost.culprit, frost.rejected (coordinator).

#include <memory>

#include "desklab/harness/service.hpp"

namespace desklab::sut {

/// Coordinator timeout when configured as 0: max(10 x max link delay, 100 ms).
Duration frost_default_timeout(Duration max_link_delay);

std::unique_ptr<harness::Service> make_frost_service(const config::ServiceBinding& binding,
                                                     const config::ScenarioSpec& spec);

}  // namespace desklab::sut
