#pragma once

// In-process DKG/signing driver shared by the FROST unit and acceptance tests.

#include <algorithm>
#include <string>
#include <vector>

#include "desklab/common/rng.hpp"
#include "desklab/frost/frost.hpp"

namespace desklab::testing {

template <frost::PrimeOrderGroup G>
struct DkgOutcome {
  std::vector<frost::DkgParticipant<G>> participants;
  std::vector<frost::KeyPackage<G>> keys;  // keys[i-1] belongs to participant i

  /// Sum of every participant's constant term: the secret nobody holds.
  typename G::Scalar group_secret() const {
    typename G::Scalar s{};
    for (const auto& p : participants) s += p.coefficients().front();
    return s;
  }
};

template <frost::PrimeOrderGroup G>
DkgOutcome<G> run_dkg(std::uint32_t n, std::uint32_t t, std::uint64_t seed, const std::string& context = "desklab-test") {
  DkgOutcome<G> out;
  out.participants.reserve(n);
  for (frost::Index i = 1; i <= n; ++i) {
    auto rng = derive_rng(seed, {"frost", "dkg", std::to_string(i)});
    out.participants.emplace_back(i, n, t, context, rng);
  }
  for (auto& p : out.participants) {
    for (const auto& q : out.participants) {
      if (q.index() != p.index()) p.accept_round1(q.broadcast());
    }
  }
  for (auto& p : out.participants) {
    for (const auto& q : out.participants) {
      if (q.index() != p.index()) p.accept_share(q.index(), q.share_for(p.index()));
    }
  }
  for (const auto& p : out.participants) out.keys.push_back(p.finish());
  return out;
}

/// Secret reconstructed from (index, share) pairs by interpolation at zero.
template <frost::PrimeOrderGroup G>
typename G::Scalar interpolate_secret(const std::vector<frost::KeyPackage<G>>& keys, const std::vector<frost::Index>& subset) {
  typename G::Scalar acc{};
  for (auto i : subset) acc += frost::lagrange_coeff<G>(subset, i) * keys[i - 1].secret_share;
  return acc;
}

/// Signs `message` with the given signer subset using fresh nonces.
template <frost::PrimeOrderGroup G>
frost::Signature<G> sign_with(const DkgOutcome<G>& dkg, std::vector<frost::Index> subset, const Bytes& message, Rng& rng) {
  std::sort(subset.begin(), subset.end());
  std::vector<frost::NoncePair<G>> nonces;
  std::vector<frost::CommitmentEntry<G>> entries;
  for (auto i : subset) {
    nonces.push_back(frost::NoncePair<G>::generate(0, rng));
    entries.push_back({i, nonces.back().commitment.hiding, nonces.back().commitment.binding});
  }
  const auto& pub = dkg.keys.front().public_package;
  const auto pkg = frost::make_signing_package<G>(message, entries, pub.t);
  std::vector<frost::PartialSignature<G>> partials;
  for (std::size_t k = 0; k < subset.size(); ++k) {
    partials.push_back(frost::sign_partial<G>(dkg.keys[subset[k] - 1], pkg, nonces[k]));
  }
  return frost::aggregate<G>(pkg, partials, pub);
}

/// Random subset of {1..n} of the given size.
inline std::vector<frost::Index> random_subset(std::uint32_t n, std::uint32_t size, Rng& rng) {
  std::vector<frost::Index> all(n);
  for (std::uint32_t i = 0; i < n; ++i) all[i] = i + 1;
  for (std::uint32_t i = 0; i < size; ++i) {
    const auto j = i + static_cast<std::uint32_t>(rng.uniform_below(n - i));
    std::swap(all[i], all[j]);
  }
  all.resize(size);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace desklab::testing
