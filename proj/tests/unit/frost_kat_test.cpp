// Known-answer tests on the toy group. Expected values come from
// tests/oracles/frost_toy_oracle.py (plain modular arithmetic, its own
// MT19937-64 and stream derivation), run before the C++ protocol existed.

#include <vector>

#include "doctest.h"
#include "desklab/common/rng.hpp"
#include "desklab/frost/frost.hpp"
#include "desklab/frost/toy_group.hpp"

using namespace desklab;
using namespace desklab::frost;
using Toy = ToyGroup;

namespace {

constexpr std::uint64_t kSeed = 42;
constexpr const char* kContext = "desklab-kat";

std::vector<std::uint32_t> residues(const std::vector<Toy::Element>& es) {
  std::vector<std::uint32_t> out;
  for (const auto& e : es) out.push_back(e.residue());
  return out;
}

}  // namespace

TEST_CASE("toy group generator has order 101") {
  CHECK(Toy::pow_mod(64, 101, 607) == 1);
  CHECK(Toy::pow_mod(64, 1, 607) != 1);
  CHECK(Toy::Element::generator().residue() == 64);
}

TEST_CASE("single-party schnorr on the toy group") {
  const auto secret = Toy::Scalar::from_u64(5);
  const auto y = Toy::Element::base(secret);
  CHECK(y.residue() == 100);  // 64^5 mod 607

  auto rng = derive_rng(kSeed, {"kat", "single"});
  const Bytes msg = to_bytes("test");
  const auto sig = sign_single<Toy>(secret, msg, rng);
  CHECK(verify<Toy>(y, msg, sig));
  Bytes other = msg;
  other[0] ^= 1;
  CHECK_FALSE(verify<Toy>(y, other, sig));
}

TEST_CASE("seeded (3,2) DKG and signing transcript matches the oracle") {
  std::vector<DkgParticipant<Toy>> parts;
  for (Index i = 1; i <= 3; ++i) {
    auto rng = derive_rng(kSeed, {"frost", "dkg", std::to_string(i)});
    parts.emplace_back(i, 3, 2, kContext, rng);
  }

  CHECK(residues(parts[0].broadcast().commitment) == std::vector<std::uint32_t>{7, 172});
  CHECK(parts[0].broadcast().proof_mu.value() == 3);
  CHECK(parts[1].share_for(1).value() == 64);  // f_2(1)

  for (auto& p : parts) {
    for (const auto& q : parts) {
      if (q.index() != p.index()) p.accept_round1(q.broadcast());
    }
  }
  for (auto& p : parts) {
    for (const auto& q : parts) {
      if (q.index() != p.index()) p.accept_share(q.index(), q.share_for(p.index()));
    }
  }
  std::vector<KeyPackage<Toy>> keys;
  for (const auto& p : parts) keys.push_back(p.finish());

  CHECK(keys[0].secret_share.value() == 91);
  CHECK(keys[1].secret_share.value() == 65);
  CHECK(keys[2].secret_share.value() == 39);
  for (const auto& k : keys) {
    CHECK(k.public_package.group_key.residue() == 348);
    CHECK(residues(k.public_package.verification_shares) == std::vector<std::uint32_t>{137, 565, 580});
  }

  std::vector<NoncePair<Toy>> nonces;
  for (Index i = 1; i <= 2; ++i) {
    auto rng = derive_rng(kSeed, {"frost", "nonce", std::to_string(i)});
    nonces.push_back(NoncePair<Toy>::generate(0, rng));
  }
  std::vector<CommitmentEntry<Toy>> entries;
  for (Index i = 1; i <= 2; ++i) {
    entries.push_back({i, nonces[i - 1].commitment.hiding, nonces[i - 1].commitment.binding});
  }
  const auto pkg = make_signing_package<Toy>(to_bytes("test"), entries, 2);
  std::vector<PartialSignature<Toy>> partials;
  for (Index i = 1; i <= 2; ++i) partials.push_back(sign_partial<Toy>(keys[i - 1], pkg, nonces[i - 1]));
  const auto sig = aggregate<Toy>(pkg, partials, keys[0].public_package);

  CHECK(sig.r.residue() == 339);
  CHECK(sig.z.value() == 76);
  CHECK(verify<Toy>(keys[0].public_package.group_key, pkg.message, sig));
}

TEST_CASE("lagrange coefficients for {1,2,3} mod 101") {
  const std::vector<Index> s{1, 2, 3};
  CHECK(lagrange_coeff<Toy>(s, 1).value() == 3);
  CHECK(lagrange_coeff<Toy>(s, 2).value() == 98);
  CHECK(lagrange_coeff<Toy>(s, 3).value() == 1);
}
