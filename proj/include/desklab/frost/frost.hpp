#pragma once

// FROST threshold Schnorr signatures over any PrimeOrderGroup: Pedersen DKG
// with Feldman commitments and proofs of knowledge, nonce preprocessing, and
// two-round signing with binding factors and partial-signature verification.

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "desklab/common/bytes.hpp"
#include "desklab/common/rng.hpp"
#include "desklab/common/sha256.hpp"
#include "desklab/frost/group.hpp"

namespace desklab::frost {

inline constexpr std::string_view kTagProofOfKnowledge = "FROST-pok";
inline constexpr std::string_view kTagBindingFactor = "FROST-rho";
inline constexpr std::string_view kTagChallenge = "FROST-chal";

/// A protocol step failed and the misbehaving (or missing) participants are known.
class ProtocolError : public std::runtime_error {
 public:
  enum class Kind {
    invalid_proof,
    invalid_share,
    missing_share,
    invalid_partial,
    missing_partial,
    nonce_reuse,
    unknown_nonce,
  };

  ProtocolError(Kind kind, std::vector<Index> culprits, const std::string& what)
      : std::runtime_error(what + describe(culprits)), kind_(kind), culprits_(std::move(culprits)) {}

  Kind kind() const { return kind_; }
  const std::vector<Index>& culprits() const { return culprits_; }

 private:
  static std::string describe(const std::vector<Index>& culprits) {
    if (culprits.empty()) return {};
    std::string s = " (participants";
    for (auto c : culprits) s += " " + std::to_string(c);
    return s + ")";
  }

  Kind kind_;
  std::vector<Index> culprits_;
};

// ---------------------------------------------------------------------------
// Hashing

/// SHA-256 over tag || (u32be len || part)*, read as a big-endian integer mod q.
template <PrimeOrderGroup G>
typename G::Scalar hash_to_scalar(std::string_view tag,
                                  std::initializer_list<std::span<const std::uint8_t>> parts) {
  Sha256 h;
  h.update(tag);
  for (auto part : parts) {
    ByteWriter len;
    len.u32(static_cast<std::uint32_t>(part.size()));
    h.update(len.view());
    h.update(part);
  }
  return G::Scalar::from_digest(h.finish());
}

template <PrimeOrderGroup G>
typename G::Scalar index_scalar(Index i) {
  return G::Scalar::from_u64(i);
}

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// ---------------------------------------------------------------------------
// Polynomials and commitments

template <PrimeOrderGroup G>
typename G::Scalar evaluate_polynomial(std::span<const typename G::Scalar> coefficients,
                                       const typename G::Scalar& x) {
  typename G::Scalar acc{};
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
  return acc;
}

/// sum_k C_k * x^k, the public image of f(x).
template <PrimeOrderGroup G>
typename G::Element evaluate_commitment(std::span<const typename G::Element> commitment, Index x) {
  const auto xs = index_scalar<G>(x);
  auto power = G::Scalar::from_u64(1);
  auto acc = G::Element::identity();
  for (const auto& c : commitment) {
    acc += c * power;
    power *= xs;
  }
  return acc;
}

/// Lagrange coefficient at zero for participant i over signer set S.
template <PrimeOrderGroup G>
typename G::Scalar lagrange_coeff(std::span<const Index> signers, Index i) {
  std::set<Index> seen;
  for (auto j : signers) {
    if (index_scalar<G>(j).is_zero()) throw std::invalid_argument("signer index is zero mod q");
    if (!seen.insert(j).second) throw std::invalid_argument("duplicate signer index " + std::to_string(j));
  }
  if (!seen.contains(i)) throw std::invalid_argument("index " + std::to_string(i) + " not in signer set");
  const auto xi = index_scalar<G>(i);
  auto num = G::Scalar::from_u64(1);
  auto den = G::Scalar::from_u64(1);
  for (auto j : signers) {
    if (j == i) continue;
    const auto xj = index_scalar<G>(j);
    num *= xj;
    den *= xj - xi;
  }
  return num * den.inverse();
}

// ---------------------------------------------------------------------------
// Distributed key generation

template <PrimeOrderGroup G>
struct Round1Broadcast {
  Index sender = 0;
  std::vector<typename G::Element> commitment;  // a_k * G for k = 0..t-1
  typename G::Element proof_r;                  // R' = k * G
  typename G::Scalar proof_mu;                  // mu = k + a_0 * c

  friend bool operator==(const Round1Broadcast&, const Round1Broadcast&) = default;
};

template <PrimeOrderGroup G>
typename G::Scalar proof_challenge(Index i, std::string_view context, const typename G::Element& c0,
                                   const typename G::Element& r) {
  const auto is = index_scalar<G>(i).encode();
  const auto ce = c0.encode();
  const auto re = r.encode();
  return hash_to_scalar<G>(kTagProofOfKnowledge, {is, as_bytes(context), ce, re});
}

/// Round-1 check: commitment has t entries and mu*G = R' + c*C_0.
template <PrimeOrderGroup G>
bool verify_round1(const Round1Broadcast<G>& b, std::string_view context, std::uint32_t t) {
  if (b.commitment.size() != t) return false;
  const auto c = proof_challenge<G>(b.sender, context, b.commitment.front(), b.proof_r);
  return G::Element::base(b.proof_mu) == b.proof_r + b.commitment.front() * c;
}

/// Feldman check of a share f_j(i) against sender j's commitment.
template <PrimeOrderGroup G>
bool verify_share(Index receiver, const typename G::Scalar& share,
                  std::span<const typename G::Element> commitment) {
  return G::Element::base(share) == evaluate_commitment<G>(commitment, receiver);
}

template <PrimeOrderGroup G>
struct PublicKeyPackage {
  std::uint32_t n = 0;
  std::uint32_t t = 0;
  typename G::Element group_key;
  std::vector<typename G::Element> verification_shares;  // Y_1..Y_n

  const typename G::Element& verification_share(Index l) const {
    if (l == 0 || l > verification_shares.size()) {
      throw std::out_of_range("no verification share for index " + std::to_string(l));
    }
    return verification_shares[l - 1];
  }

  friend bool operator==(const PublicKeyPackage&, const PublicKeyPackage&) = default;
};

template <PrimeOrderGroup G>
struct KeyPackage {
  Index index = 0;
  typename G::Scalar secret_share;
  PublicKeyPackage<G> public_package;
};

/// Y = sum_j C_j0 and Y_l = sum_j f_j(l)*G, from the round-1 commitments alone.
template <PrimeOrderGroup G>
PublicKeyPackage<G> derive_public_package(std::uint32_t n, std::uint32_t t,
                                          const std::map<Index, std::vector<typename G::Element>>& commitments) {
  std::vector<typename G::Element> summed(t, G::Element::identity());
  for (const auto& [j, c] : commitments) {
    if (c.size() != t) throw std::invalid_argument("commitment of participant " + std::to_string(j) + " has wrong length");
    for (std::uint32_t k = 0; k < t; ++k) summed[k] += c[k];
  }
  PublicKeyPackage<G> pkg;
  pkg.n = n;
  pkg.t = t;
  pkg.group_key = summed.front();
  pkg.verification_shares.reserve(n);
  for (Index l = 1; l <= n; ++l) pkg.verification_shares.push_back(evaluate_commitment<G>(summed, l));
  return pkg;
}

inline void check_threshold(std::uint32_t n, std::uint32_t t) {
  if (t < 1 || n < 1 || t > n) {
    throw std::invalid_argument("invalid threshold parameters n=" + std::to_string(n) + " t=" + std::to_string(t));
  }
}

/// One participant's DKG state, from round 1 through finish.
template <PrimeOrderGroup G>
class DkgParticipant {
 public:
  using Scalar = typename G::Scalar;
  using Element = typename G::Element;

  /// Round 1: samples the degree t-1 polynomial and the proof of knowledge of a_0.
  DkgParticipant(Index index, std::uint32_t n, std::uint32_t t, std::string context, Rng& rng)
      : index_(index), n_(n), t_(t), context_(std::move(context)) {
    check_threshold(n, t);
    if (index < 1 || index > n) throw std::invalid_argument("participant index out of range");
    for (Index j = 1; j <= n; ++j) {
      if (index_scalar<G>(j).is_zero()) throw std::invalid_argument("n must be smaller than the group order");
    }
    coefficients_.reserve(t);
    for (std::uint32_t k = 0; k < t; ++k) coefficients_.push_back(Scalar::random(rng));
    const Scalar nonce = Scalar::random(rng);

    broadcast_.sender = index;
    for (const auto& a : coefficients_) broadcast_.commitment.push_back(Element::base(a));
    broadcast_.proof_r = Element::base(nonce);
    const auto c = proof_challenge<G>(index, context_, broadcast_.commitment.front(), broadcast_.proof_r);
    broadcast_.proof_mu = nonce + coefficients_.front() * c;
    commitments_[index] = broadcast_.commitment;
  }

  Index index() const { return index_; }
  std::uint32_t n() const { return n_; }
  std::uint32_t t() const { return t_; }
  const std::string& context() const { return context_; }
  const Round1Broadcast<G>& broadcast() const { return broadcast_; }
  /// Secret polynomial; exposed for ground-truth checks in tests and benches.
  std::span<const Scalar> coefficients() const { return coefficients_; }

  /// Verifies and stores a peer's round-1 broadcast. Throws naming the sender.
  void accept_round1(const Round1Broadcast<G>& b) {
    if (b.sender < 1 || b.sender > n_ || b.sender == index_) {
      throw std::invalid_argument("round-1 broadcast from unexpected index " + std::to_string(b.sender));
    }
    if (!verify_round1<G>(b, context_, t_)) {
      throw ProtocolError(ProtocolError::Kind::invalid_proof, {b.sender}, "round-1 proof rejected");
    }
    commitments_[b.sender] = b.commitment;
  }

  /// f_i(j), the private share sent to participant j.
  Scalar share_for(Index j) const {
    if (j < 1 || j > n_) throw std::invalid_argument("share requested for index out of range");
    return evaluate_polynomial<G>(coefficients_, index_scalar<G>(j));
  }

  /// Verifies f_from(i) against the sender's round-1 commitment. Throws naming the sender.
  void accept_share(Index from, const Scalar& share) {
    auto it = commitments_.find(from);
    if (it == commitments_.end()) {
      throw ProtocolError(ProtocolError::Kind::missing_share, {from}, "share received before round-1 broadcast");
    }
    if (!verify_share<G>(index_, share, it->second)) {
      throw ProtocolError(ProtocolError::Kind::invalid_share, {from}, "share rejected");
    }
    shares_[from] = share;
  }

  bool has_all_round1() const { return commitments_.size() == n_; }
  bool has_all_shares() const { return shares_.size() + 1 == n_; }

  /// s_i = sum_j f_j(i); Y and every Y_l from the commitments.
  KeyPackage<G> finish() const {
    std::vector<Index> absent;
    for (Index j = 1; j <= n_; ++j) {
      if (j == index_) continue;
      if (!commitments_.contains(j) || !shares_.contains(j)) absent.push_back(j);
    }
    if (!absent.empty()) throw ProtocolError(ProtocolError::Kind::missing_share, absent, "DKG incomplete");

    KeyPackage<G> key;
    key.index = index_;
    key.secret_share = share_for(index_);
    for (const auto& [j, s] : shares_) key.secret_share += s;
    key.public_package = derive_public_package<G>(n_, t_, commitments_);
    if (Element::base(key.secret_share) != key.public_package.verification_share(index_)) {
      throw std::logic_error("secret share does not match verification share");
    }
    return key;
  }

 private:
  Index index_;
  std::uint32_t n_;
  std::uint32_t t_;
  std::string context_;
  std::vector<Scalar> coefficients_;
  Round1Broadcast<G> broadcast_;
  std::map<Index, std::vector<Element>> commitments_;
  std::map<Index, Scalar> shares_;
};

// ---------------------------------------------------------------------------
// Nonce preprocessing

template <PrimeOrderGroup G>
struct NonceCommitment {
  std::uint64_t id = 0;
  typename G::Element hiding;   // D = d*G
  typename G::Element binding;  // E = e*G

  friend bool operator==(const NonceCommitment&, const NonceCommitment&) = default;
};

template <PrimeOrderGroup G>
struct NoncePair {
  std::uint64_t id = 0;
  typename G::Scalar hiding;
  typename G::Scalar binding;
  NonceCommitment<G> commitment;
  bool consumed = false;

  static NoncePair generate(std::uint64_t id, Rng& rng) {
    NoncePair p;
    p.id = id;
    p.hiding = G::Scalar::random(rng);
    p.binding = G::Scalar::random(rng);
    p.commitment = {id, G::Element::base(p.hiding), G::Element::base(p.binding)};
    return p;
  }
};

/// A signer's private nonces, each usable for exactly one signature.
template <PrimeOrderGroup G>
class NonceStore {
 public:
  std::vector<NonceCommitment<G>> preprocess(std::size_t count, Rng& rng) {
    std::vector<NonceCommitment<G>> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      auto pair = NoncePair<G>::generate(next_id_++, rng);
      out.push_back(pair.commitment);
      pairs_.emplace(pair.id, std::move(pair));
    }
    return out;
  }

  NoncePair<G>& get(std::uint64_t id) {
    auto it = pairs_.find(id);
    if (it == pairs_.end()) throw ProtocolError(ProtocolError::Kind::unknown_nonce, {}, "unknown nonce id " + std::to_string(id));
    return it->second;
  }

  std::size_t unused() const {
    return static_cast<std::size_t>(std::count_if(pairs_.begin(), pairs_.end(), [](const auto& kv) { return !kv.second.consumed; }));
  }

 private:
  std::uint64_t next_id_ = 0;
  std::map<std::uint64_t, NoncePair<G>> pairs_;
};

// ---------------------------------------------------------------------------
// Signing

template <PrimeOrderGroup G>
struct CommitmentEntry {
  Index signer = 0;
  typename G::Element hiding;
  typename G::Element binding;

  friend bool operator==(const CommitmentEntry&, const CommitmentEntry&) = default;
};

template <PrimeOrderGroup G>
struct SigningPackage {
  Bytes message;
  std::vector<CommitmentEntry<G>> commitments;  // sorted by signer index

  std::vector<Index> signers() const {
    std::vector<Index> out;
    out.reserve(commitments.size());
    for (const auto& c : commitments) out.push_back(c.signer);
    return out;
  }

  friend bool operator==(const SigningPackage&, const SigningPackage&) = default;
};

/// Sorts the commitment list and checks distinct indices and |S| >= t.
template <PrimeOrderGroup G>
SigningPackage<G> make_signing_package(Bytes message, std::vector<CommitmentEntry<G>> commitments, std::uint32_t t) {
  std::sort(commitments.begin(), commitments.end(), [](const auto& a, const auto& b) { return a.signer < b.signer; });
  for (std::size_t k = 1; k < commitments.size(); ++k) {
    if (commitments[k].signer == commitments[k - 1].signer) {
      throw std::invalid_argument("duplicate signer " + std::to_string(commitments[k].signer) + " in signing package");
    }
  }
  if (commitments.size() < t) throw std::invalid_argument("signing package has fewer than t signers");
  return SigningPackage<G>{std::move(message), std::move(commitments)};
}

template <PrimeOrderGroup G>
struct PartialSignature {
  Index signer = 0;
  typename G::Scalar z;

  friend bool operator==(const PartialSignature&, const PartialSignature&) = default;
};

template <PrimeOrderGroup G>
struct Signature {
  typename G::Element r;
  typename G::Scalar z;

  friend bool operator==(const Signature&, const Signature&) = default;
};

template <PrimeOrderGroup G>
typename G::Scalar challenge(const typename G::Element& r, const typename G::Element& group_key,
                             std::span<const std::uint8_t> message) {
  const auto re = r.encode();
  const auto ye = group_key.encode();
  return hash_to_scalar<G>(kTagChallenge, {re, ye, message});
}

/// Per-package values shared by every signer and by the coordinator:
/// binding factors rho_l, group commitment R, challenge c, Lagrange lambda_l.
template <PrimeOrderGroup G>
struct SigningContext {
  using Scalar = typename G::Scalar;
  using Element = typename G::Element;

  const SigningPackage<G>* package = nullptr;
  std::vector<Scalar> binding_factors;
  std::vector<Scalar> lagrange;
  Element group_commitment;
  Scalar challenge;

  SigningContext(const SigningPackage<G>& pkg, const Element& group_key) : package(&pkg) {
    ByteWriter encoded;
    for (const auto& c : pkg.commitments) {
      encoded.raw(index_scalar<G>(c.signer).encode());
      encoded.raw(c.hiding.encode());
      encoded.raw(c.binding.encode());
    }
    const auto signers = pkg.signers();
    group_commitment = Element::identity();
    for (const auto& c : pkg.commitments) {
      const auto ls = index_scalar<G>(c.signer).encode();
      const auto rho = hash_to_scalar<G>(kTagBindingFactor, {ls, pkg.message, encoded.view()});
      binding_factors.push_back(rho);
      lagrange.push_back(lagrange_coeff<G>(signers, c.signer));
      group_commitment += c.hiding + c.binding * rho;
    }
    challenge = frost::challenge<G>(group_commitment, group_key, pkg.message);
  }

  std::size_t position(Index l) const {
    const auto& cs = package->commitments;
    auto it = std::lower_bound(cs.begin(), cs.end(), l, [](const auto& c, Index v) { return c.signer < v; });
    if (it == cs.end() || it->signer != l) throw std::invalid_argument("index " + std::to_string(l) + " not in signing package");
    return static_cast<std::size_t>(it - cs.begin());
  }
};

enum class SignerBehavior {
  honest,
  bad_partial_sig,  // emits z_i + 1
};

/// z_i = d_i + e_i*rho_i + lambda_i*s_i*c. Marks the nonce consumed.
template <PrimeOrderGroup G>
PartialSignature<G> sign_partial(const KeyPackage<G>& key, const SigningPackage<G>& pkg, NoncePair<G>& nonce,
                                 SignerBehavior behavior = SignerBehavior::honest) {
  if (nonce.consumed) {
    throw ProtocolError(ProtocolError::Kind::nonce_reuse, {key.index}, "nonce " + std::to_string(nonce.id) + " already used");
  }
  const SigningContext<G> ctx(pkg, key.public_package.group_key);
  const auto pos = ctx.position(key.index);
  const auto& entry = pkg.commitments[pos];
  if (!(entry.hiding == nonce.commitment.hiding) || !(entry.binding == nonce.commitment.binding)) {
    throw std::invalid_argument("signing package commitment does not match the supplied nonce");
  }
  nonce.consumed = true;
  auto z = nonce.hiding + nonce.binding * ctx.binding_factors[pos] +
           ctx.lagrange[pos] * key.secret_share * ctx.challenge;
  if (behavior == SignerBehavior::bad_partial_sig) z += G::Scalar::from_u64(1);
  return {key.index, z};
}

/// z_l*G == D_l + rho_l*E_l + c*lambda_l*Y_l.
template <PrimeOrderGroup G>
bool verify_partial(const SigningContext<G>& ctx, const PartialSignature<G>& partial,
                    const PublicKeyPackage<G>& pub) {
  const auto pos = ctx.position(partial.signer);
  const auto& entry = ctx.package->commitments[pos];
  const auto lhs = G::Element::base(partial.z);
  const auto rhs = entry.hiding + entry.binding * ctx.binding_factors[pos] +
                   pub.verification_share(partial.signer) * (ctx.challenge * ctx.lagrange[pos]);
  return lhs == rhs;
}

template <PrimeOrderGroup G>
bool verify_partial(const PartialSignature<G>& partial, const SigningPackage<G>& pkg,
                    const PublicKeyPackage<G>& pub) {
  return verify_partial<G>(SigningContext<G>(pkg, pub.group_key), partial, pub);
}

/// Checks every partial and sums them. Throws naming all culprits if any
/// partial is missing or invalid; no signature is produced in that case.
template <PrimeOrderGroup G>
Signature<G> aggregate(const SigningPackage<G>& pkg, std::span<const PartialSignature<G>> partials,
                       const PublicKeyPackage<G>& pub) {
  const SigningContext<G> ctx(pkg, pub.group_key);
  std::map<Index, const PartialSignature<G>*> by_signer;
  for (const auto& p : partials) by_signer[p.signer] = &p;

  std::vector<Index> missing;
  std::vector<Index> invalid;
  for (const auto& entry : pkg.commitments) {
    auto it = by_signer.find(entry.signer);
    if (it == by_signer.end()) {
      missing.push_back(entry.signer);
    } else if (!verify_partial<G>(ctx, *it->second, pub)) {
      invalid.push_back(entry.signer);
    }
  }
  if (!invalid.empty()) throw ProtocolError(ProtocolError::Kind::invalid_partial, invalid, "partial signature rejected");
  if (!missing.empty()) throw ProtocolError(ProtocolError::Kind::missing_partial, missing, "partial signature missing");

  Signature<G> sig{ctx.group_commitment, typename G::Scalar{}};
  for (const auto& entry : pkg.commitments) sig.z += by_signer.at(entry.signer)->z;
  return sig;
}

/// z*G == R + H2(R, Y, m)*Y.
template <PrimeOrderGroup G>
bool verify(const typename G::Element& group_key, std::span<const std::uint8_t> message, const Signature<G>& sig) {
  const auto c = challenge<G>(sig.r, group_key, message);
  return G::Element::base(sig.z) == sig.r + group_key * c;
}

/// Plain single-party Schnorr with the same challenge hash.
template <PrimeOrderGroup G>
Signature<G> sign_single(const typename G::Scalar& secret, std::span<const std::uint8_t> message, Rng& rng) {
  const auto k = G::Scalar::random(rng);
  const auto r = G::Element::base(k);
  const auto c = challenge<G>(r, G::Element::base(secret), message);
  return {r, k + c * secret};
}

}  // namespace desklab::frost
