#pragma once

// Binary wire format for FROST messages.
//
// Frame:  u8 version (=1) | u8 type | u8 group id | u32 body length | body
// All integers big-endian; elements and scalars use the group's canonical
// fixed-size encoding; byte strings are u32-length-prefixed.
//
// Bodies:
//   1 DkgRound1        u32 sender | u32 k | k*element C | element R' | scalar mu
//   2 DkgShare         u32 from | u32 to | scalar f_from(to)
//   3 NonceBatch       u32 signer | u32 k | k*(u64 id | element D | element E)
//   4 SignRequest      u64 request | bytes message
//   5 SignPackage      u64 request | bytes message | u32 k | k*(u32 signer | u64 nonce id | element D | element E)
//   6 Partial          u64 request | u32 signer | scalar z | u8 has_next | [u64 id | element D | element E]
//   7 SignatureReply   u64 request | element R | scalar z
//   8 SignFailure      u64 request | u8 reason | u32 k | k*u32 culprit
//   9 CommitRequest    u64 request
//  10 CommitReply      u64 request | u32 signer | u64 id | element D | element E
//  11 GroupKey         u32 n | u32 t | element Y

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "desklab/common/bytes.hpp"
#include "desklab/frost/frost.hpp"

namespace desklab::frost::wire {

inline constexpr std::uint8_t kVersion = 1;

enum class MessageType : std::uint8_t {
  dkg_round1 = 1,
  dkg_share = 2,
  nonce_batch = 3,
  sign_request = 4,
  sign_package = 5,
  partial = 6,
  signature = 7,
  sign_failure = 8,
  commit_request = 9,
  commit_reply = 10,
  group_key = 11,
};

enum class FailureReason : std::uint8_t {
  invalid_partial = 1,
  insufficient_signers = 2,
};

template <PrimeOrderGroup G>
struct DkgRound1 {
  Round1Broadcast<G> broadcast;
  friend bool operator==(const DkgRound1&, const DkgRound1&) = default;
};

template <PrimeOrderGroup G>
struct DkgShare {
  Index from = 0;
  Index to = 0;
  typename G::Scalar share;
  friend bool operator==(const DkgShare&, const DkgShare&) = default;
};

template <PrimeOrderGroup G>
struct NonceBatch {
  Index signer = 0;
  std::vector<NonceCommitment<G>> commitments;
  friend bool operator==(const NonceBatch&, const NonceBatch&) = default;
};

struct SignRequest {
  std::uint64_t request = 0;
  Bytes message;
  friend bool operator==(const SignRequest&, const SignRequest&) = default;
};

template <PrimeOrderGroup G>
struct PackageEntry {
  Index signer = 0;
  NonceCommitment<G> nonce;
  friend bool operator==(const PackageEntry&, const PackageEntry&) = default;
};

template <PrimeOrderGroup G>
struct SignPackage {
  std::uint64_t request = 0;
  Bytes message;
  std::vector<PackageEntry<G>> entries;

  SigningPackage<G> to_signing_package(std::uint32_t t) const {
    std::vector<CommitmentEntry<G>> cs;
    cs.reserve(entries.size());
    for (const auto& e : entries) cs.push_back({e.signer, e.nonce.hiding, e.nonce.binding});
    return make_signing_package<G>(message, std::move(cs), t);
  }

  friend bool operator==(const SignPackage&, const SignPackage&) = default;
};

template <PrimeOrderGroup G>
struct Partial {
  std::uint64_t request = 0;
  PartialSignature<G> partial;
  std::optional<NonceCommitment<G>> next_nonce;
  friend bool operator==(const Partial&, const Partial&) = default;
};

template <PrimeOrderGroup G>
struct SignatureReply {
  std::uint64_t request = 0;
  Signature<G> signature;
  friend bool operator==(const SignatureReply&, const SignatureReply&) = default;
};

struct SignFailure {
  std::uint64_t request = 0;
  FailureReason reason = FailureReason::invalid_partial;
  std::vector<Index> culprits;
  friend bool operator==(const SignFailure&, const SignFailure&) = default;
};

struct CommitRequest {
  std::uint64_t request = 0;
  friend bool operator==(const CommitRequest&, const CommitRequest&) = default;
};

template <PrimeOrderGroup G>
struct CommitReply {
  std::uint64_t request = 0;
  Index signer = 0;
  NonceCommitment<G> nonce;
  friend bool operator==(const CommitReply&, const CommitReply&) = default;
};

template <PrimeOrderGroup G>
struct GroupKey {
  std::uint32_t n = 0;
  std::uint32_t t = 0;
  typename G::Element key;
  friend bool operator==(const GroupKey&, const GroupKey&) = default;
};

template <PrimeOrderGroup G>
using Message = std::variant<DkgRound1<G>, DkgShare<G>, NonceBatch<G>, SignRequest, SignPackage<G>, Partial<G>,
                             SignatureReply<G>, SignFailure, CommitRequest, CommitReply<G>, GroupKey<G>>;

namespace detail {

template <PrimeOrderGroup G>
struct BodyWriter {
  ByteWriter& w;

  void element(const typename G::Element& e) { w.raw(e.encode()); }
  void scalar(const typename G::Scalar& s) { w.raw(s.encode()); }
  void nonce(const NonceCommitment<G>& n) {
    w.u64(n.id);
    element(n.hiding);
    element(n.binding);
  }

  MessageType operator()(const DkgRound1<G>& m) {
    w.u32(m.broadcast.sender);
    w.u32(static_cast<std::uint32_t>(m.broadcast.commitment.size()));
    for (const auto& c : m.broadcast.commitment) element(c);
    element(m.broadcast.proof_r);
    scalar(m.broadcast.proof_mu);
    return MessageType::dkg_round1;
  }
  MessageType operator()(const DkgShare<G>& m) {
    w.u32(m.from);
    w.u32(m.to);
    scalar(m.share);
    return MessageType::dkg_share;
  }
  MessageType operator()(const NonceBatch<G>& m) {
    w.u32(m.signer);
    w.u32(static_cast<std::uint32_t>(m.commitments.size()));
    for (const auto& c : m.commitments) nonce(c);
    return MessageType::nonce_batch;
  }
  MessageType operator()(const SignRequest& m) {
    w.u64(m.request);
    w.sized(m.message);
    return MessageType::sign_request;
  }
  MessageType operator()(const SignPackage<G>& m) {
    w.u64(m.request);
    w.sized(m.message);
    w.u32(static_cast<std::uint32_t>(m.entries.size()));
    for (const auto& e : m.entries) {
      w.u32(e.signer);
      nonce(e.nonce);
    }
    return MessageType::sign_package;
  }
  MessageType operator()(const Partial<G>& m) {
    w.u64(m.request);
    w.u32(m.partial.signer);
    scalar(m.partial.z);
    w.u8(m.next_nonce ? 1 : 0);
    if (m.next_nonce) nonce(*m.next_nonce);
    return MessageType::partial;
  }
  MessageType operator()(const SignatureReply<G>& m) {
    w.u64(m.request);
    element(m.signature.r);
    scalar(m.signature.z);
    return MessageType::signature;
  }
  MessageType operator()(const SignFailure& m) {
    w.u64(m.request);
    w.u8(static_cast<std::uint8_t>(m.reason));
    w.u32(static_cast<std::uint32_t>(m.culprits.size()));
    for (auto c : m.culprits) w.u32(c);
    return MessageType::sign_failure;
  }
  MessageType operator()(const CommitRequest& m) {
    w.u64(m.request);
    return MessageType::commit_request;
  }
  MessageType operator()(const CommitReply<G>& m) {
    w.u64(m.request);
    w.u32(m.signer);
    nonce(m.nonce);
    return MessageType::commit_reply;
  }
  MessageType operator()(const GroupKey<G>& m) {
    w.u32(m.n);
    w.u32(m.t);
    element(m.key);
    return MessageType::group_key;
  }
};

template <PrimeOrderGroup G>
struct BodyReader {
  ByteReader& r;

  typename G::Element element() { return G::Element::decode(r.raw(G::kElementSize)); }
  typename G::Scalar scalar() { return G::Scalar::decode(r.raw(G::kScalarSize)); }
  NonceCommitment<G> nonce() {
    NonceCommitment<G> n;
    n.id = r.u64();
    n.hiding = element();
    n.binding = element();
    return n;
  }
  std::uint32_t count(std::size_t item_size) {
    const auto k = r.u32();
    if (static_cast<std::size_t>(k) * item_size > r.remaining()) throw DecodeError("list length exceeds body");
    return k;
  }
};

}  // namespace detail

template <PrimeOrderGroup G>
Bytes encode(const Message<G>& msg) {
  ByteWriter body;
  detail::BodyWriter<G> bw{body};
  const MessageType type = std::visit(bw, msg);
  ByteWriter frame;
  frame.u8(kVersion);
  frame.u8(static_cast<std::uint8_t>(type));
  frame.u8(G::kWireId);
  frame.sized(body.view());
  return frame.take();
}

template <PrimeOrderGroup G>
Message<G> decode(std::span<const std::uint8_t> frame) {
  ByteReader outer(frame);
  if (outer.u8() != kVersion) throw DecodeError("unsupported FROST wire version");
  const auto type = static_cast<MessageType>(outer.u8());
  if (outer.u8() != G::kWireId) throw DecodeError("FROST message for a different group");
  const Bytes body = outer.sized();
  outer.expect_end();

  ByteReader r(body);
  detail::BodyReader<G> br{r};
  Message<G> out;
  switch (type) {
    case MessageType::dkg_round1: {
      DkgRound1<G> m;
      m.broadcast.sender = r.u32();
      const auto k = br.count(G::kElementSize);
      for (std::uint32_t i = 0; i < k; ++i) m.broadcast.commitment.push_back(br.element());
      if (m.broadcast.commitment.empty()) throw DecodeError("empty commitment");
      m.broadcast.proof_r = br.element();
      m.broadcast.proof_mu = br.scalar();
      out = std::move(m);
      break;
    }
    case MessageType::dkg_share: {
      DkgShare<G> m;
      m.from = r.u32();
      m.to = r.u32();
      m.share = br.scalar();
      out = m;
      break;
    }
    case MessageType::nonce_batch: {
      NonceBatch<G> m;
      m.signer = r.u32();
      const auto k = br.count(8 + 2 * G::kElementSize);
      for (std::uint32_t i = 0; i < k; ++i) m.commitments.push_back(br.nonce());
      out = std::move(m);
      break;
    }
    case MessageType::sign_request: {
      SignRequest m;
      m.request = r.u64();
      m.message = r.sized();
      out = std::move(m);
      break;
    }
    case MessageType::sign_package: {
      SignPackage<G> m;
      m.request = r.u64();
      m.message = r.sized();
      const auto k = br.count(4 + 8 + 2 * G::kElementSize);
      for (std::uint32_t i = 0; i < k; ++i) {
        PackageEntry<G> e;
        e.signer = r.u32();
        e.nonce = br.nonce();
        m.entries.push_back(e);
      }
      out = std::move(m);
      break;
    }
    case MessageType::partial: {
      Partial<G> m;
      m.request = r.u64();
      m.partial.signer = r.u32();
      m.partial.z = br.scalar();
      const auto has_next = r.u8();
      if (has_next > 1) throw DecodeError("bad optional flag");
      if (has_next) m.next_nonce = br.nonce();
      out = std::move(m);
      break;
    }
    case MessageType::signature: {
      SignatureReply<G> m;
      m.request = r.u64();
      m.signature.r = br.element();
      m.signature.z = br.scalar();
      out = m;
      break;
    }
    case MessageType::sign_failure: {
      SignFailure m;
      m.request = r.u64();
      const auto reason = r.u8();
      if (reason < 1 || reason > 2) throw DecodeError("unknown failure reason");
      m.reason = static_cast<FailureReason>(reason);
      const auto k = br.count(4);
      for (std::uint32_t i = 0; i < k; ++i) m.culprits.push_back(r.u32());
      out = std::move(m);
      break;
    }
    case MessageType::commit_request: {
      out = CommitRequest{r.u64()};
      break;
    }
    case MessageType::commit_reply: {
      CommitReply<G> m;
      m.request = r.u64();
      m.signer = r.u32();
      m.nonce = br.nonce();
      out = m;
      break;
    }
    case MessageType::group_key: {
      GroupKey<G> m;
      m.n = r.u32();
      m.t = r.u32();
      m.key = br.element();
      out = m;
      break;
    }
    default:
      throw DecodeError("unknown FROST message type");
  }
  r.expect_end();
  return out;
}

}  // namespace desklab::frost::wire
