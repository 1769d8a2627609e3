#pragma once

#include <concepts>
#include <cstdint>
#include <span>
#include <string_view>

#include "desklab/common/bytes.hpp"
#include "desklab/common/rng.hpp"
#include "desklab/common/sha256.hpp"

namespace desklab::frost {

/// Participant index, 1-based.
using Index = std::uint32_t;

/// A prime-order group written additively: Element + Element, Element * Scalar.
template <class G>
concept PrimeOrderGroup = requires(const typename G::Scalar& s, const typename G::Element& e,
                                   Rng& rng, const Digest256& digest,
                                   std::span<const std::uint8_t> bytes) {
  { G::kName } -> std::convertible_to<std::string_view>;
  { G::kWireId } -> std::convertible_to<std::uint8_t>;
  { G::kScalarSize } -> std::convertible_to<std::size_t>;
  { G::kElementSize } -> std::convertible_to<std::size_t>;
  { G::Scalar::from_u64(std::uint64_t{}) } -> std::same_as<typename G::Scalar>;
  { G::Scalar::random(rng) } -> std::same_as<typename G::Scalar>;
  { G::Scalar::from_digest(digest) } -> std::same_as<typename G::Scalar>;
  { G::Scalar::decode(bytes) } -> std::same_as<typename G::Scalar>;
  { s + s } -> std::same_as<typename G::Scalar>;
  { s - s } -> std::same_as<typename G::Scalar>;
  { s * s } -> std::same_as<typename G::Scalar>;
  { s.inverse() } -> std::same_as<typename G::Scalar>;
  { s.encode() };
  { G::Element::generator() } -> std::same_as<typename G::Element>;
  { G::Element::identity() } -> std::same_as<typename G::Element>;
  { G::Element::base(s) } -> std::same_as<typename G::Element>;
  { G::Element::decode(bytes) } -> std::same_as<typename G::Element>;
  { e + e } -> std::same_as<typename G::Element>;
  { e * s } -> std::same_as<typename G::Element>;
  { e.encode() };
  { e == e } -> std::convertible_to<bool>;
};

}  // namespace desklab::frost
