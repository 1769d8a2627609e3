#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "desklab/frost/group.hpp"

namespace desklab::frost {

/// Order-101 subgroup of Z_607^* generated by 64. Every value fits in a
/// 16-bit word, so transcripts can be checked by hand. Not secure.
struct ToyGroup {
  static constexpr std::string_view kName = "toy";
  static constexpr std::uint8_t kWireId = 0;
  static constexpr std::uint32_t kModulus = 607;
  static constexpr std::uint32_t kOrder = 101;
  static constexpr std::uint32_t kGenerator = 64;
  static constexpr std::size_t kScalarSize = 2;
  static constexpr std::size_t kElementSize = 2;

  class Scalar {
   public:
    constexpr Scalar() = default;

    static constexpr Scalar from_u64(std::uint64_t v) {
      return Scalar(static_cast<std::uint32_t>(v % kOrder));
    }
    static Scalar random(Rng& rng) { return Scalar(static_cast<std::uint32_t>(rng.uniform_below(kOrder))); }
    /// Digest read as a big-endian integer, reduced mod q.
    static Scalar from_digest(const Digest256& d);
    static Scalar decode(std::span<const std::uint8_t> bytes);

    constexpr std::uint32_t value() const { return v_; }
    constexpr bool is_zero() const { return v_ == 0; }
    std::array<std::uint8_t, kScalarSize> encode() const {
      return {static_cast<std::uint8_t>(v_ >> 8), static_cast<std::uint8_t>(v_)};
    }

    friend constexpr Scalar operator+(Scalar a, Scalar b) { return Scalar((a.v_ + b.v_) % kOrder); }
    friend constexpr Scalar operator-(Scalar a, Scalar b) { return Scalar((a.v_ + kOrder - b.v_) % kOrder); }
    friend constexpr Scalar operator*(Scalar a, Scalar b) { return Scalar((a.v_ * b.v_) % kOrder); }
    constexpr Scalar operator-() const { return Scalar((kOrder - v_) % kOrder); }
    Scalar& operator+=(Scalar o) { return *this = *this + o; }
    Scalar& operator*=(Scalar o) { return *this = *this * o; }
    /// Throws std::domain_error for zero.
    Scalar inverse() const;

    friend constexpr bool operator==(Scalar, Scalar) = default;

   private:
    constexpr explicit Scalar(std::uint32_t v) : v_(v) {}
    std::uint32_t v_ = 0;
  };

  class Element {
   public:
    constexpr Element() = default;

    static constexpr Element generator() { return Element(kGenerator); }
    static constexpr Element identity() { return Element(1); }
    static Element base(Scalar s) { return generator() * s; }
    /// Rejects residues outside the order-101 subgroup.
    static Element decode(std::span<const std::uint8_t> bytes);

    constexpr std::uint32_t residue() const { return v_; }
    std::array<std::uint8_t, kElementSize> encode() const {
      return {static_cast<std::uint8_t>(v_ >> 8), static_cast<std::uint8_t>(v_)};
    }

    friend constexpr Element operator+(Element a, Element b) { return Element((a.v_ * b.v_) % kModulus); }
    friend Element operator-(Element a, Element b);
    friend Element operator*(Element a, Scalar k);
    Element& operator+=(Element o) { return *this = *this + o; }

    friend constexpr bool operator==(Element, Element) = default;

   private:
    constexpr explicit Element(std::uint32_t v) : v_(v) {}
    std::uint32_t v_ = 1;
  };

  /// modulus^exp by square-and-multiply; exposed for tests.
  static std::uint32_t pow_mod(std::uint32_t base, std::uint64_t exp, std::uint32_t modulus);
};

static_assert(PrimeOrderGroup<ToyGroup>);

}  // namespace desklab::frost
