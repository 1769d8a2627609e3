#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "desklab/frost/group.hpp"

namespace desklab::frost {

/// ristretto255 (prime order 2^252 + 27742317777372353535851937790883648493),
/// backed by libsodium. Encodings are the canonical 32-byte forms.
struct Ristretto255 {
  static constexpr std::string_view kName = "ristretto255";
  static constexpr std::uint8_t kWireId = 1;
  static constexpr std::size_t kScalarSize = 32;
  static constexpr std::size_t kElementSize = 32;

  class Scalar {
   public:
    Scalar() = default;

    static Scalar from_u64(std::uint64_t v);
    static Scalar random(Rng& rng);
    static Scalar from_digest(const Digest256& d);
    static Scalar decode(std::span<const std::uint8_t> bytes);

    bool is_zero() const;
    const std::array<std::uint8_t, kScalarSize>& encode() const { return b_; }

    friend Scalar operator+(const Scalar& a, const Scalar& b);
    friend Scalar operator-(const Scalar& a, const Scalar& b);
    friend Scalar operator*(const Scalar& a, const Scalar& b);
    Scalar operator-() const;
    Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
    Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
    Scalar inverse() const;

    friend bool operator==(const Scalar&, const Scalar&) = default;

   private:
    std::array<std::uint8_t, kScalarSize> b_{};  // little-endian, reduced
  };

  class Element {
   public:
    Element() = default;  // identity

    static Element generator();
    static Element identity() { return Element(); }
    static Element base(const Scalar& s);
    static Element decode(std::span<const std::uint8_t> bytes);

    const std::array<std::uint8_t, kElementSize>& encode() const { return b_; }

    friend Element operator+(const Element& a, const Element& b);
    friend Element operator-(const Element& a, const Element& b);
    friend Element operator*(const Element& a, const Scalar& k);
    Element& operator+=(const Element& o) { return *this = *this + o; }

    friend bool operator==(const Element&, const Element&) = default;

   private:
    std::array<std::uint8_t, kElementSize> b_{};
  };
};

static_assert(PrimeOrderGroup<Ristretto255>);

}  // namespace desklab::frost
