#include "desklab/frost/ristretto_group.hpp"

#include <algorithm>
#include <stdexcept>

#include <sodium.h>

namespace desklab::frost {
namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium initialisation failed");
}

}  // namespace

using Scalar = Ristretto255::Scalar;
using Element = Ristretto255::Element;

Scalar Scalar::from_u64(std::uint64_t v) {
  Scalar s;
  for (int i = 0; i < 8; ++i) s.b_[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return s;
}

Scalar Scalar::random(Rng& rng) {
  std::array<std::uint8_t, 64> wide{};
  rng.fill(wide);
  Scalar s;
  crypto_core_ristretto255_scalar_reduce(s.b_.data(), wide.data());
  return s;
}

Scalar Scalar::from_digest(const Digest256& d) {
  std::array<std::uint8_t, 64> wide{};
  std::reverse_copy(d.begin(), d.end(), wide.begin());
  Scalar s;
  crypto_core_ristretto255_scalar_reduce(s.b_.data(), wide.data());
  return s;
}

Scalar Scalar::decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kScalarSize) throw DecodeError("ristretto255 scalar must be 32 bytes");
  std::array<std::uint8_t, 64> wide{};
  std::copy(bytes.begin(), bytes.end(), wide.begin());
  Scalar s;
  crypto_core_ristretto255_scalar_reduce(s.b_.data(), wide.data());
  if (!std::equal(bytes.begin(), bytes.end(), s.b_.begin())) {
    throw DecodeError("ristretto255 scalar not canonical");
  }
  return s;
}

bool Scalar::is_zero() const { return sodium_is_zero(b_.data(), b_.size()) == 1; }

Scalar operator+(const Scalar& a, const Scalar& b) {
  Scalar r;
  crypto_core_ristretto255_scalar_add(r.b_.data(), a.b_.data(), b.b_.data());
  return r;
}

Scalar operator-(const Scalar& a, const Scalar& b) {
  Scalar r;
  crypto_core_ristretto255_scalar_sub(r.b_.data(), a.b_.data(), b.b_.data());
  return r;
}

Scalar operator*(const Scalar& a, const Scalar& b) {
  Scalar r;
  crypto_core_ristretto255_scalar_mul(r.b_.data(), a.b_.data(), b.b_.data());
  return r;
}

Scalar Scalar::operator-() const {
  Scalar r;
  crypto_core_ristretto255_scalar_negate(r.b_.data(), b_.data());
  return r;
}

Scalar Scalar::inverse() const {
  Scalar r;
  if (crypto_core_ristretto255_scalar_invert(r.b_.data(), b_.data()) != 0) {
    throw std::domain_error("inverse of zero scalar");
  }
  return r;
}

Element Element::generator() {
  static const Element g = base(Scalar::from_u64(1));
  return g;
}

Element Element::base(const Scalar& s) {
  ensure_sodium();
  Element e;
  // Returns -1 when the result is the identity; the output is then all zeros,
  // which is the identity's encoding.
  (void)crypto_scalarmult_ristretto255_base(e.b_.data(), s.encode().data());
  return e;
}

Element Element::decode(std::span<const std::uint8_t> bytes) {
  ensure_sodium();
  if (bytes.size() != kElementSize) throw DecodeError("ristretto255 element must be 32 bytes");
  if (crypto_core_ristretto255_is_valid_point(bytes.data()) != 1) {
    throw DecodeError("invalid ristretto255 encoding");
  }
  Element e;
  std::copy(bytes.begin(), bytes.end(), e.b_.begin());
  return e;
}

Element operator+(const Element& a, const Element& b) {
  Element r;
  if (crypto_core_ristretto255_add(r.b_.data(), a.b_.data(), b.b_.data()) != 0) {
    throw std::runtime_error("ristretto255 add on invalid input");
  }
  return r;
}

Element operator-(const Element& a, const Element& b) {
  Element r;
  if (crypto_core_ristretto255_sub(r.b_.data(), a.b_.data(), b.b_.data()) != 0) {
    throw std::runtime_error("ristretto255 sub on invalid input");
  }
  return r;
}

Element operator*(const Element& a, const Scalar& k) {
  ensure_sodium();
  Element r;
  // Returns -1 when the product is the identity; the output is then all-zero,
  // which is the identity encoding.
  if (crypto_scalarmult_ristretto255(r.b_.data(), k.encode().data(), a.b_.data()) != 0) r.b_.fill(0);
  return r;
}

}  // namespace desklab::frost
