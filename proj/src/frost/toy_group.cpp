#include "desklab/frost/toy_group.hpp"

#include <stdexcept>

namespace desklab::frost {

std::uint32_t ToyGroup::pow_mod(std::uint32_t base, std::uint64_t exp, std::uint32_t modulus) {
  std::uint64_t result = 1 % modulus;
  std::uint64_t b = base % modulus;
  while (exp > 0) {
    if (exp & 1) result = result * b % modulus;
    b = b * b % modulus;
    exp >>= 1;
  }
  return static_cast<std::uint32_t>(result);
}

ToyGroup::Scalar ToyGroup::Scalar::from_digest(const Digest256& d) {
  std::uint32_t acc = 0;
  for (auto byte : d) acc = (acc * 256 + byte) % kOrder;
  return Scalar(acc);
}

ToyGroup::Scalar ToyGroup::Scalar::decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kScalarSize) throw DecodeError("toy scalar must be 2 bytes");
  const std::uint32_t v = (static_cast<std::uint32_t>(bytes[0]) << 8) | bytes[1];
  if (v >= kOrder) throw DecodeError("toy scalar not reduced mod 101");
  return Scalar(v);
}

ToyGroup::Scalar ToyGroup::Scalar::inverse() const {
  if (v_ == 0) throw std::domain_error("inverse of zero scalar");
  // q is prime: x^(q-2) = x^-1.
  return Scalar(pow_mod(v_, kOrder - 2, kOrder));
}

ToyGroup::Element ToyGroup::Element::decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kElementSize) throw DecodeError("toy element must be 2 bytes");
  const std::uint32_t v = (static_cast<std::uint32_t>(bytes[0]) << 8) | bytes[1];
  if (v == 0 || v >= kModulus || pow_mod(v, kOrder, kModulus) != 1) {
    throw DecodeError("toy element not in the order-101 subgroup");
  }
  return Element(v);
}

ToyGroup::Element operator-(ToyGroup::Element a, ToyGroup::Element b) {
  // b^-1 = b^(q-1) inside a subgroup of order q.
  const auto inv = ToyGroup::pow_mod(b.v_, ToyGroup::kOrder - 1, ToyGroup::kModulus);
  return ToyGroup::Element(a.v_ * inv % ToyGroup::kModulus);
}

ToyGroup::Element operator*(ToyGroup::Element a, ToyGroup::Scalar k) {
  return ToyGroup::Element(ToyGroup::pow_mod(a.v_, k.value(), ToyGroup::kModulus));
}

}  // namespace desklab::frost
