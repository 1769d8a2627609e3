#include "desklab/common/sha256.hpp"

#include <stdexcept>

namespace desklab {
namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium initialisation failed");
}

}  // namespace

Sha256::Sha256() {
  ensure_sodium();
  crypto_hash_sha256_init(&state_);
}

Sha256& Sha256::update(std::span<const std::uint8_t> data) {
  crypto_hash_sha256_update(&state_, data.data(), data.size());
  return *this;
}

Sha256& Sha256::update(std::string_view s) {
  return update(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

Digest256 Sha256::finish() {
  Digest256 out{};
  crypto_hash_sha256_final(&state_, out.data());
  return out;
}

Digest256 sha256(std::span<const std::uint8_t> data) { return Sha256().update(data).finish(); }
Digest256 sha256(std::string_view s) { return Sha256().update(s).finish(); }

}  // namespace desklab
