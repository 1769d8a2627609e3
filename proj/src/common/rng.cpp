#include "desklab/common/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "desklab/common/sha256.hpp"

namespace desklab {

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
  // 2^64 mod bound; draws at or above 2^64 - rem would bias the result.
  const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % bound + 1) % bound;
  const std::uint64_t accept_max = std::numeric_limits<std::uint64_t>::max() - rem;
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x <= accept_max) return x % bound;
  }
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
  const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == std::numeric_limits<std::uint64_t>::max()) return static_cast<std::int64_t>(next_u64());
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + uniform_below(span + 1));
}

double Rng::exponential(double rate) {
  if (!(rate > 0)) throw std::invalid_argument("exponential: rate must be positive");
  return -std::log1p(-uniform01()) / rate;
}

void Rng::fill(std::span<std::uint8_t> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t x = next_u64();
    for (int k = 0; k < 8 && i < out.size(); ++k, ++i) {
      out[i] = static_cast<std::uint8_t>(x);
      x >>= 8;
    }
  }
}

Bytes Rng::bytes(std::size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

Rng derive_rng(std::uint64_t seed, std::span<const std::string> labels) {
  Sha256 h;
  h.update("desklab-rng");
  ByteWriter w;
  w.u64(seed);
  for (const auto& label : labels) w.sized(label);
  h.update(w.view());
  const Digest256 d = h.finish();
  std::uint64_t engine_seed = 0;
  for (int i = 0; i < 8; ++i) engine_seed = (engine_seed << 8) | d[i];
  return Rng(engine_seed);
}

Rng derive_rng(std::uint64_t seed, std::initializer_list<std::string> labels) {
  return derive_rng(seed, std::span(labels.begin(), labels.size()));
}

Rng StreamFactory::stream(std::initializer_list<std::string> labels) const {
  std::vector<std::string> path = prefix_;
  path.insert(path.end(), labels.begin(), labels.end());
  return derive_rng(seed_, path);
}

StreamFactory StreamFactory::child(std::initializer_list<std::string> labels) const {
  std::vector<std::string> path = prefix_;
  path.insert(path.end(), labels.begin(), labels.end());
  return StreamFactory(seed_, std::move(path));
}

}  // namespace desklab
