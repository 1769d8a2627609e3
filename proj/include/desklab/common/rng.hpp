#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "desklab/common/bytes.hpp"

namespace desklab {

/// Deterministic random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. All derived draws are computed here rather than through
/// <random> distributions, which differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t engine_seed) : engine_(engine_seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, bound), rejection sampled. bound must be > 0.
  std::uint64_t uniform_below(std::uint64_t bound);
  /// Uniform on the closed interval [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// 53-bit uniform double on [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform01() < p; }
  /// Exponential variate with the given rate (events per unit).
  double exponential(double rate);
  void fill(std::span<std::uint8_t> out);
  Bytes bytes(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

/// Stream for (seed, labels). Identical inputs give identical streams on every
/// platform; any change to the seed or the label path gives an unrelated one.
Rng derive_rng(std::uint64_t seed, std::span<const std::string> labels);
Rng derive_rng(std::uint64_t seed, std::initializer_list<std::string> labels);

/// Seed plus a label prefix; hands out child streams so adding a consumer
/// never perturbs the others.
class StreamFactory {
 public:
  StreamFactory(std::uint64_t seed, std::vector<std::string> prefix = {})
      : seed_(seed), prefix_(std::move(prefix)) {}

  Rng stream(std::initializer_list<std::string> labels) const;
  StreamFactory child(std::initializer_list<std::string> labels) const;
  std::uint64_t seed() const { return seed_; }
  const std::vector<std::string>& prefix() const { return prefix_; }

 private:
  std::uint64_t seed_;
  std::vector<std::string> prefix_;
};

}  // namespace desklab
