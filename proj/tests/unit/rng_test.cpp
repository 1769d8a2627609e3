#include <vector>

#include "doctest.h"
#include "desklab/common/rng.hpp"

using namespace desklab;

namespace {

std::vector<std::uint64_t> draws(Rng rng, int n) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < n; ++i) out.push_back(rng.next_u64());
  return out;
}

}  // namespace

TEST_CASE("derived streams") {
  CHECK(draws(derive_rng(42, {"link", "a->b"}), 100) == draws(derive_rng(42, {"link", "a->b"}), 100));
  CHECK(draws(derive_rng(42, {"link", "a->b"}), 100) != draws(derive_rng(42, {"link", "b->a"}), 100));
  CHECK(draws(derive_rng(42, {}), 100) != draws(derive_rng(43, {}), 100));
  // Label boundaries matter: ["ab"] is not ["a", "b"].
  CHECK(draws(derive_rng(1, {"ab"}), 4) != draws(derive_rng(1, {"a", "b"}), 4));
}

TEST_CASE("engine matches the standard's reference value") {
  Rng rng(5489);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next_u64();
  CHECK(v == 9981545732273789042ULL);
}

TEST_CASE("stream factory children are prefix paths") {
  const StreamFactory root(9, {"run"});
  auto a = root.child({"rep", "0"}).stream({"x"});
  auto b = derive_rng(9, {"run", "rep", "0", "x"});
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("draw helpers") {
  auto rng = derive_rng(3, {"helpers"});
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.uniform_int(-5, 5);
    CHECK(v >= -5);
    CHECK(v <= 5);
    const auto u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.exponential(2.0) >= 0.0);
  }
  CHECK(rng.uniform_below(1) == 0);
  CHECK_FALSE(rng.bernoulli(0.0));
  CHECK(rng.bernoulli(1.0));
}
