#include <sstream>

#include "doctest.h"
#include "desklab/common/rng.hpp"
#include "desklab/metrics/metrics.hpp"

using namespace desklab;
using namespace desklab::metrics;
using namespace std::chrono_literals;

namespace {

MetricRecord rec(std::int64_t t, std::string name, Value v, Labels labels = {}) {
  return {SimTime(t), "n1", std::move(name), v, std::move(labels)};
}

}  // namespace

TEST_CASE("store") {
  MetricStore store;
  const std::vector<double> ps{50};
  CHECK(summarize(store.records(), "x", ps).count == 0);
  store.record(rec(1, "a", std::int64_t{1}));
  store.record(rec(2, "a", std::int64_t{2}));
  store.record(rec(3, "a", 3.5));
  store.record(rec(4, "b", std::int64_t{10}));
  CHECK(summarize(store.records(), "a", ps).count == 3);
  CHECK(summarize(store.records(), "b", ps).count == 1);
  CHECK(store.names() == std::set<std::string>{"a", "b"});
  CHECK_THROWS_AS(store.record(rec(5, "", std::int64_t{0})), std::invalid_argument);
  store.flush();
  CHECK_THROWS_AS(store.record(rec(5, "a", std::int64_t{0})), StoreFlushedError);
  CHECK(store.records().size() == 4);
}

TEST_CASE("nearest-rank percentiles") {
  std::vector<double> v;
  for (int i = 1; i <= 100; ++i) v.push_back(i);
  CHECK(percentile_nearest_rank(v, 50) == 50);
  CHECK(percentile_nearest_rank(v, 0) == 1);
  CHECK(percentile_nearest_rank(v, 99) == 99);
  CHECK(percentile_nearest_rank(v, 99.5) == 100);
  CHECK(percentile_nearest_rank(v, 100) == 100);
  const std::vector<double> three{10, 20, 30};
  CHECK(percentile_nearest_rank(three, 50) == 20);
  CHECK(percentile_nearest_rank(three, 34) == 20);
  CHECK(percentile_nearest_rank(three, 33) == 10);
  CHECK_THROWS(percentile_nearest_rank(std::vector<double>{}, 50));
}

TEST_CASE("ecdf") {
  const std::vector<double> v{1, 1, 2};
  const auto e = ecdf(v);
  REQUIRE(e.size() == 2);
  CHECK(e[0].first == 1);
  CHECK(e[0].second == doctest::Approx(2.0 / 3.0));
  CHECK(e[1].first == 2);
  CHECK(e[1].second == 1.0);
}

TEST_CASE("summary invariants over random samples") {
  auto rng = derive_rng(8, {"summary"});
  const std::vector<double> ps{0, 1, 25, 50, 75, 90, 99, 100};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v;
    const auto n = 1 + rng.uniform_below(300);
    for (std::uint64_t i = 0; i < n; ++i) v.push_back(static_cast<double>(rng.uniform_below(50)) * 0.5);
    const auto s = summarize(v, ps);
    CHECK(s.count == n);
    CHECK(s.min <= s.mean);
    CHECK(s.mean <= s.max);
    double prev = -1;
    for (const auto& [p, value] : s.percentiles) {
      CHECK(value >= s.min);
      CHECK(value <= s.max);
      CHECK(value >= prev);
      prev = value;
    }
    REQUIRE_FALSE(s.ecdf.empty());
    for (std::size_t i = 1; i < s.ecdf.size(); ++i) {
      CHECK(s.ecdf[i].first > s.ecdf[i - 1].first);
      CHECK(s.ecdf[i].second > s.ecdf[i - 1].second);
    }
    CHECK(s.ecdf.back().second == 1.0);
  }
}

TEST_CASE("throughput windows") {
  std::vector<MetricRecord> r;
  for (int k = 0; k < 200; ++k) r.push_back(rec(k * 50'000'000LL, "op", std::int64_t{1}));
  const auto tp = throughput(r, "op", SimTime(0), SimTime(10s), 1s);
  REQUIRE(tp.size() == 10);
  for (double w : tp) CHECK(w == 20.0);
  const auto half = throughput(r, "op", SimTime(0), SimTime(10s), 500ms);
  REQUIRE(half.size() == 20);
  CHECK(half[0] == 20.0);
  CHECK(throughput(r, "other", SimTime(0), SimTime(2s), 1s) == std::vector<double>{0, 0});
  CHECK(throughput(r, "op", SimTime(5s), SimTime(5500ms), 1s) == std::vector<double>{10});
}

TEST_CASE("csv export") {
  SUBCASE("empty store has only the header") {
    std::ostringstream out;
    write_csv(out, {});
    CHECK(out.str() == "time_ns,node,name,value,labels\n");
  }
  SUBCASE("labels with commas are quoted") {
    std::ostringstream out;
    const std::vector<MetricRecord> r{rec(5, "x", std::int64_t{7}, {{"who", "a,b"}, {"k", "v"}})};
    write_csv(out, r);
    CHECK(out.str() == "time_ns,node,name,value,labels\n5,n1,x,7,\"k=v;who=a,b\"\n");
  }
  SUBCASE("doubles stay doubles") {
    CHECK(format_value(3.0) == "3.0");
    CHECK(format_value(0.1) == "0.1");
    CHECK(format_value(std::int64_t{3}) == "3");
    CHECK(format_value(1e300) == "1e+300");
  }
}

TEST_CASE("csv and jsonl round trip") {
  auto rng = derive_rng(12, {"csv-roundtrip"});
  std::vector<MetricRecord> r;
  const char* odd[] = {"plain", "a,b", "q\"uote", "semi;colon", "eq=sign", "100%", "line\nbreak", ""};
  for (int i = 0; i < 300; ++i) {
    MetricRecord m;
    m.time = SimTime(static_cast<std::int64_t>(rng.uniform_below(1'000'000'000'000)));
    m.node = odd[rng.uniform_below(7)];
    m.name = std::string("m.") + odd[rng.uniform_below(6)];
    if (rng.bernoulli(0.5)) m.value = static_cast<std::int64_t>(rng.next_u64() >> 1) - (1LL << 62);
    else m.value = (rng.uniform01() - 0.5) * 1e6;
    for (std::uint64_t k = 0, n = rng.uniform_below(3); k < n; ++k) m.labels[odd[rng.uniform_below(8)]] = odd[rng.uniform_below(8)];
    r.push_back(m);
  }
  std::stringstream csv;
  write_csv(csv, r);
  CHECK(read_csv(csv) == r);
  std::stringstream jsonl;
  write_jsonl(jsonl, r);
  CHECK(read_jsonl(jsonl) == r);
}
