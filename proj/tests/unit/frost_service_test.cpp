#include "doctest.h"

#include "desklab/harness/load.hpp"
#include "desklab/sut/frost_services.hpp"
#include "support/sut_fixture.hpp"

using namespace desklab;
using namespace desklab::testing;
using namespace std::chrono_literals;

TEST_CASE("one request over ideal links signs in zero virtual time") {
  const auto r = run_text(frost_yaml(3, 2, "0ms", "", "{client: cli, target: coord, rate_tps: 1, stop: 1s}"));
  CHECK(values(r, "frost.e2e_ns") == std::vector<double>{0});
  CHECK(named(r, "frost.sign_failed").empty());
  CHECK(named(r, "frost.timeout").empty());
}

TEST_CASE("end-to-end latency is four one-way delays") {
  const auto r = run_text(frost_yaml(3, 2, "10ms"));
  const auto e2e = values(r, "frost.e2e_ns");
  REQUIRE(e2e.size() == 3);
  for (double v : e2e) CHECK(v == 40e6);
  // DKG needs round 1, shares, then nonce batch and group key: four hops
  CHECK(r.scenario_start == SimTime(40ms));
}

TEST_CASE("the three-round variant costs six one-way delays") {
  const auto r = run_text(frost_yaml(5, 3, "10ms", ", rounds: 3"));
  const auto e2e = values(r, "frost.e2e_ns");
  REQUIRE(e2e.size() == 3);
  for (double v : e2e) CHECK(v == 60e6);
}

TEST_CASE("toy group works end to end") {
  const auto r = run_text(frost_yaml(5, 3, "1ms", ", group: toy"));
  CHECK(values(r, "frost.e2e_ns") == std::vector<double>{4e6, 4e6, 4e6});
}

TEST_CASE("latency does not depend on the threshold when compute is free") {
  for (std::uint32_t t : {2u, 5u, 8u}) {
    const auto r = run_text(frost_yaml(8, t, "10ms", ", group: toy", "{client: cli, target: coord, rate_tps: 2, stop: 2s}"));
    const auto e2e = values(r, "frost.e2e_ns");
    REQUIRE(e2e.size() == 4);
    for (double v : e2e) CHECK(v == 40e6);
  }
}

TEST_CASE("compute costs add to the latency") {
  auto spec = config::parse_scenario(frost_yaml(3, 2, "10ms", ", group: toy"));
  for (auto& n : spec.nodes) {
    n.compute_capacity = 1000;
    n.costs = {{"frost.sign_partial", 2}, {"frost.aggregate", 3}, {"frost.verify_partial", 1}};
  }
  const auto r = run_spec(spec);
  // 2 ms signing in parallel, two 1 ms partial checks and 3 ms aggregation
  for (double v : values(r, "frost.e2e_ns")) CHECK(v == 47e6);
}

TEST_CASE("crashing more than n-t signers makes signing time out") {
  const auto r = run_text(frost_yaml(3, 2, "10ms", "", "{client: cli, target: coord, rate_tps: 1, start: 1s, stop: 2s}",
                                     "  - {at: 0s, target: s1, kind: crash}\n  - {at: 0s, target: s2, kind: crash}\n"));
  CHECK(named(r, "frost.e2e_ns").empty());
  CHECK(values(r, "frost.coordinator_timeout") == std::vector<double>{1});
  const auto failed = named(r, "frost.sign_failed");
  REQUIRE(failed.size() == 1);
  CHECK(failed[0]->labels.at("reason") == "insufficient_signers");
  CHECK(failed[0]->labels.at("culprits") == "1,2");
}

TEST_CASE("a crashed signer is routed around after one timeout") {
  const auto r = run_text(frost_yaml(3, 2, "10ms", "", "{client: cli, target: coord, rate_tps: 1, stop: 3s}",
                                     "  - {at: 0s, target: s1, kind: crash}\n"));
  CHECK(named(r, "frost.sign_failed").size() == 1);
  CHECK(values(r, "frost.e2e_ns") == std::vector<double>{40e6, 40e6});
}

TEST_CASE("a corrupted partial is detected and its signer excluded") {
  const auto r = run_text(frost_yaml(5, 3, "10ms", "", "{client: cli, target: coord, rate_tps: 1, stop: 3s}",
                                     "  - {at: 0s, target: s2, kind: byzantine, behavior: bad-partial-sig}\n"));
  const auto failed = named(r, "frost.sign_failed");
  REQUIRE(failed.size() == 1);
  CHECK(failed[0]->labels.at("reason") == "invalid_partial");
  CHECK(failed[0]->labels.at("culprits") == "2");
  CHECK(values(r, "frost.culprit") == std::vector<double>{2});
  CHECK(values(r, "frost.e2e_ns") == std::vector<double>{40e6, 40e6});
}

TEST_CASE("a withheld partial times out and names the signer") {
  const auto r = run_text(frost_yaml(3, 2, "10ms", "", "{client: cli, target: coord, rate_tps: 1, stop: 3s}",
                                     "  - {at: 0s, target: s1, kind: byzantine, behavior: withhold-partial}\n"));
  const auto failed = named(r, "frost.sign_failed");
  REQUIRE(failed.size() == 1);
  CHECK(failed[0]->labels.at("culprits") == "1");
  CHECK(values(r, "frost.e2e_ns").size() == 2);
}

TEST_CASE("nonce caches refill so long runs keep signing") {
  const auto r = run_text(frost_yaml(3, 2, "1ms", ", group: toy, nonces: 2", "{client: cli, target: coord, rate_tps: 50, stop: 4s}"));
  CHECK(values(r, "frost.e2e_ns").size() == 200);
  CHECK(named(r, "frost.sign_failed").empty());
}

TEST_CASE("every client operation ends in exactly one terminal metric") {
  auto rng = derive_rng(77, {"frost-terminal"});
  for (int trial = 0; trial < 12; ++trial) {
    const auto n = static_cast<std::uint32_t>(2 + rng.uniform_below(5));
    const auto t = static_cast<std::uint32_t>(1 + rng.uniform_below(n));
    std::string faults;
    for (std::uint32_t i = 1; i <= n; ++i) {
      const auto roll = rng.uniform_below(6);
      const auto at = std::to_string(rng.uniform_below(3000)) + "ms";
      const auto node = "s" + std::to_string(i);
      if (roll == 0) faults += "  - {at: " + at + ", target: " + node + ", kind: crash}\n";
      if (roll == 1) faults += "  - {at: " + at + ", target: " + node + ", kind: byzantine, behavior: bad-partial-sig}\n";
      if (roll == 2) faults += "  - {at: " + at + ", target: " + node + ", kind: byzantine, behavior: withhold-partial}\n";
    }
    const auto rate = 1 + rng.uniform_below(20);
    const auto delay = std::to_string(rng.uniform_below(30)) + "ms";
    const auto yaml = frost_yaml(n, t, delay, ", group: toy",
                                 "{client: cli, target: coord, pattern: poisson, rate_tps: " + std::to_string(rate) + "}",
                                 faults, "4s");
    const auto spec = config::parse_scenario(yaml);
    const auto r = run_spec(spec);
    auto arrivals = derive_rng(spec.seed, {"rep", "0", "load", "0", "arrivals"});
    auto fees = derive_rng(spec.seed, {"rep", "0", "load", "0", "fees"});
    const auto ops = harness::generate_load(spec.loads[0], arrivals, fees).size();
    CAPTURE(yaml);
    CHECK(named(r, "frost.e2e_ns").size() + named(r, "frost.sign_failed").size() + named(r, "frost.timeout").size() == ops);
  }
}

TEST_CASE("default coordinator timeout") {
  CHECK(sut::frost_default_timeout(0ms) == 100ms);
  CHECK(sut::frost_default_timeout(50ms) == 500ms);
}
