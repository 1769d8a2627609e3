#include "doctest.h"

#include <map>

#include "desklab/sut/pbs.hpp"
#include "support/sut_fixture.hpp"

using namespace desklab;
using namespace desklab::sut::pbs;
using namespace desklab::testing;

namespace {

/// Exhaustive knapsack over every subset; the test oracle for small instances.
std::uint64_t best_subset_value(const std::vector<Transaction>& txs, std::uint64_t gas_limit) {
  std::uint64_t best = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << txs.size()); ++mask) {
    std::uint64_t gas = 0;
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < txs.size(); ++i) {
      if (mask >> i & 1) {
        gas += txs[i].gas;
        value += txs[i].gas * txs[i].fee_per_gas;
      }
    }
    if (gas <= gas_limit) best = std::max(best, value);
  }
  return best;
}

std::vector<Transaction> random_txs(Rng& rng, std::size_t count, bool uniform_gas) {
  std::vector<Transaction> txs;
  const auto common_gas = 1 + rng.uniform_below(50);
  for (std::size_t i = 0; i < count; ++i) {
    Transaction tx;
    tx.id = i;
    tx.gas = uniform_gas ? common_gas : 1 + rng.uniform_below(100);
    tx.fee_per_gas = 1 + rng.uniform_below(20);
    txs.push_back(tx);
  }
  // arrival order is a random permutation of ids
  for (std::size_t i = txs.size(); i > 1; --i) std::swap(txs[i - 1], txs[rng.uniform_below(i)]);
  return txs;
}

const std::string kPbs = R"(name: pbs
duration: 120s
nodes:
  - {id: client}
  - {id: builder}
  - {id: relay}
links:
  - {delay: 2ms}
services:
  - {node: client, service: pbs-client}
  - {node: builder, service: pbs-builder}
  - {node: relay, service: pbs-relay}
loads:
  - {client: client, target: builder, rate_tps: 20, high_fee_share: 0.15}
)";

}  // namespace

TEST_CASE("greedy and FIFO on the reference instance") {
  const std::vector<Transaction> arrival{{2, 50, 8, {}}, {1, 60, 10, {}}, {3, 40, 9, {}}};  // B, A, C
  const auto greedy = build_block(arrival, 100, BuildPolicy::greedy);
  CHECK(greedy.value == 960);
  CHECK(greedy.txs == std::vector<std::uint64_t>{1, 3});
  CHECK(greedy.gas_used == 100);
  CHECK(best_subset_value(arrival, 100) == 960);
  const auto fifo = build_block(arrival, 100, BuildPolicy::fifo);
  CHECK(fifo.value == 760);
  CHECK(fifo.txs == std::vector<std::uint64_t>{2, 3});
}

TEST_CASE("empty mempool builds an empty block") {
  const auto b = build_block({}, 100, BuildPolicy::greedy);
  CHECK(b.txs.empty());
  CHECK(b.value == 0);
}

TEST_CASE("greedy ties go to the lower id") {
  const std::vector<Transaction> txs{{7, 10, 5, {}}, {3, 10, 5, {}}, {5, 10, 5, {}}};
  CHECK(build_block(txs, 20, BuildPolicy::greedy).txs == std::vector<std::uint64_t>{3, 5});
}

TEST_CASE("exhaustive knapsack bounds greedy on small instances") {
  auto rng = derive_rng(5, {"pbs-knapsack"});
  for (int trial = 0; trial < 300; ++trial) {
    const auto txs = random_txs(rng, rng.uniform_below(16), rng.bernoulli(0.5));
    const auto limit = 1 + rng.uniform_below(400);
    const auto block = build_block(txs, limit, BuildPolicy::greedy);
    CHECK(block.gas_used <= limit);
    CHECK(best_subset_value(txs, limit) >= block.value);
  }
}

TEST_CASE("greedy dominates FIFO when transactions share a gas size") {
  auto rng = derive_rng(6, {"pbs-fifo"});
  for (int trial = 0; trial < 1000; ++trial) {
    const auto txs = random_txs(rng, rng.uniform_below(40), true);
    const auto limit = rng.uniform_below(2000);
    CHECK(build_block(txs, limit, BuildPolicy::greedy).value >= build_block(txs, limit, BuildPolicy::fifo).value);
  }
}

TEST_CASE("with mixed gas sizes FIFO can beat greedy") {
  // greedy takes A then cannot fit B or C; FIFO fits both
  const std::vector<Transaction> arrival{{2, 50, 9, {}}, {3, 50, 9, {}}, {1, 60, 10, {}}};
  CHECK(build_block(arrival, 100, BuildPolicy::greedy).value == 600);
  CHECK(build_block(arrival, 100, BuildPolicy::fifo).value == 900);
}

TEST_CASE("bid gate suppresses non-improving bids within a slot") {
  BidGate gate;
  CHECK(gate.offer(0, 5));
  CHECK(gate.offer(0, 9));
  CHECK_FALSE(gate.offer(0, 7));
  CHECK_FALSE(gate.offer(0, 9));
  CHECK(gate.offer(1, 3));
  CHECK_FALSE(gate.offer(2, 0));
}

TEST_CASE("mempool confirmation latency equals the link delay") {
  auto spec = config::parse_scenario(kPbs);
  spec.duration = std::chrono::seconds(61);
  spec.loads[0].stop = std::chrono::seconds(60);
  const auto r = run_spec(spec);
  const auto lat = values(r, "pbs.mempool_latency_ns");
  CHECK(lat.size() == 1200);
  CHECK(std::all_of(lat.begin(), lat.end(), [](double v) { return v == 2e6; }));
  CHECK(values(r, "pbs.confirmed").size() == 1200);
  CHECK(named(r, "pbs.tx_timeout").empty());
}

TEST_CASE("slot auction shape") {
  const auto r = run_text(kPbs);
  std::map<std::string, std::vector<double>> accepted;
  for (const auto* rec : named(r, "pbs.bid_accepted")) accepted[rec->labels.at("slot")].push_back(rec->as_double());
  CHECK(accepted.size() == 10);
  for (const auto& [slot, bids] : accepted) {
    CAPTURE(slot);
    CHECK(bids.size() > 1);
    for (std::size_t i = 1; i < bids.size(); ++i) CHECK(bids[i] > bids[i - 1]);
  }
  std::map<std::string, std::vector<double>> submitted;
  for (const auto* rec : named(r, "pbs.bids")) submitted[rec->labels.at("slot")].push_back(rec->as_double());
  for (const auto& [slot, bids] : submitted) {
    for (std::size_t i = 1; i < bids.size(); ++i) CHECK(bids[i] > bids[i - 1]);
  }
  const auto cum = values(r, "pbs.cum_value");
  REQUIRE(cum.size() == 10);
  for (std::size_t i = 1; i < cum.size(); ++i) CHECK(cum[i] >= cum[i - 1]);
  CHECK(cum.back() == total(r, "pbs.slot_value"));
  CHECK(cum.back() > 0);
}

TEST_CASE("every transaction is included, pending or a duplicate") {
  const auto r = run_text(kPbs);
  const auto received = named(r, "pbs.mempool_latency_ns").size() + named(r, "pbs.duplicate").size();
  CHECK(total(r, "pbs.included") + total(r, "pbs.pending_at_end") + total(r, "pbs.duplicate") == received);
  CHECK(received == 2400);
}

TEST_CASE("crashed builder confirms nothing and clients time out") {
  auto spec = config::parse_scenario(kPbs);
  spec.duration = std::chrono::seconds(20);
  spec.loads[0].stop = std::chrono::seconds(10);
  config::FaultSpec crash;
  crash.target = "builder";
  spec.faults = {crash};
  const auto r = run_spec(spec);
  CHECK(named(r, "pbs.mempool_latency_ns").empty());
  CHECK(values(r, "pbs.tx_timeout").size() == 200);
}

TEST_CASE("blackout window pauses confirmations") {
  auto spec = config::parse_scenario(kPbs);
  spec.duration = std::chrono::seconds(60);
  spec.services[0].params["timeout"] = "100000000000";
  spec.services[1].params["blackout_start"] = "10000000000";
  spec.services[1].params["blackout_end"] = "30000000000";
  const auto r = run_spec(spec);
  double worst = 0;
  for (double v : values(r, "pbs.mempool_latency_ns")) worst = std::max(worst, v);
  CHECK(worst >= 19.9e9);
  CHECK(values(r, "pbs.confirmed").size() == 1200);
}

TEST_CASE("relay picks the highest bid and breaks ties to the lower builder") {
  const std::string two = R"(name: two
duration: 36s
nodes:
  - {id: c0}
  - {id: c1}
  - {id: b0}
  - {id: b1}
  - {id: relay}
links:
  - {delay: 1ms}
services:
  - {node: c0, service: pbs-client, params: {fee_spread: 0}}
  - {node: c1, service: pbs-client, params: {fee_spread: 0}}
  - {node: b0, service: pbs-builder}
  - {node: b1, service: pbs-builder}
  - {node: relay, service: pbs-relay}
loads:
  - {client: c0, target: b0, rate_tps: 10}
  - {client: c1, target: b1, rate_tps: RATE}
)";
  auto tie = two;
  tie.replace(tie.find("RATE"), 4, "10");
  // the losing builder keeps its mempool, so only the first slot is a clean comparison
  CHECK(named(run_text(tie), "pbs.slot_value").at(0)->labels.at("builder") == "0");
  auto more = two;
  more.replace(more.find("RATE"), 4, "20");
  CHECK(named(run_text(more), "pbs.slot_value").at(0)->labels.at("builder") == "1");
}
