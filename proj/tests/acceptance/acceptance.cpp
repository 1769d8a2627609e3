// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "desklab/common/rng.hpp"
#include "desklab/config/scenario.hpp"
#include "desklab/frost/frost.hpp"
#include "desklab/frost/ristretto_group.hpp"
#include "desklab/frost/toy_group.hpp"
#include "desklab/net/simulator.hpp"
#include "desklab/sut/pbs.hpp"
#include "support/frost_fixture.hpp"
#include "support/spec_gen.hpp"
#include "support/sut_fixture.hpp"

using namespace desklab;
using namespace desklab::testing;
using namespace std::chrono_literals;
using Strong = frost::Ristretto255;
using Toy = frost::ToyGroup;

namespace {

namespace fs = std::filesystem;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Bytes random_message(Rng& rng) {
  Bytes m(1 + rng.uniform_below(64));
  rng.fill(m);
  return m;
}

// 1 -------------------------------------------------------------------------

std::string frost_correctness() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::pair<std::uint32_t, std::uint32_t>> configs{{3, 2}, {5, 3}, {8, 5}, {32, 16}};
  int signatures = 0;
  for (const auto& [n, t] : configs) {
    const auto dkg = run_dkg<Strong>(n, t, 1000 + n);
    const auto& group_key = dkg.keys.front().public_package.group_key;
    for (const auto& k : dkg.keys) expect(k.public_package.group_key == group_key, "group keys disagree");
    auto rng = derive_rng(7, {"acceptance", "correctness", std::to_string(n)});
    for (int sample = 0; sample < 20; ++sample) {
      const auto size = t + static_cast<std::uint32_t>(rng.uniform_below(n - t + 1));
      const auto subset = random_subset(n, size, rng);
      const auto msg = random_message(rng);
      const auto sig = sign_with(dkg, subset, msg, rng);
      expect(frost::verify<Strong>(group_key, msg, sig),
             "signature from " + std::to_string(size) + " of (" + std::to_string(n) + "," + std::to_string(t) + ") did not verify");
      Bytes other = msg;
      other[0] ^= 1;
      expect(!frost::verify<Strong>(group_key, other, sig), "signature verified for a different message");
      ++signatures;
    }
  }
  const double elapsed = seconds_since(start);
  expect(elapsed < 60, "took " + fmt(elapsed) + " s");
  return std::to_string(signatures) + " signatures over 4 configs verified in " + fmt(std::round(elapsed * 10) / 10) + " s";
}

// 2 -------------------------------------------------------------------------

std::string threshold_soundness() {
  auto rng = derive_rng(11, {"acceptance", "soundness"});
  int reproduced = 0;
  int control = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 3 + static_cast<std::uint32_t>(rng.uniform_below(3));
    const auto t = 2 + static_cast<std::uint32_t>(rng.uniform_below(n - 1));
    const auto dkg = run_dkg<Strong>(n, t, 50'000 + static_cast<std::uint64_t>(trial));
    const auto secret = dkg.group_secret();
    if (interpolate_secret(dkg.keys, random_subset(n, t - 1, rng)) == secret) ++reproduced;
    if (interpolate_secret(dkg.keys, random_subset(n, t, rng)) == secret) ++control;
  }
  expect(control == 1000, "t shares reproduced the secret in only " + std::to_string(control) + " of 1000 trials");
  expect(reproduced == 0, "t-1 shares reproduced the secret in " + std::to_string(reproduced) + " trials");
  return "t-1 shares reproduced the secret in 0 of 1000 trials (t shares: 1000 of 1000)";
}

// 3 -------------------------------------------------------------------------

std::string byzantine_detection() {
  const std::vector<std::pair<std::uint32_t, std::uint32_t>> configs{{3, 2}, {5, 3}, {7, 4}, {8, 5}};
  std::vector<DkgOutcome<Strong>> dkgs;
  for (const auto& [n, t] : configs) dkgs.push_back(run_dkg<Strong>(n, t, 300 + n));
  auto rng = derive_rng(13, {"acceptance", "byzantine"});
  int named_exactly = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto& dkg = dkgs[static_cast<std::size_t>(trial) % dkgs.size()];
    const auto& pub = dkg.keys.front().public_package;
    const auto size = pub.t + static_cast<std::uint32_t>(rng.uniform_below(pub.n - pub.t + 1));
    const auto subset = random_subset(pub.n, size, rng);
    const auto bad = subset[rng.uniform_below(subset.size())];

    std::vector<frost::NoncePair<Strong>> nonces;
    std::vector<frost::CommitmentEntry<Strong>> entries;
    for (auto i : subset) {
      nonces.push_back(frost::NoncePair<Strong>::generate(0, rng));
      entries.push_back({i, nonces.back().commitment.hiding, nonces.back().commitment.binding});
    }
    const auto pkg = frost::make_signing_package<Strong>(random_message(rng), entries, pub.t);
    std::vector<frost::PartialSignature<Strong>> partials;
    for (std::size_t k = 0; k < subset.size(); ++k) {
      const auto behavior = subset[k] == bad ? frost::SignerBehavior::bad_partial_sig : frost::SignerBehavior::honest;
      partials.push_back(frost::sign_partial<Strong>(dkg.keys[subset[k] - 1], pkg, nonces[k], behavior));
    }
    try {
      (void)frost::aggregate<Strong>(pkg, partials, pub);
    } catch (const frost::ProtocolError& e) {
      if (e.kind() == frost::ProtocolError::Kind::invalid_partial && e.culprits() == std::vector<frost::Index>{bad}) ++named_exactly;
    }
  }
  expect(named_exactly == 100, "culprit named exactly in " + std::to_string(named_exactly) + " of 100 trials");
  return "aggregate aborted naming exactly the injected signer in 100 of 100 trials";
}

// 4 -------------------------------------------------------------------------

std::vector<std::uint32_t> residues(const std::vector<Toy::Element>& es) {
  std::vector<std::uint32_t> out;
  for (const auto& e : es) out.push_back(e.residue());
  return out;
}

// Frozen values from tests/oracles/frost_toy_oracle.py.
std::string toy_kats() {
  expect(Toy::pow_mod(64, 5, 607) == 100, "64^5 mod 607");
  const auto secret = Toy::Scalar::from_u64(5);
  const auto y = Toy::Element::base(secret);
  expect(y.residue() == 100, "single-party public key");
  auto single_rng = derive_rng(42, {"kat", "single"});
  const auto single = frost::sign_single<Toy>(secret, to_bytes("test"), single_rng);
  expect(frost::verify<Toy>(y, to_bytes("test"), single), "single-party signature");

  const auto dkg = run_dkg<Toy>(3, 2, 42, "desklab-kat");
  expect(residues(dkg.participants[0].broadcast().commitment) == std::vector<std::uint32_t>{7, 172}, "participant 1 commitment");
  expect(dkg.participants[0].broadcast().proof_mu.value() == 3, "participant 1 proof");
  expect(dkg.participants[1].share_for(1).value() == 64, "share from 2 to 1");
  expect(dkg.keys[0].secret_share.value() == 91 && dkg.keys[1].secret_share.value() == 65 && dkg.keys[2].secret_share.value() == 39,
         "secret shares");
  for (const auto& k : dkg.keys) {
    expect(k.public_package.group_key.residue() == 348, "group key");
    expect(residues(k.public_package.verification_shares) == std::vector<std::uint32_t>{137, 565, 580}, "verification shares");
  }

  std::vector<frost::NoncePair<Toy>> nonces;
  std::vector<frost::CommitmentEntry<Toy>> entries;
  for (frost::Index i = 1; i <= 2; ++i) {
    auto rng = derive_rng(42, {"frost", "nonce", std::to_string(i)});
    nonces.push_back(frost::NoncePair<Toy>::generate(0, rng));
    entries.push_back({i, nonces.back().commitment.hiding, nonces.back().commitment.binding});
  }
  const auto pkg = frost::make_signing_package<Toy>(to_bytes("test"), entries, 2);
  std::vector<frost::PartialSignature<Toy>> partials;
  for (frost::Index i = 1; i <= 2; ++i) partials.push_back(frost::sign_partial<Toy>(dkg.keys[i - 1], pkg, nonces[i - 1]));
  const auto sig = frost::aggregate<Toy>(pkg, partials, dkg.keys[0].public_package);
  expect(sig.r.residue() == 339 && sig.z.value() == 76, "aggregate signature");
  expect(frost::verify<Toy>(dkg.keys[0].public_package.group_key, pkg.message, sig), "aggregate verifies");
  return "seeded (3,2) transcript matches the oracle; 64^5 mod 607 = 100";
}

// 5 -------------------------------------------------------------------------

std::string latency_exactness() {
  const auto small = run_text(frost_yaml(3, 2, "10ms"));
  const auto e2e = values(small, "frost.e2e_ns");
  expect(e2e.size() == 3, "expected 3 signatures, got " + std::to_string(e2e.size()));
  for (double v : e2e) expect(v == 40e6, "(3,2) end-to-end latency " + fmt(v));

  std::vector<double> reference;
  for (std::uint32_t t : {8u, 16u, 24u}) {
    const auto r = run_text(frost_yaml(32, t, "10ms", "", "{client: cli, target: coord, rate_tps: 1, stop: 2s}", "", "3s"));
    const auto lat = values(r, "frost.e2e_ns");
    expect(lat.size() == 2, "n=32 t=" + std::to_string(t) + ": " + std::to_string(lat.size()) + " signatures");
    for (double v : lat) expect(v == 40e6, "n=32 t=" + std::to_string(t) + " latency " + fmt(v));
    if (reference.empty()) reference = lat;
    expect(lat == reference, "latency differs at t=" + std::to_string(t));
  }
  return "end-to-end latency 40 ms exactly at d=10 ms; identical for t in {8,16,24} at n=32";
}

// 6 -------------------------------------------------------------------------

config::LinkSpec make_link(Duration delay) {
  config::LinkSpec l;
  l.delay = delay;
  return l;
}

std::string network_emulator() {
  {
    net::Simulator sim({"a", "b"}, {make_link(10ms)}, StreamFactory(1));
    bool exact = true;
    std::uint64_t got = 0;
    sim.on_delivery([&](const net::Envelope& e) {
      ++got;
      exact = exact && sim.now() - e.send_time == SimTime(10ms) && e.deliver_time == sim.now();
    });
    for (int i = 0; i < 1000; ++i) {
      sim.schedule(SimTime(std::chrono::microseconds(137 * i)), net::Priority::external, 0, [&sim] { sim.send(0, 1, {}, 100); });
    }
    const auto stats = sim.run_until(SimTime(1s));
    expect(got == 1000 && exact, "configured delay not reproduced exactly");
    expect(stats.sent == stats.delivered + stats.dropped, "conservation on the delay run");
  }

  std::uint64_t dropped = 0;
  {
    auto l = make_link(1ms);
    l.loss_prob = 0.1;
    net::Simulator sim({"a", "b"}, {l}, StreamFactory(42));
    for (int i = 0; i < 10'000; ++i) sim.send(0, 1, {}, 1);
    const auto stats = sim.run_until(SimTime(1s));
    dropped = stats.dropped;
    const double sigma = std::sqrt(10'000 * 0.1 * 0.9);
    expect(std::abs(static_cast<double>(dropped) - 1000) <= 3 * sigma, "dropped " + std::to_string(dropped) + " of 10000");
    expect(stats.sent == stats.delivered + stats.dropped, "conservation on the loss run");
  }

  auto rng = derive_rng(17, {"acceptance", "net"});
  for (int run = 0; run < 50; ++run) {
    std::vector<config::LinkSpec> links;
    for (int k = 0; k < 3; ++k) {
      auto l = make_link(Duration(static_cast<std::int64_t>(rng.uniform_below(20'000'000))));
      l.match.src = k == 0 ? std::string(config::kWildcard) : "n" + std::to_string(rng.uniform_below(4));
      l.jitter = Duration(static_cast<std::int64_t>(rng.uniform_below(static_cast<std::uint64_t>(l.delay.count()) + 1)));
      l.jitter_dist = rng.bernoulli(0.5) ? config::JitterDist::uniform : config::JitterDist::none;
      l.loss_prob = rng.uniform01() * 0.5;
      l.reorder_prob = rng.uniform01() * 0.3;
      l.rate_bps = rng.bernoulli(0.5) ? 0 : 1'000'000 + rng.uniform_below(100'000'000);
      l.queue_limit = static_cast<std::uint32_t>(rng.uniform_below(20));
      links.push_back(l);
    }
    net::Simulator sim({"n0", "n1", "n2", "n3"}, links, StreamFactory(static_cast<std::uint64_t>(run)));
    for (int i = 0; i < 500; ++i) {
      const auto src = static_cast<net::NodeId>(rng.uniform_below(4));
      const auto dst = static_cast<net::NodeId>((src + 1 + rng.uniform_below(3)) % 4);
      const auto size = static_cast<std::uint32_t>(1 + rng.uniform_below(1500));
      sim.schedule(SimTime(Duration(static_cast<std::int64_t>(rng.uniform_below(1'000'000'000)))), net::Priority::external, src,
                   [&sim, src, dst, size] { sim.send(src, dst, {}, size); });
    }
    const auto stats = sim.run_until(SimTime(100s));
    expect(stats.sent == 500 && stats.sent == stats.delivered + stats.dropped,
           "run " + std::to_string(run) + ": sent " + std::to_string(stats.sent) + " delivered " + std::to_string(stats.delivered) +
               " dropped " + std::to_string(stats.dropped));
  }
  return "delay exact over 1000 packets; dropped " + std::to_string(dropped) +
         " of 10000 at p=0.1 (1000 +/- 90); sent = delivered + dropped on 52 runs";
}

// 7 -------------------------------------------------------------------------

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  expect(static_cast<bool>(in), "cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

nlohmann::json summary_of(const harness::RepResult& r) {
  auto meta = nlohmann::json::parse(read_file(r.dir / "meta.json"));
  meta.erase("wall_time_ms");
  return meta;
}

std::string determinism(const fs::path& scratch) {
  const fs::path dir(DESKLAB_SCENARIO_DIR);
  std::vector<config::ScenarioSpec> specs;
  specs.push_back(config::parse_scenario(read_file(dir / "frost_smoke.yaml"), "frost_smoke.yaml"));
  specs.push_back(config::parse_scenario(read_file(dir / "pbs_mev.yaml"), "pbs_mev.yaml"));
  specs.push_back(config::expand_campaign(config::parse_campaign(read_file(dir / "chain.yaml"), "chain.yaml")).front());

  std::vector<std::string> checked;
  for (const auto& spec : specs) {
    std::vector<harness::RepResult> runs;
    for (const char* side : {"a", "b"}) {
      harness::RunOptions opts;
      opts.output_root = scratch / side;
      runs.push_back(harness::run_repetition(spec, 0, sut::builtin_factory(), opts));
    }
    const auto csv_a = read_file(runs[0].dir / "metrics.csv");
    const auto csv_b = read_file(runs[1].dir / "metrics.csv");
    expect(runs[0].dir != runs[1].dir, "runs wrote to the same directory");
    expect(!runs[0].records.empty(), spec.name + " produced no metrics");
    expect(csv_a == csv_b, spec.name + ": metrics.csv differs");
    expect(summary_of(runs[0]) == summary_of(runs[1]), spec.name + ": meta.json summaries differ");
    checked.push_back(spec.name + " (" + std::to_string(runs[0].records.size()) + " records)");
  }
  std::string out = "byte-identical metrics.csv and equal summaries for";
  for (const auto& c : checked) out += " " + c;
  return out;
}

// 8 -------------------------------------------------------------------------

std::uint64_t best_subset_value(const std::vector<sut::pbs::Transaction>& txs, std::uint64_t gas_limit) {
  std::uint64_t best = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << txs.size()); ++mask) {
    std::uint64_t gas = 0;
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < txs.size(); ++i) {
      if (mask >> i & 1) {
        gas += txs[i].gas;
        value += txs[i].value();
      }
    }
    if (gas <= gas_limit) best = std::max(best, value);
  }
  return best;
}

// Mempools as the client service generates them: one gas size per
// transaction, fee = floor(base * (1 + spread * u)) with a 15% high-fee share.
std::vector<sut::pbs::Transaction> client_mempool(Rng& rng, std::uint64_t gas) {
  std::vector<sut::pbs::Transaction> txs(1 + rng.uniform_below(60));
  const auto base_fee = 1 + rng.uniform_below(30);
  for (std::size_t i = 0; i < txs.size(); ++i) {
    auto& tx = txs[i];
    tx.id = i;
    tx.gas = gas;
    const double base = std::floor(static_cast<double>(base_fee) * (1 + rng.uniform01()));
    const double multiplier = rng.bernoulli(0.15) ? 5 : 1;
    tx.fee_per_gas = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(base * multiplier)));
    tx.arrival = SimTime(Duration(static_cast<std::int64_t>(i)));
  }
  return txs;
}

std::string pbs_mev() {
  const std::string yaml = R"(name: pbs
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
  - {client: client, target: builder, pattern: poisson, rate_tps: 20, high_fee_share: 0.15, high_fee_multiplier: 5}
)";
  const auto r = run_text(yaml);
  std::map<std::string, std::vector<double>> accepted;
  for (const auto* rec : named(r, "pbs.bid_accepted")) accepted[rec->labels.at("slot")].push_back(rec->as_double());
  expect(accepted.size() == 10, std::to_string(accepted.size()) + " slots with accepted bids");
  for (const auto& [slot, bids] : accepted) {
    for (std::size_t i = 1; i < bids.size(); ++i) expect(bids[i] > bids[i - 1], "slot " + slot + ": accepted bids not increasing");
  }
  const auto cum = values(r, "pbs.cum_value");
  expect(cum.size() == 10, std::to_string(cum.size()) + " cumulative value samples");
  for (std::size_t i = 1; i < cum.size(); ++i) expect(cum[i] >= cum[i - 1], "cumulative value decreased");

  auto rng = derive_rng(19, {"acceptance", "pbs"});
  for (int trial = 0; trial < 1000; ++trial) {
    const auto gas = 1 + rng.uniform_below(50'000);
    const auto txs = client_mempool(rng, gas);
    const auto limit = gas * rng.uniform_below(txs.size() + 5);
    const auto greedy = build_block(txs, limit, sut::pbs::BuildPolicy::greedy).value;
    const auto fifo = build_block(txs, limit, sut::pbs::BuildPolicy::fifo).value;
    expect(greedy >= fifo, "greedy " + std::to_string(greedy) + " < FIFO " + std::to_string(fifo) + " in trial " + std::to_string(trial));
  }
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<sut::pbs::Transaction> txs(rng.uniform_below(16));
    for (std::size_t i = 0; i < txs.size(); ++i) {
      txs[i].id = i;
      txs[i].gas = 1 + rng.uniform_below(100);
      txs[i].fee_per_gas = 1 + rng.uniform_below(20);
    }
    const auto limit = rng.uniform_below(600);
    const auto greedy = build_block(txs, limit, sut::pbs::BuildPolicy::greedy).value;
    const auto best = best_subset_value(txs, limit);
    expect(best >= greedy, "knapsack " + std::to_string(best) + " < greedy " + std::to_string(greedy));
  }
  return "10 slots with strictly increasing accepted bids, cumulative value non-decreasing (final " + fmt(cum.back()) +
         "); greedy >= FIFO on 1000 client-model instances; knapsack >= greedy on 1000 instances of <= 15 txs";
}

// 9 -------------------------------------------------------------------------

std::string relay_chain() {
  const auto below = run_text(chain_yaml(1, "400", 1, "100", "20s", "25s"));
  const auto offered = values(below, "chain.tx_accepted").size();
  expect(offered == 2000, "offered " + std::to_string(offered));
  expect(total(below, "chain.block_size") == 2000, "below capacity committed " + fmt(total(below, "chain.block_size")) + " of 2000");

  const auto above = run_text(chain_yaml(1, "50", 1, "100", "20s", "20s"));
  const double committed = total(above, "chain.block_size");
  const auto sizes = values(above, "chain.block_size");
  expect(sizes.size() >= 19, std::to_string(sizes.size()) + " blocks under overload");
  // relay capacity 50 tx/s and 1 s blocks
  for (double v : sizes) expect(v == 50, "block of " + fmt(v) + " under overload");
  const auto queue = values(above, "chain.relay_queue");
  expect(queue.size() >= 190, "too few queue samples");
  for (std::size_t i = 1; i < queue.size(); ++i) expect(queue[i] >= queue[i - 1], "relay queue shrank under overload");

  const auto a = run_text(chain_yaml(2, "400", 4, "25", "30s", "35s"));
  const auto b = run_text(chain_yaml(2, "800", 4, "25", "30s", "35s"));
  expect(total(a, "chain.block_size") == 3000 && total(b, "chain.block_size") == 3000, "doubling changed committed totals");
  const auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); };
  const auto ta = values(a, "chain.block_time_ns");
  const auto tb = values(b, "chain.block_time_ns");
  expect(ta.size() == tb.size(), "doubling changed the block count");
  expect(std::abs(mean(ta) - mean(tb)) < 1.0, "doubling changed the mean block time");
  return "2000 of 2000 committed below capacity; every block at relay capacity under overload (" + fmt(committed) + " over " +
         std::to_string(sizes.size()) + " blocks) with a monotone queue (" + fmt(queue.back()) +
         " at end); doubling capacity at half load leaves totals and mean block time unchanged";
}

// 10 ------------------------------------------------------------------------

std::string config_and_campaigns(std::chrono::steady_clock::time_point binary_start) {
  auto rng = derive_rng(23, {"acceptance", "config"});
  for (int trial = 0; trial < 300; ++trial) {
    const auto spec = random_spec(rng);
    config::validate(spec);
    const auto text = config::serialize(spec);
    const auto back = config::parse_scenario(text);
    expect(back == spec, "round trip changed spec " + std::to_string(trial));
    expect(config::serialize(back) == text, "serialization not stable for spec " + std::to_string(trial));
  }

  const std::string base = read_file(fs::path(DESKLAB_SCENARIO_DIR) / "frost_smoke.yaml");
  const auto reference = config::parse_scenario(base);
  std::size_t campaigns = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto seeds = 1 + rng.uniform_below(4);
    const auto reps = 1 + rng.uniform_below(3);
    const auto delays = 1 + rng.uniform_below(3);
    std::string doc = base + "sweeps:\n  - {path: seed, values: [";
    for (std::uint64_t k = 0; k < seeds; ++k) doc += (k ? ", " : "") + std::to_string(k + 1);
    doc += "]}\n  - {path: repetitions, values: [";
    for (std::uint64_t k = 0; k < reps; ++k) doc += (k ? ", " : "") + std::to_string(k + 1);
    doc += "]}\n  - {path: links.0.delay, values: [";
    for (std::uint64_t k = 0; k < delays; ++k) doc += (k ? ", " : "") + std::to_string(k * 5) + "ms";
    doc += "]}\n";
    const auto campaign = config::parse_campaign(doc);
    const auto out = config::expand_campaign(campaign);
    expect(out.size() == seeds * reps * delays, "campaign expanded to " + std::to_string(out.size()));
    std::set<std::string> names;
    std::uint64_t runs = 0;
    for (const auto& s : out) {
      names.insert(s.name);
      runs += s.repetitions;
      expect(s.nodes == reference.nodes && s.services == reference.services, "expansion altered unswept fields");
    }
    expect(names.size() == out.size(), "expanded scenario names collide");
    expect(runs == seeds * delays * reps * (reps + 1) / 2, "repetition count " + std::to_string(runs));
    const auto back = config::parse_campaign(config::serialize(campaign));
    expect(back.base == campaign.base && back.sweeps == campaign.sweeps, "campaign round trip");
    ++campaigns;
  }
  const double elapsed = seconds_since(binary_start);
  expect(elapsed < 300, "acceptance run took " + fmt(elapsed) + " s");
  return "300 specs round-trip; " + std::to_string(campaigns) + " campaigns expand to the exact sweep product; acceptance wall time " +
         fmt(std::round(elapsed)) + " s (suite total in test_output.txt)";
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  const auto scratch = fs::temp_directory_path() / ("desklab-acceptance-" + std::to_string(start.time_since_epoch().count()));

  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria{
      {"FROST correctness", frost_correctness},
      {"threshold soundness", threshold_soundness},
      {"byzantine detection", byzantine_detection},
      {"toy-group known answers", toy_kats},
      {"latency exactness", latency_exactness},
      {"network emulator", network_emulator},
      {"determinism", [&] { return determinism(scratch); }},
      {"PBS auction and block building", pbs_mev},
      {"relay chain", relay_chain},
      {"config round trip and campaign expansion", [&] { return config_and_campaigns(start); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [title, check] = criteria[i];
    std::string status = "PASS";
    std::string detail;
    try {
      detail = check();
    } catch (const std::exception& e) {
      status = "FAIL";
      detail = e.what();
      ++failed;
    }
    std::cout << status << " " << i + 1 << " " << title << ": " << detail << std::endl;
  }
  std::error_code ec;
  fs::remove_all(scratch, ec);
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
