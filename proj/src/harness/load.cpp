#include "desklab/harness/load.hpp"

#include <cmath>

namespace desklab::harness {

std::vector<LoadArrival> generate_load(const config::LoadSpec& load, Rng& arrivals, Rng& fees) {
  std::vector<LoadArrival> out;
  if (!(load.rate_tps > 0)) return out;
  const auto stop = load.stop.count();
  if (load.pattern == config::LoadPattern::constant) {
    for (std::uint64_t k = 0;; ++k) {
      const auto off = load.start.count() + static_cast<std::int64_t>(std::floor(static_cast<double>(k) * 1e9 / load.rate_tps));
      if (off >= stop) break;
      out.push_back({Duration(off), false});
    }
  } else {
    double t = 0;
    while (true) {
      t += arrivals.exponential(load.rate_tps);
      const auto off = load.start.count() + static_cast<std::int64_t>(std::floor(t * 1e9));
      if (off >= stop) break;
      out.push_back({Duration(off), false});
    }
  }
  if (load.high_fee_share > 0) {
    for (auto& op : out) op.high_fee = fees.bernoulli(load.high_fee_share);
  }
  return out;
}

}  // namespace desklab::harness
