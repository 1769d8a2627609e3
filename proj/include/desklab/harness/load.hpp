#pragma once

#include <vector>

#include "desklab/common/rng.hpp"
#include "desklab/common/time.hpp"
#include "desklab/config/scenario.hpp"

namespace desklab::harness {

struct LoadArrival {
  Duration offset{0};  // from the start of the measured phase
  bool high_fee = false;
};

/// Constant: op k at start + floor(k / rate) seconds. Poisson: exponential
/// gaps drawn from `arrivals`. Each op then draws one high-fee Bernoulli from
/// `fees` (skipped when the share is 0). Only ops before `stop` are kept.
std::vector<LoadArrival> generate_load(const config::LoadSpec& load, Rng& arrivals, Rng& fees);

}  // namespace desklab::harness
