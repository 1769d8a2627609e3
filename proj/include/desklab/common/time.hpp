#pragma once

#include <chrono>
#include <cstdint>

namespace desklab {

/// Virtual time and durations share one representation: integer nanoseconds
/// since the start of a run.
using Duration = std::chrono::nanoseconds;
using SimTime = std::chrono::nanoseconds;

constexpr std::int64_t kNanosPerSecond = 1'000'000'000;

inline double to_seconds(Duration d) { return static_cast<double>(d.count()) / 1e9; }

}  // namespace desklab
