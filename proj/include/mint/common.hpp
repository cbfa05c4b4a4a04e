#pragma once

#include <cstdint>
#include <cstddef>
#include <functional>

namespace mint {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

// Derives a deterministic per-(position, base station) RNG seed from the run
// seed. Frame generation uses one mt19937_64 stream per pair, so results do
// not depend on thread scheduling.
std::uint64_t substream_seed(std::uint64_t seed, std::int64_t position_index,
                             std::int64_t bs_id);

// Runs fn(i) for i in [0, n) on up to hardware_concurrency() threads.
// fn must write only to disjoint slots; iteration order is unspecified.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace mint
