#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace rmdecon {

// Runs fn(0..count-1) on up to `workers` threads. Tasks are claimed in index
// order; the first exception thrown by any task is rethrown after all threads join.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

// splitmix64 mix of (base, index): independent per-task RNG streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

std::size_t hardware_workers();

}  // namespace rmdecon
