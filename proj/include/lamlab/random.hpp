#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace lamlab {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Seed for trial `index` of stream `stream` under a master seed. Streams are
// split hierarchically so that trials can run in any order or in parallel.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept;

inline Rng trial_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return Rng(derive_seed(seed, stream, index));
}

double uniform(Rng& rng, double lo, double hi);
double normal(Rng& rng);
int uniform_int(Rng& rng, int lo, int hi);  // inclusive bounds

// Worker count: LAMLAB_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

// Calls body(i) for i in [0, count) on up to worker_count() threads. Bodies
// must write only to slots owned by their index. The first exception thrown
// is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

// Cooperative interruption flag checked by long-running loops.
void request_interrupt() noexcept;
bool interrupted() noexcept;
void clear_interrupt() noexcept;

}  // namespace lamlab
