#pragma once

#include <cstddef>
#include <functional>

namespace gauss_ad {

// Worker budget: hardware concurrency, capped by GAUSS_AD_THREADS when set.
std::size_t worker_count();

// Runs body(i) for i in [0, n) over at most worker_count() threads. Each index
// is processed exactly once; the first exception thrown is rethrown after all
// workers have joined.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace gauss_ad
