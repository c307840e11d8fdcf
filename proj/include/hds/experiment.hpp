#ifndef HDS_EXPERIMENT_HPP
#define HDS_EXPERIMENT_HPP

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "hds/rng.hpp"
#include "hds/stats.hpp"

namespace hds {

/// Share of `samples` given to worker k out of `workers`.
constexpr std::uint64_t worker_share(std::uint64_t samples, unsigned workers, unsigned k) noexcept {
  return samples / workers + (k < samples % workers ? 1 : 0);
}

/// Splits `samples` over `workers` threads. Worker k calls
/// fn(share_k, rng) with Rng::stream(seed, k); tables are merged in worker
/// order, so the result depends only on (seed, workers, samples).
template <class Fn>
EstimateTable run_partitioned(std::uint64_t samples, unsigned workers, std::uint64_t seed, Fn fn) {
  if (workers == 0) workers = 1;
  std::vector<EstimateTable> parts(workers);
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (unsigned k = 0; k < workers; ++k) {
      const auto share = worker_share(samples, workers, k);
      if (share == 0) continue;
      threads.emplace_back([&, k, share] {
        try {
          Rng rng = Rng::stream(seed, k);
          parts[k] = fn(share, rng);
          parts[k].add_stream(seed, k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  EstimateTable out;
  for (const auto& part : parts) out = merge(out, part);
  return out;
}

}  // namespace hds

#endif  // HDS_EXPERIMENT_HPP
