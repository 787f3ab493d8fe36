#pragma once

// Seeded Monte Carlo estimation of expected cost.
//
// Every trial draws from its own counter-based stream keyed by (seed,
// trial index), so results do not depend on how trials are spread over
// worker threads. Costs are summed exactly and converted once.

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "phl/exec.hpp"

namespace phl {

/// Stateless-keyed generator: the k-th draw is a mix of (key, k).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();

  /// Index into dist.entries(), by inverse CDF over the support order with
  /// a 64-bit uniform and exact rational comparison.
  template <class T>
  std::size_t sample_index(const Dist<T>& dist) {
    std::vector<Rational> masses;
    masses.reserve(dist.size());
    for (const auto& e : dist) masses.push_back(e.second);
    return pick(masses);
  }

 private:
  std::size_t pick(const std::vector<Rational>& masses);

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct TraceEntry {
  std::size_t thread;
  ExprPtr redex;
  Rational cost;
};

struct SampleResult {
  Config final;
  bool terminated = false;
  bool stuck = false;
  std::size_t steps = 0;
};

/// Follows one path of the scheduled execution for at most max_steps steps.
/// When `trace` is non-null every step is appended to it.
SampleResult sample_run(const ExprPtr& e, std::uint64_t seed, std::size_t max_steps,
                        const Scheduler& s, std::uint64_t stream = 0,
                        std::vector<TraceEntry>* trace = nullptr);

struct McReport {
  std::size_t trials = 0;
  double mean_cost = 0;
  double sample_stddev = 0;
  std::pair<double, double> ci95{0, 0};
  double truncated_fraction = 0;
  std::size_t stuck_runs = 0;
  std::uint64_t seed = 0;
  std::size_t max_steps = 0;
  /// Sum of all trial costs, exact.
  Rational total_cost;
};

/// trials >= 2. Truncated runs count with their cost so far. workers = 0
/// picks the hardware concurrency; the report does not depend on it.
McReport estimate(const ExprPtr& e, std::size_t trials, std::uint64_t seed, std::size_t max_steps,
                  const Scheduler& s, unsigned workers = 0);

}  // namespace phl
