#include "phl/mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace phl {
namespace {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix(seed ^ mix(stream ^ 0x6A09E667F3BCC909ULL))) {}

std::uint64_t CounterRng::next() { return mix(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

std::size_t CounterRng::pick(const std::vector<Rational>& masses) {
  if (masses.size() <= 1) return 0;
  // u / 2^64 < cumulative  <=>  u * den < num * 2^64
  mpz_class u;
  const std::uint64_t draw = next();
  mpz_import(u.get_mpz_t(), 1, 1, sizeof draw, 0, 0, &draw);
  mpz_class two64 = 1;
  two64 <<= 64;
  Rational cumulative;
  for (std::size_t i = 0; i + 1 < masses.size(); ++i) {
    cumulative += masses[i];
    if (u * cumulative.get_den() < cumulative.get_num() * two64) return i;
  }
  return masses.size() - 1;
}

SampleResult sample_run(const ExprPtr& e, std::uint64_t seed, std::size_t max_steps,
                        const Scheduler& s, std::uint64_t stream, std::vector<TraceEntry>* trace) {
  CounterRng rng(seed, stream);
  SampleResult r;
  r.final = Config::initial(e);
  std::uint64_t state = 0;
  while (r.steps < max_steps) {
    auto choice = s.pick(r.final, state);
    if (!choice) break;
    const ExprPtr redex = trace ? decompose(r.final.threads[choice->thread])->redex : nullptr;
    auto step = tp_step(r.final, choice->thread);
    const auto& entries = step->entries();
    Config next = entries[rng.sample_index(*step)].first;
    if (trace) trace->push_back({choice->thread, redex, next.cost - r.final.cost});
    r.final = std::move(next);
    state = choice->next_state;
    ++r.steps;
  }
  r.terminated = r.final.terminated();
  r.stuck = stuck_thread(r.final).has_value();
  return r;
}

McReport estimate(const ExprPtr& e, std::size_t trials, std::uint64_t seed, std::size_t max_steps,
                  const Scheduler& s, unsigned workers) {
  if (trials < 2) throw std::invalid_argument("estimate needs at least 2 trials");
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, trials));

  struct Partial {
    Rational sum;
    Rational sum_sq;
    std::size_t truncated = 0;
    std::size_t stuck = 0;
  };
  std::vector<Partial> parts(workers);
  auto work = [&](unsigned w) {
    Partial& p = parts[w];
    for (std::size_t t = w; t < trials; t += workers) {
      const SampleResult r = sample_run(e, seed, max_steps, s, t);
      p.sum += r.final.cost;
      p.sum_sq += r.final.cost * r.final.cost;
      if (r.stuck) {
        ++p.stuck;
      } else if (!r.terminated) {
        ++p.truncated;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();

  Partial all;
  for (const auto& p : parts) {
    all.sum += p.sum;
    all.sum_sq += p.sum_sq;
    all.truncated += p.truncated;
    all.stuck += p.stuck;
  }
  const Rational n(static_cast<unsigned long>(trials));
  const Rational mean = all.sum / n;
  const Rational variance = (all.sum_sq - all.sum * mean) / (n - 1);

  McReport r;
  r.trials = trials;
  r.seed = seed;
  r.max_steps = max_steps;
  r.total_cost = all.sum;
  r.mean_cost = to_double(mean);
  r.sample_stddev = std::sqrt(std::max(0.0, to_double(variance)));
  const double half = 1.96 * r.sample_stddev / std::sqrt(static_cast<double>(trials));
  r.ci95 = {r.mean_cost - half, r.mean_cost + half};
  r.truncated_fraction = static_cast<double>(all.truncated) / static_cast<double>(trials);
  r.stuck_runs = all.stuck;
  return r;
}

}  // namespace phl
