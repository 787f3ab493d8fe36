#include "phl/exec.hpp"

#include <charconv>
#include <stdexcept>

namespace phl {

Config Config::initial(ExprPtr program) { return Config{{std::move(program)}, Heap(), Rational(0)}; }

bool Config::terminated() const {
  for (const auto& t : threads) {
    if (!t->is_value()) return false;
  }
  return true;
}

std::optional<Value> Config::main_value() const {
  if (threads.empty() || !threads.front()->is_value()) return std::nullopt;
  return threads.front()->value();
}

std::size_t Config::hash() const {
  std::size_t h = hash_combine(heap.hash(), hash_rational(cost));
  for (const auto& t : threads) h = hash_combine(h, t->hash());
  return h;
}

bool operator==(const Config& a, const Config& b) {
  if (a.threads.size() != b.threads.size() || a.cost != b.cost) return false;
  for (std::size_t i = 0; i < a.threads.size(); ++i) {
    if (!expr_equal(a.threads[i], b.threads[i])) return false;
  }
  return a.heap == b.heap;
}

ThreadState thread_state(const Config& c, std::size_t i) {
  const ExprPtr& t = c.threads.at(i);
  if (t->is_value()) return ThreadState::Value;
  return is_reducible(t, c.heap) ? ThreadState::Reducible : ThreadState::Stuck;
}

std::optional<std::size_t> stuck_thread(const Config& c) {
  for (std::size_t i = 0; i < c.threads.size(); ++i) {
    if (thread_state(c, i) == ThreadState::Stuck) return i;
  }
  return std::nullopt;
}

std::optional<Dist<Config>> tp_step(const Config& c, std::size_t i) {
  if (i >= c.threads.size()) throw std::out_of_range("thread index out of range");
  auto step = prim_step(c.threads[i], c.heap);
  if (!step) return std::nullopt;
  return step->map([&](const StepOutcome& o) {
    Config next{c.threads, o.heap, c.cost + o.cost};
    next.threads[i] = o.reduct;
    next.threads.insert(next.threads.end(), o.forks.begin(), o.forks.end());
    return next;
  });
}

// ---------------------------------------------------------------------------
// Schedulers

Scheduler Scheduler::parse(std::string_view text) {
  if (text == "leftmost") return leftmost();
  if (text == "round-robin") return round_robin();
  constexpr std::string_view prefix = "fixed:";
  if (text.starts_with(prefix)) {
    std::vector<std::size_t> order;
    std::string_view rest = text.substr(prefix.size());
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      std::size_t idx = 0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), idx);
      if (ec != std::errc() || ptr != item.data() + item.size() || item.empty()) {
        throw std::invalid_argument("bad thread index '" + std::string(item) + "' in scheduler");
      }
      order.push_back(idx);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (order.empty()) throw std::invalid_argument("fixed scheduler needs at least one index");
    return fixed(std::move(order));
  }
  throw std::invalid_argument("unknown scheduler '" + std::string(text) +
                              "' (expected leftmost, round-robin or fixed:i,j,...)");
}

std::string Scheduler::name() const {
  switch (policy_) {
    case Policy::Leftmost: return "leftmost";
    case Policy::RoundRobin: return "round-robin";
    case Policy::Fixed: {
      std::string s = "fixed:";
      for (std::size_t i = 0; i < order_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(order_[i]);
      }
      return s;
    }
  }
  return "?";
}

std::optional<Scheduler::Choice> Scheduler::pick(const Config& c, std::uint64_t state) const {
  const std::size_t n = c.threads.size();
  auto reducible = [&](std::size_t i) {
    return i < n && thread_state(c, i) == ThreadState::Reducible;
  };
  auto leftmost_from = [&](std::size_t start) -> std::optional<std::size_t> {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = (start + k) % n;
      if (reducible(i)) return i;
    }
    return std::nullopt;
  };

  switch (policy_) {
    case Policy::Leftmost: {
      auto i = leftmost_from(0);
      if (!i) return std::nullopt;
      return Choice{*i, 0};
    }
    case Policy::RoundRobin: {
      auto i = leftmost_from(static_cast<std::size_t>(state % n));
      if (!i) return std::nullopt;
      return Choice{*i, (*i + 1) % n};
    }
    case Policy::Fixed: {
      const std::uint64_t next = state < order_.size() ? state + 1 : state;
      if (state < order_.size() && reducible(order_[state])) return Choice{order_[state], next};
      auto i = leftmost_from(0);
      if (!i) return std::nullopt;
      return Choice{*i, next};
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// n-step distribution

namespace {

struct Scheduled {
  Config config;
  std::uint64_t state = 0;

  friend bool operator==(const Scheduled& a, const Scheduled& b) {
    return a.state == b.state && a.config == b.config;
  }
};

}  // namespace
}  // namespace phl

template <>
struct std::hash<phl::Scheduled> {
  std::size_t operator()(const phl::Scheduled& s) const {
    return phl::hash_combine(s.config.hash(), s.state);
  }
};

namespace phl {

Dist<Config> tp_step_n(const Config& c, std::size_t n, const Scheduler& s, std::size_t max_support) {
  auto cur = Dist<Scheduled>::dirac(Scheduled{c, 0});
  for (std::size_t k = 0; k < n; ++k) {
    bool moved = false;
    cur = cur.bind([&](const Scheduled& x) {
      auto choice = s.pick(x.config, x.state);
      if (!choice) return Dist<Scheduled>::dirac(x);
      moved = true;
      auto step = tp_step(x.config, choice->thread);
      return step->map([&](const Config& y) { return Scheduled{y, choice->next_state}; });
    });
    if (cur.size() > max_support) throw SupportLimitExceeded(max_support);
    if (!moved) break;
  }
  return cur.map([](const Scheduled& x) { return x.config; });
}

}  // namespace phl
