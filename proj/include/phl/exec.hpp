#pragma once

// Thread-pool execution: one step of a chosen thread, n-step distributions
// under a scheduler, and the finite graph of canonical configurations.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phl/dist.hpp"
#include "phl/semantics.hpp"

namespace phl {

struct Config {
  /// Index 0 is the main thread.
  std::vector<ExprPtr> threads;
  Heap heap;
  Rational cost;

  static Config initial(ExprPtr program);

  /// All threads are values.
  bool terminated() const;
  std::optional<Value> main_value() const;

  std::size_t hash() const;
  friend bool operator==(const Config& a, const Config& b);
};

enum class ThreadState { Value, Reducible, Stuck };

ThreadState thread_state(const Config& c, std::size_t i);

/// Lowest-index non-value thread without a step, if any.
std::optional<std::size_t> stuck_thread(const Config& c);

/// One step of thread i. Forks are appended to the pool, the step cost is
/// added to the accumulated cost. nullopt if thread i is a value or stuck.
std::optional<Dist<Config>> tp_step(const Config& c, std::size_t i);

class Scheduler {
 public:
  enum class Policy { Leftmost, RoundRobin, Fixed };

  static Scheduler leftmost() { return Scheduler(Policy::Leftmost, {}); }
  static Scheduler round_robin() { return Scheduler(Policy::RoundRobin, {}); }
  /// Follows `order` while the named thread is reducible, leftmost otherwise.
  static Scheduler fixed(std::vector<std::size_t> order) {
    return Scheduler(Policy::Fixed, std::move(order));
  }
  /// "leftmost", "round-robin" or "fixed:i,j,...". Throws std::invalid_argument.
  static Scheduler parse(std::string_view text);

  Policy policy() const { return policy_; }
  const std::vector<std::size_t>& order() const { return order_; }
  std::string name() const;

  struct Choice {
    std::size_t thread;
    std::uint64_t next_state;
  };

  /// The scheduler is a function of the configuration and a small integer
  /// state (round-robin cursor, position in a fixed order). nullopt when no
  /// thread is reducible.
  std::optional<Choice> pick(const Config& c, std::uint64_t state) const;

 private:
  Scheduler(Policy p, std::vector<std::size_t> order) : policy_(p), order_(std::move(order)) {}

  Policy policy_;
  std::vector<std::size_t> order_;
};

inline constexpr std::size_t kDefaultMaxSupport = 1'000'000;

/// n scheduled steps by iterated bind. Configurations without a reducible
/// thread (terminated or stuck) are absorbing.
Dist<Config> tp_step_n(const Config& c, std::size_t n, const Scheduler& s,
                       std::size_t max_support = kDefaultMaxSupport);

// ---------------------------------------------------------------------------
// Configuration graph

struct GraphNode {
  std::vector<ExprPtr> threads;
  Heap heap;
  std::uint64_t sched_state = 0;
  bool terminal = false;
  bool stuck = false;

  std::optional<Value> main_value() const;
};

struct GraphEdge {
  std::size_t to;
  Rational prob;
  Rational cost;
};

struct GraphAction {
  std::size_t node;
  std::size_t thread;
  std::vector<GraphEdge> edges;
};

struct ConfigGraph {
  /// Node 0 is the initial configuration.
  std::vector<GraphNode> nodes;
  std::vector<GraphAction> actions;
  /// Indices into `actions`, per node.
  std::vector<std::vector<std::size_t>> node_actions;
  /// One action per reducible thread rather than one scheduled action.
  bool demonic = false;

  std::size_t size() const { return nodes.size(); }
};

struct ExploreLimits {
  std::size_t max_nodes = 200'000;
};

/// Breadth-first exploration from ([e], empty heap). Without a scheduler
/// every reducible thread contributes an action. Throws NodeLimitExceeded.
ConfigGraph explore_graph(const ExprPtr& e, const std::optional<Scheduler>& s,
                          const ExploreLimits& limits = {});

/// Cost reset to zero and allocation bases renumbered in first-use order:
/// threads left to right, then cells reachable from them, then the rest.
Config canonicalize(const Config& c);

}  // namespace phl

template <>
struct std::hash<phl::Config> {
  std::size_t operator()(const phl::Config& c) const { return c.hash(); }
};
