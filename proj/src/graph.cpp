#include <deque>
#include <unordered_map>

#include "phl/error.hpp"
#include "phl/exec.hpp"

namespace phl {

std::optional<Value> GraphNode::main_value() const {
  if (threads.empty() || !threads.front()->is_value()) return std::nullopt;
  return threads.front()->value();
}

Config canonicalize(const Config& c) {
  std::map<std::uint64_t, std::uint64_t> renaming;
  std::deque<std::uint64_t> pending;
  auto note = [&](Loc l) {
    if (renaming.emplace(l.base, renaming.size()).second) pending.push_back(l.base);
  };
  for (const auto& t : c.threads) visit_locs(t, note);

  const auto& cells = c.heap.cells();
  auto scan_base = [&](std::uint64_t base) {
    for (auto it = cells.lower_bound(Loc{base, INT64_MIN}); it != cells.end() && it->first.base == base;
         ++it) {
      visit_locs(it->second, note);
    }
  };
  while (!pending.empty()) {
    const std::uint64_t b = pending.front();
    pending.pop_front();
    scan_base(b);
  }
  // Unreachable garbage keeps its relative order.
  for (const auto& [l, v] : cells) {
    if (!renaming.contains(l.base)) {
      note(l);
      while (!pending.empty()) {
        const std::uint64_t b = pending.front();
        pending.pop_front();
        scan_base(b);
      }
    }
  }

  auto rename = [&](Loc l) { return Loc{renaming.at(l.base), l.offset}; };
  Config out;
  out.threads.reserve(c.threads.size());
  for (const auto& t : c.threads) out.threads.push_back(map_locs(t, rename));
  Heap::Cells renamed;
  for (const auto& [l, v] : cells) renamed.emplace(rename(l), map_locs(v, rename));
  out.heap = Heap::from_cells(std::move(renamed), renaming.size());
  out.cost = 0;
  return out;
}

namespace {

struct NodeKey {
  Config config;
  std::uint64_t state;
};

class NodeIndex {
 public:
  std::optional<std::size_t> find(const Config& c, std::uint64_t state, std::size_t h) const {
    auto [lo, hi] = index_.equal_range(h);
    for (auto it = lo; it != hi; ++it) {
      const NodeKey& k = keys_[it->second];
      if (k.state == state && k.config == c) return it->second;
    }
    return std::nullopt;
  }

  std::size_t insert(Config c, std::uint64_t state, std::size_t h) {
    index_.emplace(h, keys_.size());
    keys_.push_back({std::move(c), state});
    return keys_.size() - 1;
  }

 private:
  std::vector<NodeKey> keys_;
  std::unordered_multimap<std::size_t, std::size_t> index_;
};

}  // namespace

ConfigGraph explore_graph(const ExprPtr& e, const std::optional<Scheduler>& s,
                          const ExploreLimits& limits) {
  ConfigGraph g;
  g.demonic = !s.has_value();
  NodeIndex index;
  std::deque<std::size_t> frontier;

  auto intern = [&](const Config& raw, std::uint64_t state) {
    Config c = canonicalize(raw);
    const std::size_t h = hash_combine(c.hash(), state);
    if (auto id = index.find(c, state, h)) return *id;
    if (g.nodes.size() >= limits.max_nodes) throw NodeLimitExceeded(limits.max_nodes);
    GraphNode node{c.threads, c.heap, state, c.terminated(), stuck_thread(c).has_value()};
    g.nodes.push_back(std::move(node));
    g.node_actions.emplace_back();
    frontier.push_back(index.insert(std::move(c), state, h));
    return g.nodes.size() - 1;
  };

  intern(Config::initial(e), 0);
  while (!frontier.empty()) {
    const std::size_t id = frontier.front();
    frontier.pop_front();
    const Config here{g.nodes[id].threads, g.nodes[id].heap, Rational(0)};
    const std::uint64_t state = g.nodes[id].sched_state;

    std::vector<std::pair<std::size_t, std::uint64_t>> moves;
    if (s) {
      if (auto choice = s->pick(here, state)) moves.emplace_back(choice->thread, choice->next_state);
    } else {
      for (std::size_t i = 0; i < here.threads.size(); ++i) {
        if (thread_state(here, i) == ThreadState::Reducible) moves.emplace_back(i, 0);
      }
    }

    for (const auto& [thread, next_state] : moves) {
      auto step = tp_step(here, thread);
      GraphAction action{id, thread, {}};
      for (const auto& [succ, p] : step->entries()) {
        const std::size_t to = intern(succ, next_state);
        bool merged = false;
        for (auto& edge : action.edges) {
          if (edge.to == to && edge.cost == succ.cost) {
            edge.prob += p;
            merged = true;
            break;
          }
        }
        if (!merged) action.edges.push_back({to, p, succ.cost});
      }
      g.node_actions[id].push_back(g.actions.size());
      g.actions.push_back(std::move(action));
    }
  }
  return g;
}

}  // namespace phl
