#include <deque>
#include <stdexcept>

#include "phl/analysis.hpp"

namespace phl {
namespace {

const GraphAction* only_action(const ConfigGraph& g, std::size_t node) {
  const auto& acts = g.node_actions[node];
  if (acts.size() > 1) {
    throw std::invalid_argument("node " + std::to_string(node) +
                                " has several actions; expected costs need a scheduled graph");
  }
  return acts.empty() ? nullptr : &g.actions[acts.front()];
}

/// Marks every node that can reach a seed through unmarked-for-absorption nodes.
std::vector<bool> backward_closure(const std::vector<std::vector<std::size_t>>& preds,
                                   const std::vector<bool>& absorbing, std::vector<bool> seeds) {
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (seeds[i]) queue.push_back(i);
  }
  while (!queue.empty()) {
    const std::size_t x = queue.front();
    queue.pop_front();
    for (std::size_t p : preds[x]) {
      if (!seeds[p] && !absorbing[p]) {
        seeds[p] = true;
        queue.push_back(p);
      }
    }
  }
  return seeds;
}

/// Strongly connected components of the subgraph induced by `member`, sinks first.
std::vector<std::vector<std::size_t>> tarjan(const std::vector<std::vector<std::size_t>>& succ,
                                             const std::vector<bool>& member) {
  const std::size_t n = succ.size();
  constexpr std::size_t kUnvisited = SIZE_MAX;
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> sccs;
  std::size_t counter = 0;

  struct Frame {
    std::size_t node;
    std::size_t next_edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (!member[root] || index[root] != kUnvisited) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      const std::size_t v = f.node;
      if (f.next_edge < succ[v].size()) {
        const std::size_t w = succ[v][f.next_edge++];
        if (!member[w]) continue;
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<std::size_t> scc;
        std::size_t w = 0;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          scc.push_back(w);
        } while (w != v);
        sccs.push_back(std::move(scc));
      }
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().node;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  return sccs;
}

/// Solves A x = b exactly; A is square and nonsingular.
std::vector<Rational> gauss(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) throw std::runtime_error("singular expected-cost system");
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || a[row][col] == 0) continue;
      const Rational factor = a[row][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[row][k] -= factor * a[col][k];
      b[row] -= factor * b[col];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

}  // namespace

std::vector<NodeCost> solve_with_boundary(const ConfigGraph& g,
                                          const std::map<std::size_t, Rational>& pinned,
                                          const PostPotential& post) {
  const std::size_t n = g.size();
  std::vector<NodeCost> out(n);
  std::vector<bool> absorbing(n, false);
  std::vector<const GraphAction*> action(n, nullptr);
  std::vector<std::vector<std::size_t>> succ(n), preds(n);

  for (std::size_t i = 0; i < n; ++i) {
    if (auto it = pinned.find(i); it != pinned.end()) {
      absorbing[i] = true;
      out[i].value = it->second;
    } else if (g.nodes[i].terminal) {
      absorbing[i] = true;
      out[i].value = post(*g.nodes[i].main_value());
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (absorbing[i]) continue;
    action[i] = only_action(g, i);
    if (!action[i]) continue;
    for (const auto& e : action[i]->edges) {
      succ[i].push_back(e.to);
      preds[e.to].push_back(i);
    }
  }

  // A non-absorbing node with no action cannot move: it is stuck.
  std::vector<bool> stuck_seed(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    stuck_seed[i] = !absorbing[i] && (g.nodes[i].stuck || !action[i]);
  }
  const std::vector<bool> stuck_reach = backward_closure(preds, absorbing, stuck_seed);

  std::vector<bool> reaches_absorbing = backward_closure(preds, absorbing, absorbing);
  std::vector<bool> trapped(n, false);
  for (std::size_t i = 0; i < n; ++i) trapped[i] = !absorbing[i] && !reaches_absorbing[i];
  const std::vector<bool> nonterminating = backward_closure(preds, absorbing, trapped);

  std::vector<bool> finite(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (absorbing[i]) continue;
    if (stuck_reach[i]) {
      out[i].status = CostStatus::StuckReachable;
    } else if (nonterminating[i]) {
      out[i].status = CostStatus::Nonterminating;
    } else {
      finite[i] = true;
    }
  }

  std::vector<std::size_t> slot(n, SIZE_MAX);
  for (const auto& scc : tarjan(succ, finite)) {
    for (std::size_t k = 0; k < scc.size(); ++k) slot[scc[k]] = k;
    const std::size_t m = scc.size();
    std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m));
    std::vector<Rational> b(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t v = scc[k];
      a[k][k] = 1;
      for (const auto& e : action[v]->edges) {
        b[k] += e.prob * e.cost;
        // slot is only set for members of the component being solved.
        if (slot[e.to] != SIZE_MAX) {
          a[k][slot[e.to]] -= e.prob;
        } else {
          b[k] += e.prob * out[e.to].value;
        }
      }
    }
    const auto x = gauss(std::move(a), std::move(b));
    for (std::size_t k = 0; k < m; ++k) {
      out[scc[k]].value = x[k];
      slot[scc[k]] = SIZE_MAX;
    }
  }
  return out;
}

std::vector<NodeCost> solve_expected_cost(const ConfigGraph& g) {
  return solve_with_boundary(g, {}, PostPotential::zero());
}

}  // namespace phl
