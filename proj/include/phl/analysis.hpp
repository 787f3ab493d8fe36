#pragma once

// Expected-cost analysis: pcost, the three adequacy clauses for n-step
// truncations, the exact expected total cost of a scheduled graph, and
// checking of node-indexed potential certificates.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phl/exec.hpp"

namespace phl {

/// Value-indexed postcondition potential: first matching case wins, where a
/// case matches a value the object-level "=" deems equal to its pattern.
struct PostPotential {
  struct Case {
    Value pattern;
    Rational value;
  };
  std::vector<Case> cases;
  Rational fallback;

  static PostPotential zero() { return {}; }
  Rational operator()(const Value& v) const;
};

/// E over mu of accumulated cost plus post(main value) where thread 0 is a value.
Rational pcost(const Dist<Config>& mu, const PostPotential& post);

struct AdequacyOptions {
  std::size_t steps = 0;
  Rational bound;
  PostPotential post;
  /// Object-language predicate applied to terminated main values; must
  /// reduce purely to true. Unset means no postcondition.
  ExprPtr phi;
  Scheduler scheduler = Scheduler::leftmost();
  std::size_t max_support = kDefaultMaxSupport;
};

struct AdequacyReport {
  std::size_t steps = 0;
  bool postcondition_ok = true;
  std::optional<Value> counterexample;
  bool progress_ok = true;
  std::optional<Config> stuck_config;
  std::optional<std::size_t> stuck_thread;
  ExprPtr stuck_redex;
  Rational expected_cost;
  Rational bound;
  bool bound_ok = true;

  bool ok() const { return postcondition_ok && progress_ok && bound_ok; }
};

/// Runs tp_step_n from ([e], empty heap, 0) and reports the postcondition,
/// progress and expected-cost clauses independently.
AdequacyReport adequacy_check(const ExprPtr& e, const AdequacyOptions& opts);

/// True iff phi applied to v reduces purely to true.
bool holds(const ExprPtr& phi, const Value& v);

// ---------------------------------------------------------------------------
// Exact expected cost

enum class CostStatus { Finite, Nonterminating, StuckReachable };

struct NodeCost {
  CostStatus status = CostStatus::Finite;
  /// Meaningful only for Finite.
  Rational value;
};

/// Expected total cost from every node of a graph with at most one action
/// per node. A node is Finite iff it reaches a terminal node with
/// probability 1 and cannot reach a stuck node. Throws std::invalid_argument
/// if some node has several actions.
std::vector<NodeCost> solve_expected_cost(const ConfigGraph& g);

/// Same system with some nodes pinned: pinned nodes are absorbing with the
/// given value; terminal nodes absorb with post(main value). Every other
/// node gets the expected cost until absorption plus the absorbing value.
std::vector<NodeCost> solve_with_boundary(const ConfigGraph& g,
                                          const std::map<std::size_t, Rational>& pinned,
                                          const PostPotential& post = {});

// ---------------------------------------------------------------------------
// Certificates

struct PotentialCertificate {
  Rational bound;
  PostPotential post;
  std::map<std::size_t, Rational> nodes;
};

struct Violation {
  enum class Kind {
    /// Expected successor potential plus step cost exceeds the node's potential.
    Step,
    /// post(main value) exceeds the node's potential.
    Post,
    Stuck,
    Negative,
    /// The initial potential exceeds the claimed bound.
    Bound,
  };
  Kind kind;
  std::size_t node;
  std::optional<std::size_t> action;
  std::optional<std::size_t> thread;
  Rational lhs;
  Rational rhs;

  std::string describe() const;
};

struct CheckReport {
  std::vector<Violation> violations;
  std::size_t constraints = 0;

  bool accepted() const { return violations.empty(); }
};

/// Checks every local constraint on every node and every action. Throws
/// MissingNodePotential if a node has no potential.
CheckReport check_certificate(const ConfigGraph& g, const PotentialCertificate& cert);

/// Composition of a distribution with per-outcome continuations. The
/// premise is pcost(kappa(x), post) <= p(x) + cost(x) on every outcome x;
/// the conclusion is pcost(bind(mu, kappa), post) <= E[cost] + E[p].
struct CompositionInstance {
  Dist<Config> mu;
  std::function<Dist<Config>(const Config&)> kappa;
  /// Aligned with mu.entries().
  std::vector<Rational> p;
  PostPotential post;
};

bool composition_premise(const CompositionInstance& inst);
bool composition_check(const CompositionInstance& inst);

}  // namespace phl
