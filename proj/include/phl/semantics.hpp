#pragma once

// Single-thread primitive reduction: an expression and a heap step to a
// distribution over (reduct, heap, step cost, forked threads).
//
// Evaluation order is right to left: in `f a` the argument is evaluated
// before the function, in `a + b` the right operand first. A term that is
// not a value and has no rule at its redex is stuck; head_step/prim_step
// signal that by returning nullopt.

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "phl/dist.hpp"
#include "phl/syntax.hpp"

namespace phl {

/// Persistent heap. Copies share cells until written.
class Heap {
 public:
  using Cells = std::map<Loc, Value>;

  Heap();
  static Heap from_cells(Cells cells, std::uint64_t next_base);

  const Cells& cells() const { return *cells_; }
  std::uint64_t next_base() const { return next_base_; }
  bool empty() const { return cells_->empty(); }

  const Value* lookup(Loc l) const;
  Heap with(Loc l, Value v) const;
  Heap without(Loc l) const;
  /// n >= 1 contiguous cells at offsets 0..n-1 of a fresh base.
  std::pair<Heap, Loc> allocate(std::int64_t n, const Value& init) const;

  std::size_t hash() const;
  friend bool operator==(const Heap& a, const Heap& b);

 private:
  std::shared_ptr<const Cells> cells_;
  std::uint64_t next_base_ = 0;
};

struct StepOutcome {
  ExprPtr reduct;
  Heap heap;
  Rational cost;
  std::vector<ExprPtr> forks;

  friend bool operator==(const StepOutcome& a, const StepOutcome& b);
};

using StepDist = Dist<StepOutcome>;

/// Applies a rule at the root of e, assuming its evaluation positions hold
/// values. nullopt if no rule applies.
std::optional<StepDist> head_step(const ExprPtr& e, const Heap& h);

/// Evaluation-context decomposition followed by head_step, outcomes plugged
/// back into the context. nullopt for values and for stuck terms.
std::optional<StepDist> prim_step(const ExprPtr& e, const Heap& h);

/// The unique split of e into context and redex.
struct Decomposition {
  ExprPtr redex;
  /// Number of context frames above the redex.
  std::size_t depth = 0;
  /// (frame, child index) from the root down to the redex's parent.
  std::vector<std::pair<ExprPtr, std::size_t>> frames;

  /// Plugs a reduct into the hole.
  ExprPtr fill(ExprPtr reduct) const;
};

/// nullopt iff e is a value.
std::optional<Decomposition> decompose(const ExprPtr& e);

/// Child indices in evaluation order (right to left). Binding positions and
/// fork bodies are not evaluation positions.
std::vector<std::size_t> evaluation_order(const Expr& e);

bool is_reducible(const ExprPtr& e, const Heap& h);

/// True iff e steps to e2 deterministically, at cost 0, without forks and
/// without consulting or changing the heap.
bool is_pure_step(const ExprPtr& e, const ExprPtr& e2);

/// Runs pure steps until a value. nullopt if a non-pure or stuck step is
/// reached, or after max_steps.
std::optional<Value> eval_pure(const ExprPtr& e, std::size_t max_steps = 100000);

}  // namespace phl

template <>
struct std::hash<phl::Heap> {
  std::size_t operator()(const phl::Heap& h) const { return h.hash(); }
};

template <>
struct std::hash<phl::StepOutcome> {
  std::size_t operator()(const phl::StepOutcome& o) const;
};
