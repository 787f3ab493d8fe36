#pragma once

// Shared helpers for the test binaries: fixture loading, small random
// generators, and reference computations that avoid the code under test.

#include <fstream>
#include <climits>
#include <map>
#include <tuple>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "phl/analysis.hpp"
#include "phl/parser.hpp"

namespace phl::test {

inline std::string source_path(const std::string& rel) { return std::string(PHL_SOURCE_DIR) + "/" + rel; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ExprPtr program(const std::string& rel) { return parse_program(read_text(source_path(rel))); }

inline Rational q(long num, long den = 1) { return make_rational(num, den); }

/// Enumerates every scheduled path of length <= n one tp_step at a time and
/// sums probability * (cost + post(main)). No bind, no merging of outcomes.
inline Rational path_sum_pcost(const Config& c, std::size_t n, const Scheduler& s,
                               const PostPotential& post, std::uint64_t state = 0,
                               const Rational& prob = Rational(1)) {
  auto choice = s.pick(c, state);
  if (n == 0 || !choice) {
    Rational v = c.cost;
    if (auto m = c.main_value()) v += post(*m);
    return prob * v;
  }
  Rational sum;
  const auto step = tp_step(c, choice->thread);
  for (const auto& [next, p] : step->entries()) {
    sum += path_sum_pcost(next, n - 1, s, post, choice->next_state, prob * p);
  }
  return sum;
}

/// Number of increments still to run after the pending incr_counter call:
/// the argument of the incr_m call waiting in the continuation.
inline std::optional<std::int64_t> pending_increments(const ExprPtr& e) {
  if (e->kind() == ExprKind::App && e->child(0)->kind() == ExprKind::App) {
    const ExprPtr& f = e->child(0)->child(0);
    if (f->is_value() && f->value().is(Value::Kind::Closure) && f->value().as_closure().fn == "incr_m") {
      if (auto v = eval_pure(e->child(1)); v && v->is(Value::Kind::Int)) return v->as_int();
    }
  }
  for (const auto& c : e->children()) {
    if (auto r = pending_increments(c)) return r;
  }
  return std::nullopt;
}

/// Potentials for the binary counter. At every call of incr_counter the
/// potential is 1/p per set bit plus 2/p per increment still to do
/// (including this one); every other node gets the expected cost to the
/// next such call (or the end) plus that call's potential.
inline PotentialCertificate counter_certificate(const ConfigGraph& g, const Rational& p,
                                                const Rational& bound) {
  std::map<std::size_t, Rational> anchors;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const ExprPtr& main = g.nodes[i].threads.front();
    auto d = decompose(main);
    if (!d || d->redex->kind() != ExprKind::App || !d->redex->child(0)->is_value()) continue;
    const Value& f = d->redex->child(0)->value();
    if (!f.is(Value::Kind::Closure) || f.as_closure().fn != "incr_counter") continue;
    auto rest = pending_increments(main);
    if (!rest) throw std::runtime_error("incr_counter call without a pending incr_m");
    long set_bits = 0;
    for (const auto& [l, v] : g.nodes[i].heap.cells()) {
      if (v.is(Value::Kind::Bool) && v.as_bool()) ++set_bits;
    }
    anchors[i] = Rational(set_bits) / p + Rational(2) / p * Rational(1 + *rest);
  }
  PotentialCertificate cert;
  cert.bound = bound;
  const auto completed = solve_with_boundary(g, anchors);
  for (std::size_t i = 0; i < g.size(); ++i) cert.nodes[i] = completed[i].value;
  return cert;
}

/// Expected number of comparisons of quicksort on a concrete array, by
/// exhaustive recursion over the pivot choices. `keep_pivot` selects the
/// variant that recurses on [0, pos) rather than [0, pos - 1); that variant
/// can repeat the same call, which is resolved as a geometric self-loop.
inline Rational quicksort_comparisons(std::vector<long> a, bool keep_pivot) {
  const std::size_t n = a.size();
  if (n <= 1) return Rational(0);
  auto partition = [](std::vector<long>& v, long x) {
    std::size_t i = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] <= x) std::swap(v[i++], v[j]);
    }
    return i;
  };
  Rational total;
  Rational self_loop;
  for (std::size_t pick = 0; pick < n; ++pick) {
    std::vector<long> v = a;
    std::size_t pos = 0;
    if (keep_pivot) {
      pos = partition(v, v[pick]);
    } else {
      std::swap(v[pick], v[n - 1]);
      pos = partition(v, v[n - 1]);
    }
    Rational cost(static_cast<long>(n));
    const std::size_t left = keep_pivot ? pos : pos - 1;
    if (keep_pivot && pos == n) {
      // Every key is <= the maximum, so partition leaves v == a and the
      // call repeats itself: E(a) picks up a term E(a) / n.
      self_loop += Rational(1, static_cast<unsigned long>(n));
      total += cost;
      continue;
    }
    cost += quicksort_comparisons({v.begin(), v.begin() + static_cast<long>(left)}, keep_pivot);
    cost += quicksort_comparisons({v.begin() + static_cast<long>(pos), v.end()}, keep_pivot);
    total += cost;
  }
  // E = total/n + self_loop * E  =>  E = (total/n) / (1 - self_loop)
  const Rational mean = total / Rational(static_cast<long>(n));
  return mean / (Rational(1) - self_loop);
}

/// One certificate constraint as the test side evaluates it.
struct Constraint {
  Violation::Kind kind;
  std::size_t node;
  std::optional<std::size_t> action;
  Rational lhs;
  Rational rhs;
  bool violated() const { return lhs > rhs; }
  auto key() const { return std::tuple(static_cast<int>(kind), node, action.value_or(SIZE_MAX)); }
};

/// Every local constraint of a certificate, evaluated directly from the
/// graph and the potentials.
inline std::vector<Constraint> certificate_constraints(const ConfigGraph& g, const PotentialCertificate& cert) {
  std::vector<Constraint> out;
  const auto phi = [&](std::size_t i) { return cert.nodes.at(i); };
  for (std::size_t a = 0; a < g.actions.size(); ++a) {
    const GraphAction& act = g.actions[a];
    Rational lhs;
    for (const auto& e : act.edges) lhs += e.prob * (phi(e.to) + e.cost);
    out.push_back({Violation::Kind::Step, act.node, a, lhs, phi(act.node)});
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (auto v = g.nodes[i].main_value()) out.push_back({Violation::Kind::Post, i, std::nullopt, cert.post(*v), phi(i)});
    if (g.nodes[i].stuck) out.push_back({Violation::Kind::Stuck, i, std::nullopt, Rational(1), Rational(0)});
    out.push_back({Violation::Kind::Negative, i, std::nullopt, Rational(0) - phi(i), Rational(0)});
  }
  out.push_back({Violation::Kind::Bound, 0, std::nullopt, phi(0), cert.bound});
  return out;
}

/// Raises one node's potential by one more than the largest amount any
/// action stepping into it could absorb, so every such action breaks.
inline PotentialCertificate perturb_upward(const ConfigGraph& g, const PotentialCertificate& cert, std::size_t node) {
  Rational delta(1);
  for (const auto& act : g.actions) {
    Rational into, lhs;
    for (const auto& e : act.edges) {
      lhs += e.prob * (cert.nodes.at(e.to) + e.cost);
      if (e.to == node) into += e.prob;
    }
    if (into == 0 || act.node == node) continue;
    const Rational need = (cert.nodes.at(act.node) - lhs) / into + Rational(1);
    if (need > delta) delta = need;
  }
  PotentialCertificate out = cert;
  out.nodes[node] += delta;
  return out;
}

/// Multiplies the argument of every tick by a constant (ticks of a
/// non-literal argument are left alone; callers avoid them).
inline ExprPtr scale_ticks(const ExprPtr& e, const Rational& k) {
  if (e->is_value()) {
    const Value& v = e->value();
    if (!v.is(Value::Kind::Closure)) return e;
    const auto& c = v.as_closure();
    return Expr::val(Value::closure(c.fn, c.arg, scale_ticks(c.body, k)));
  }
  if (e->kind() == ExprKind::Tick && e->child(0)->is_value() && e->child(0)->value().is_numeric()) {
    return Expr::make(ExprKind::Tick, {Expr::val(Value::rational(k * e->child(0)->value().numeric()))});
  }
  std::vector<ExprPtr> kids;
  for (const auto& c : e->children()) kids.push_back(scale_ticks(c, k));
  return kids.empty() ? e : e->with_children(std::move(kids));
}

/// Small closed programs covering every primitive, forks and both choices.
inline const std::vector<std::string>& small_programs() {
  static const std::vector<std::string> kPrograms{
      "tick 1 ;; tick 2",
      "if ChooseUniform [true, false] then tick 1 else tick 3",
      "let x := ChooseWeighted [(1, 2), (3, 5)] in tick x ;; x",
      "let l := AllocN 2 0 in l <- 5 ;; (l + 1) <- !l + 1 ;; !(l + 1)",
      "let l := AllocN 1 0 in fork (l <- 1) ;; !l",
      "let l := AllocN 1 1 in FAA l 4 ;; Xchg l 7 ;; CmpXchg l 7 9",
      "let f := rec f n := if n = 0 then 0 else (tick 1 ;; f (n - 1)) in f 3",
      "let l := AllocN 1 0 in fork (FAA l 1) ;; fork (FAA l 2) ;; !l",
      "match ChooseUniform [inl 1, inr true] with inl a => tick a | inr b => tick 2 end",
      "fst (ChooseRange 0 3, 7) + snd (1, 2)",
      "let p := (ChooseUniform [1, 2], ChooseUniform [3, 4]) in tick (fst p) ;; snd p",
      "length (1 :: 2 :: []) + head [5] + length (tail [1, 2])",
      "let l := AllocN 3 true in Free (l + 1) ;; !(l + 2)",
      "let x := 1 / 2 in let y := 1.5 * 2 in x < 1 && y <= 3",
      "not (ChooseUniform [true, false]) || false",
      "let g := rec g n := if n < 1 then () else (fork (tick 1) ;; g (n - 1)) in g 2",
      "tick (1/2r) ;; tick 0.25 ;; ChooseUniform [1, 1, 2]",
      "let r := rec r _ := if ChooseUniform [true, false, false] then () else (tick 1 ;; r ()) in r ()",
      "- (3 - 5) * 2",
      "let l := AllocN 1 0 in fork (l <- ChooseUniform [1, 2]) ;; tick 1 ;; !l",
  };
  return kPrograms;
}

/// Random rational in [0, max_num] with a small denominator.
inline Rational random_rational(std::mt19937_64& rng, long max_num = 8) {
  const long den = std::uniform_int_distribution<long>(1, 6)(rng);
  const long num = std::uniform_int_distribution<long>(0, max_num * den)(rng);
  return make_rational(num, den);
}

}  // namespace phl::test
