#pragma once

// Abstract syntax of the probabilistic heap language: values, expressions,
// and capture-avoiding substitution.
//
// Expressions are immutable, shared, and hash-consed only in the weak sense
// that every node caches its structural hash and free-variable set at
// construction. Runtime terms are closed, so substitution never descends
// into values.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "phl/rational.hpp"

namespace phl {

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Heap address. Pointer arithmetic moves the offset only.
struct Loc {
  std::uint64_t base = 0;
  std::int64_t offset = 0;

  Loc shifted(std::int64_t by) const { return {base, offset + by}; }
  friend auto operator<=>(const Loc&, const Loc&) = default;
};

/// Empty binder names are anonymous ("_" in source).
using Binder = std::string;

class Value;

struct UnitV {
  friend bool operator==(const UnitV&, const UnitV&) = default;
};

struct ListV {
  std::shared_ptr<const std::vector<Value>> items;
};

struct PairV {
  std::shared_ptr<const std::pair<Value, Value>> parts;
};

struct InjLV {
  std::shared_ptr<const Value> payload;
};

struct InjRV {
  std::shared_ptr<const Value> payload;
};

/// rec f x := body, closed up to f and x.
struct ClosureV {
  Binder fn;
  Binder arg;
  ExprPtr body;
};

class Value {
 public:
  enum class Kind { Unit, Bool, Int, Rat, Loc, List, Closure, Pair, InjL, InjR };

  Value() : data_(UnitV{}) {}

  static Value unit() { return Value(UnitV{}); }
  static Value boolean(bool b) { return Value(b); }
  static Value integer(std::int64_t z) { return Value(z); }
  static Value rational(Rational r) { return Value(std::move(r)); }
  static Value location(Loc l) { return Value(l); }
  static Value list(std::vector<Value> items);
  static Value pair(Value a, Value b);
  static Value inj_left(Value v);
  static Value inj_right(Value v);
  /// Throws std::invalid_argument if body has free variables besides fn/arg.
  static Value closure(Binder fn, Binder arg, ExprPtr body);

  Kind kind() const { return static_cast<Kind>(data_.index()); }
  bool is(Kind k) const { return kind() == k; }

  bool as_bool() const { return std::get<bool>(data_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
  const Rational& as_rat() const { return std::get<Rational>(data_); }
  Loc as_loc() const { return std::get<Loc>(data_); }
  const std::vector<Value>& as_list() const { return *std::get<ListV>(data_).items; }
  const ClosureV& as_closure() const { return std::get<ClosureV>(data_); }
  const Value& first() const { return std::get<PairV>(data_).parts->first; }
  const Value& second() const { return std::get<PairV>(data_).parts->second; }
  const Value& payload() const;

  bool is_numeric() const { return is(Kind::Int) || is(Kind::Rat); }
  /// Int or Rat as an exact rational.
  Rational numeric() const;

  /// True if the value (transitively) contains no closure.
  bool comparable() const;
  bool contains_loc() const;

  std::size_t hash() const;

  /// Structural identity: Int 1 and Rat 1.0 differ.
  friend bool operator==(const Value& a, const Value& b);

 private:
  using Data = std::variant<UnitV, bool, std::int64_t, Rational, Loc, ListV, ClosureV, PairV,
                            InjLV, InjRV>;
  template <class T>
  explicit Value(T x) : data_(std::move(x)) {}

  Data data_;
};

/// Object-level "=": numbers compare numerically across Int/Rat, everything
/// else structurally. Empty when a closure is involved.
std::optional<bool> values_equal(const Value& a, const Value& b);

enum class ExprKind {
  Val,
  Var,
  Rec,
  App,
  UnOp,
  BinOp,
  If,
  Pair,
  Fst,
  Snd,
  InjL,
  InjR,
  Match,
  AllocN,
  Free,
  Load,
  Store,
  CmpXchg,
  Xchg,
  FAA,
  Fork,
  Tick,
  ChooseUniform,
  ChooseWeighted,
};

/// Neg/Not are the arithmetic and boolean negations; Head/Tail/Length are the
/// list eliminators.
enum class UnOpKind { Neg, Not, Head, Tail, Length };

/// Range a b is the integer list [a, ..., b-1] (ChooseRange's backing list).
enum class BinOpKind { Add, Sub, Mul, Div, Lt, Le, Eq, And, Or, Cons, Range };

class Expr {
 public:
  ExprKind kind() const { return kind_; }
  bool is_value() const { return kind_ == ExprKind::Val; }
  const Value& value() const { return value_; }
  /// Var: the variable. Rec: function binder. Match: left binder.
  const std::string& name() const { return name_; }
  /// Rec: argument binder. Match: right binder.
  const std::string& arg() const { return arg_; }
  UnOpKind unop() const { return unop_; }
  BinOpKind binop() const { return binop_; }

  std::span<const ExprPtr> children() const { return children_; }
  const ExprPtr& child(std::size_t i) const { return children_.at(i); }

  std::size_t hash() const { return hash_; }
  /// Sorted, unique.
  const std::vector<std::string>& free_vars() const { return free_vars_; }
  bool is_closed() const { return free_vars_.empty(); }
  bool has_free(const std::string& x) const;
  bool contains_loc() const { return contains_loc_; }
  std::size_t size() const { return size_; }

  // Factories.
  static ExprPtr val(Value v);
  static ExprPtr var(std::string x);
  static ExprPtr rec(Binder f, Binder x, ExprPtr body);
  static ExprPtr app(ExprPtr f, ExprPtr a);
  static ExprPtr unop(UnOpKind op, ExprPtr e);
  static ExprPtr binop(BinOpKind op, ExprPtr a, ExprPtr b);
  static ExprPtr if_(ExprPtr c, ExprPtr t, ExprPtr e);
  static ExprPtr match(ExprPtr scrut, Binder left, ExprPtr on_left, Binder right, ExprPtr on_right);
  /// Kinds with only positional children (Pair, Fst, AllocN, Store, Tick, ...).
  static ExprPtr make(ExprKind kind, std::vector<ExprPtr> children);

  /// `let x := bound in body`, i.e. (rec _ x := body) bound.
  static ExprPtr let(Binder x, ExprPtr bound, ExprPtr body);
  /// `first ;; second`.
  static ExprPtr seq(ExprPtr first, ExprPtr second);

  /// Same node with children replaced (binders and payload kept).
  ExprPtr with_children(std::vector<ExprPtr> children) const;
  ExprPtr with_child(std::size_t i, ExprPtr child) const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  struct Token {};

 public:
  explicit Expr(Token) {}

 private:
  void finalize();

  ExprKind kind_ = ExprKind::Val;
  Value value_;
  std::string name_;
  std::string arg_;
  UnOpKind unop_ = UnOpKind::Neg;
  BinOpKind binop_ = BinOpKind::Add;
  std::vector<ExprPtr> children_;
  std::vector<std::string> free_vars_;
  std::size_t hash_ = 0;
  std::size_t size_ = 1;
  bool contains_loc_ = false;
};

bool expr_equal(const ExprPtr& a, const ExprPtr& b);

/// Some(v) iff e is syntactically a value.
std::optional<Value> to_val(const ExprPtr& e);
ExprPtr of_val(Value v);

/// e[v/x]. Binders shadow; v is closed so capture is impossible.
ExprPtr subst(const ExprPtr& e, const std::string& x, const Value& v);

/// Free variables of a value (closures only contribute body minus binders).
std::vector<std::string> free_vars(const Value& v);

/// Renames every location in the expression / value.
template <class F>
Value map_locs(const Value& v, F&& f);
template <class F>
ExprPtr map_locs(const ExprPtr& e, F&& f);

/// Calls f on every location in pre-order.
template <class F>
void visit_locs(const Value& v, F&& f);
template <class F>
void visit_locs(const ExprPtr& e, F&& f);

}  // namespace phl

template <>
struct std::hash<phl::Value> {
  std::size_t operator()(const phl::Value& v) const { return v.hash(); }
};

// ---------------------------------------------------------------------------
// Template definitions.

namespace phl {

template <class F>
Value map_locs(const Value& v, F&& f) {
  if (!v.contains_loc()) return v;
  switch (v.kind()) {
    case Value::Kind::Loc:
      return Value::location(f(v.as_loc()));
    case Value::Kind::List: {
      std::vector<Value> items;
      items.reserve(v.as_list().size());
      for (const auto& x : v.as_list()) items.push_back(map_locs(x, f));
      return Value::list(std::move(items));
    }
    case Value::Kind::Pair:
      return Value::pair(map_locs(v.first(), f), map_locs(v.second(), f));
    case Value::Kind::InjL:
      return Value::inj_left(map_locs(v.payload(), f));
    case Value::Kind::InjR:
      return Value::inj_right(map_locs(v.payload(), f));
    case Value::Kind::Closure: {
      const auto& c = v.as_closure();
      return Value::closure(c.fn, c.arg, map_locs(c.body, f));
    }
    default:
      return v;
  }
}

template <class F>
ExprPtr map_locs(const ExprPtr& e, F&& f) {
  if (!e->contains_loc()) return e;
  if (e->is_value()) return Expr::val(map_locs(e->value(), f));
  std::vector<ExprPtr> kids;
  kids.reserve(e->children().size());
  for (const auto& c : e->children()) kids.push_back(map_locs(c, f));
  return e->with_children(std::move(kids));
}

template <class F>
void visit_locs(const Value& v, F&& f) {
  if (!v.contains_loc()) return;
  switch (v.kind()) {
    case Value::Kind::Loc:
      f(v.as_loc());
      break;
    case Value::Kind::List:
      for (const auto& x : v.as_list()) visit_locs(x, f);
      break;
    case Value::Kind::Pair:
      visit_locs(v.first(), f);
      visit_locs(v.second(), f);
      break;
    case Value::Kind::InjL:
    case Value::Kind::InjR:
      visit_locs(v.payload(), f);
      break;
    case Value::Kind::Closure:
      visit_locs(v.as_closure().body, f);
      break;
    default:
      break;
  }
}

template <class F>
void visit_locs(const ExprPtr& e, F&& f) {
  if (!e->contains_loc()) return;
  if (e->is_value()) {
    visit_locs(e->value(), f);
    return;
  }
  for (const auto& c : e->children()) visit_locs(c, f);
}

}  // namespace phl
