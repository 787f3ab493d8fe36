#include "phl/semantics.hpp"

#include <limits>

namespace phl {

// ---------------------------------------------------------------------------
// Heap

Heap::Heap() : cells_(std::make_shared<const Cells>()) {}

Heap Heap::from_cells(Cells cells, std::uint64_t next_base) {
  Heap h;
  h.cells_ = std::make_shared<const Cells>(std::move(cells));
  h.next_base_ = next_base;
  return h;
}

const Value* Heap::lookup(Loc l) const {
  auto it = cells_->find(l);
  return it == cells_->end() ? nullptr : &it->second;
}

Heap Heap::with(Loc l, Value v) const {
  Cells copy = *cells_;
  copy.insert_or_assign(l, std::move(v));
  return from_cells(std::move(copy), next_base_);
}

Heap Heap::without(Loc l) const {
  Cells copy = *cells_;
  copy.erase(l);
  return from_cells(std::move(copy), next_base_);
}

std::pair<Heap, Loc> Heap::allocate(std::int64_t n, const Value& init) const {
  Cells copy = *cells_;
  const std::uint64_t base = next_base_;
  for (std::int64_t i = 0; i < n; ++i) copy.emplace(Loc{base, i}, init);
  return {from_cells(std::move(copy), base + 1), Loc{base, 0}};
}

std::size_t Heap::hash() const {
  std::size_t h = next_base_;
  for (const auto& [l, v] : *cells_) {
    h = hash_combine(h, l.base);
    h = hash_combine(h, static_cast<std::size_t>(l.offset));
    h = hash_combine(h, v.hash());
  }
  return h;
}

bool operator==(const Heap& a, const Heap& b) {
  return a.next_base_ == b.next_base_ && (a.cells_ == b.cells_ || *a.cells_ == *b.cells_);
}

bool operator==(const StepOutcome& a, const StepOutcome& b) {
  if (a.cost != b.cost || a.forks.size() != b.forks.size()) return false;
  if (!expr_equal(a.reduct, b.reduct) || !(a.heap == b.heap)) return false;
  for (std::size_t i = 0; i < a.forks.size(); ++i) {
    if (!expr_equal(a.forks[i], b.forks[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Head reduction

namespace {

using Outcome = std::optional<StepDist>;

Outcome dirac(ExprPtr reduct, const Heap& h, Rational cost = Rational(0),
              std::vector<ExprPtr> forks = {}) {
  return StepDist::dirac(StepOutcome{std::move(reduct), h, std::move(cost), std::move(forks)});
}

Outcome dirac_val(Value v, const Heap& h) { return dirac(Expr::val(std::move(v)), h); }

std::optional<std::int64_t> checked(std::int64_t a, std::int64_t b, BinOpKind op) {
  std::int64_t r = 0;
  bool overflow = false;
  switch (op) {
    case BinOpKind::Add:
      overflow = __builtin_add_overflow(a, b, &r);
      break;
    case BinOpKind::Sub:
      overflow = __builtin_sub_overflow(a, b, &r);
      break;
    case BinOpKind::Mul:
      overflow = __builtin_mul_overflow(a, b, &r);
      break;
    case BinOpKind::Div:
      if (b == 0 || (a == std::numeric_limits<std::int64_t>::min() && b == -1)) return std::nullopt;
      r = a / b;
      break;
    default:
      return std::nullopt;
  }
  if (overflow) return std::nullopt;
  return r;
}

std::optional<Value> eval_binop(BinOpKind op, const Value& a, const Value& b) {
  switch (op) {
    case BinOpKind::Add:
    case BinOpKind::Sub:
    case BinOpKind::Mul:
    case BinOpKind::Div: {
      if (op == BinOpKind::Add && a.is(Value::Kind::Loc) && b.is(Value::Kind::Int)) {
        std::int64_t off = 0;
        if (__builtin_add_overflow(a.as_loc().offset, b.as_int(), &off)) return std::nullopt;
        return Value::location(Loc{a.as_loc().base, off});
      }
      if (!a.is_numeric() || !b.is_numeric()) return std::nullopt;
      if (a.is(Value::Kind::Int) && b.is(Value::Kind::Int)) {
        auto r = checked(a.as_int(), b.as_int(), op);
        if (!r) return std::nullopt;
        return Value::integer(*r);
      }
      const Rational x = a.numeric();
      const Rational y = b.numeric();
      switch (op) {
        case BinOpKind::Add: return Value::rational(x + y);
        case BinOpKind::Sub: return Value::rational(x - y);
        case BinOpKind::Mul: return Value::rational(x * y);
        default:
          if (y == 0) return std::nullopt;
          return Value::rational(x / y);
      }
    }
    case BinOpKind::Lt:
    case BinOpKind::Le: {
      if (!a.is_numeric() || !b.is_numeric()) return std::nullopt;
      const int c = cmp(a.numeric(), b.numeric());
      return Value::boolean(op == BinOpKind::Lt ? c < 0 : c <= 0);
    }
    case BinOpKind::Eq: {
      auto eq = values_equal(a, b);
      if (!eq) return std::nullopt;
      return Value::boolean(*eq);
    }
    case BinOpKind::And:
    case BinOpKind::Or:
      if (!a.is(Value::Kind::Bool) || !b.is(Value::Kind::Bool)) return std::nullopt;
      return Value::boolean(op == BinOpKind::And ? (a.as_bool() && b.as_bool())
                                                 : (a.as_bool() || b.as_bool()));
    case BinOpKind::Cons: {
      if (!b.is(Value::Kind::List)) return std::nullopt;
      std::vector<Value> items;
      items.reserve(b.as_list().size() + 1);
      items.push_back(a);
      items.insert(items.end(), b.as_list().begin(), b.as_list().end());
      return Value::list(std::move(items));
    }
    case BinOpKind::Range: {
      if (!a.is(Value::Kind::Int) || !b.is(Value::Kind::Int)) return std::nullopt;
      constexpr std::int64_t kMaxRange = 1 << 20;
      const std::int64_t lo = a.as_int();
      const std::int64_t hi = b.as_int();
      if (hi > lo && (hi - lo > kMaxRange || hi - lo < 0)) return std::nullopt;
      std::vector<Value> items;
      for (std::int64_t i = lo; i < hi; ++i) items.push_back(Value::integer(i));
      return Value::list(std::move(items));
    }
  }
  return std::nullopt;
}

std::optional<Value> eval_unop(UnOpKind op, const Value& a) {
  switch (op) {
    case UnOpKind::Neg:
      if (a.is(Value::Kind::Int)) {
        if (a.as_int() == std::numeric_limits<std::int64_t>::min()) return std::nullopt;
        return Value::integer(-a.as_int());
      }
      if (a.is(Value::Kind::Rat)) return Value::rational(-a.as_rat());
      return std::nullopt;
    case UnOpKind::Not:
      if (!a.is(Value::Kind::Bool)) return std::nullopt;
      return Value::boolean(!a.as_bool());
    case UnOpKind::Head:
      if (!a.is(Value::Kind::List) || a.as_list().empty()) return std::nullopt;
      return a.as_list().front();
    case UnOpKind::Tail:
      if (!a.is(Value::Kind::List) || a.as_list().empty()) return std::nullopt;
      return Value::list(std::vector<Value>(a.as_list().begin() + 1, a.as_list().end()));
    case UnOpKind::Length:
      if (!a.is(Value::Kind::List)) return std::nullopt;
      return Value::integer(static_cast<std::int64_t>(a.as_list().size()));
  }
  return std::nullopt;
}

/// The heap cell a location operand points to, if present.
const Value* cell(const Value& l, const Heap& h) {
  if (!l.is(Value::Kind::Loc)) return nullptr;
  return h.lookup(l.as_loc());
}

}  // namespace

std::optional<StepDist> head_step(const ExprPtr& e, const Heap& h) {
  auto arg = [&](std::size_t i) -> const Value& { return e->child(i)->value(); };
  for (std::size_t i : evaluation_order(*e)) {
    if (!e->child(i)->is_value()) return std::nullopt;
  }

  switch (e->kind()) {
    case ExprKind::Val:
    case ExprKind::Var:
      return std::nullopt;

    case ExprKind::Rec:
      if (!e->is_closed()) return std::nullopt;
      return dirac_val(Value::closure(e->name(), e->arg(), e->child(0)), h);

    case ExprKind::App: {
      const Value& f = arg(0);
      if (!f.is(Value::Kind::Closure)) return std::nullopt;
      const auto& c = f.as_closure();
      ExprPtr body = subst(c.body, c.fn, f);
      body = subst(body, c.arg, arg(1));
      return dirac(std::move(body), h);
    }

    case ExprKind::UnOp: {
      auto r = eval_unop(e->unop(), arg(0));
      if (!r) return std::nullopt;
      return dirac_val(std::move(*r), h);
    }

    case ExprKind::BinOp: {
      auto r = eval_binop(e->binop(), arg(0), arg(1));
      if (!r) return std::nullopt;
      return dirac_val(std::move(*r), h);
    }

    case ExprKind::If:
      if (!arg(0).is(Value::Kind::Bool)) return std::nullopt;
      return dirac(arg(0).as_bool() ? e->child(1) : e->child(2), h);

    case ExprKind::Pair:
      return dirac_val(Value::pair(arg(0), arg(1)), h);

    case ExprKind::Fst:
    case ExprKind::Snd:
      if (!arg(0).is(Value::Kind::Pair)) return std::nullopt;
      return dirac_val(e->kind() == ExprKind::Fst ? arg(0).first() : arg(0).second(), h);

    case ExprKind::InjL:
      return dirac_val(Value::inj_left(arg(0)), h);
    case ExprKind::InjR:
      return dirac_val(Value::inj_right(arg(0)), h);

    case ExprKind::Match: {
      const Value& v = arg(0);
      if (v.is(Value::Kind::InjL)) return dirac(subst(e->child(1), e->name(), v.payload()), h);
      if (v.is(Value::Kind::InjR)) return dirac(subst(e->child(2), e->arg(), v.payload()), h);
      return std::nullopt;
    }

    case ExprKind::AllocN: {
      const Value& n = arg(0);
      if (!n.is(Value::Kind::Int) || n.as_int() < 1) return std::nullopt;
      auto [heap, loc] = h.allocate(n.as_int(), arg(1));
      return dirac(Expr::val(Value::location(loc)), heap);
    }

    case ExprKind::Free:
      if (!cell(arg(0), h)) return std::nullopt;
      return dirac_val(Value::unit(), h.without(arg(0).as_loc()));

    case ExprKind::Load: {
      const Value* v = cell(arg(0), h);
      if (!v) return std::nullopt;
      return dirac_val(*v, h);
    }

    case ExprKind::Store:
      if (!cell(arg(0), h)) return std::nullopt;
      return dirac_val(Value::unit(), h.with(arg(0).as_loc(), arg(1)));

    case ExprKind::CmpXchg: {
      const Value* old = cell(arg(0), h);
      if (!old) return std::nullopt;
      auto eq = values_equal(*old, arg(1));
      if (!eq) return std::nullopt;
      Value result = Value::pair(*old, Value::boolean(*eq));
      return dirac_val(std::move(result), *eq ? h.with(arg(0).as_loc(), arg(2)) : h);
    }

    case ExprKind::Xchg: {
      const Value* old = cell(arg(0), h);
      if (!old) return std::nullopt;
      Value result = *old;
      return dirac_val(std::move(result), h.with(arg(0).as_loc(), arg(1)));
    }

    case ExprKind::FAA: {
      const Value* old = cell(arg(0), h);
      if (!old || !old->is(Value::Kind::Int) || !arg(1).is(Value::Kind::Int)) return std::nullopt;
      std::int64_t sum = 0;
      if (__builtin_add_overflow(old->as_int(), arg(1).as_int(), &sum)) return std::nullopt;
      Value result = *old;
      return dirac_val(std::move(result), h.with(arg(0).as_loc(), Value::integer(sum)));
    }

    case ExprKind::Fork:
      return dirac(Expr::val(Value::unit()), h, Rational(0), {e->child(0)});

    case ExprKind::Tick: {
      const Value& c = arg(0);
      if (!c.is_numeric() || c.numeric() < 0) return std::nullopt;
      return dirac(Expr::val(Value::unit()), h, c.numeric());
    }

    case ExprKind::ChooseUniform: {
      const Value& l = arg(0);
      if (!l.is(Value::Kind::List) || l.as_list().empty()) return std::nullopt;
      std::vector<StepOutcome> outcomes;
      outcomes.reserve(l.as_list().size());
      for (const auto& v : l.as_list()) outcomes.push_back({Expr::val(v), h, Rational(0), {}});
      return StepDist::from_uniform(outcomes);
    }

    case ExprKind::ChooseWeighted: {
      const Value& l = arg(0);
      if (!l.is(Value::Kind::List) || l.as_list().empty()) return std::nullopt;
      std::vector<std::pair<Rational, StepOutcome>> pairs;
      pairs.reserve(l.as_list().size());
      for (const auto& p : l.as_list()) {
        if (!p.is(Value::Kind::Pair) || !p.first().is_numeric()) return std::nullopt;
        Rational w = p.first().numeric();
        if (w <= 0) return std::nullopt;
        pairs.emplace_back(std::move(w), StepOutcome{Expr::val(p.second()), h, Rational(0), {}});
      }
      return StepDist::from_weighted(pairs);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Contexts

std::vector<std::size_t> evaluation_order(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Val:
    case ExprKind::Var:
    case ExprKind::Rec:
    case ExprKind::Fork:
      return {};
    case ExprKind::App:
    case ExprKind::BinOp:
    case ExprKind::Pair:
    case ExprKind::AllocN:
    case ExprKind::Store:
    case ExprKind::Xchg:
    case ExprKind::FAA:
      return {1, 0};
    case ExprKind::CmpXchg:
      return {2, 1, 0};
    default:
      // UnOp, If, Fst, Snd, InjL, InjR, Match, Free, Load, Tick, Choose*.
      return {0};
  }
}

std::optional<Decomposition> decompose(const ExprPtr& e) {
  if (e->is_value()) return std::nullopt;
  Decomposition d;
  ExprPtr cur = e;
  for (;;) {
    bool descended = false;
    for (std::size_t i : evaluation_order(*cur)) {
      if (!cur->child(i)->is_value()) {
        d.frames.emplace_back(cur, i);
        cur = cur->child(i);
        descended = true;
        break;
      }
    }
    if (!descended) break;
  }
  d.redex = cur;
  d.depth = d.frames.size();
  return d;
}

ExprPtr Decomposition::fill(ExprPtr reduct) const {
  for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
    reduct = it->first->with_child(it->second, std::move(reduct));
  }
  return reduct;
}

std::optional<StepDist> prim_step(const ExprPtr& e, const Heap& h) {
  auto d = decompose(e);
  if (!d) return std::nullopt;
  auto inner = head_step(d->redex, h);
  if (!inner || d->frames.empty()) return inner;
  return inner->map([&](const StepOutcome& o) {
    return StepOutcome{d->fill(o.reduct), o.heap, o.cost, o.forks};
  });
}

bool is_reducible(const ExprPtr& e, const Heap& h) {
  auto d = decompose(e);
  if (!d) return false;
  const ExprPtr& r = d->redex;
  if (r->kind() == ExprKind::App && r->child(0)->is_value() && r->child(0)->value().is(Value::Kind::Closure)) {
    return true;
  }
  return head_step(r, h).has_value();
}

bool is_pure_step(const ExprPtr& e, const ExprPtr& e2) {
  auto d = decompose(e);
  if (!d) return false;
  switch (d->redex->kind()) {
    case ExprKind::Rec:
    case ExprKind::App:
    case ExprKind::UnOp:
    case ExprKind::BinOp:
    case ExprKind::If:
    case ExprKind::Pair:
    case ExprKind::Fst:
    case ExprKind::Snd:
    case ExprKind::InjL:
    case ExprKind::InjR:
    case ExprKind::Match:
      break;
    default:
      return false;
  }
  const Heap empty;
  auto step = prim_step(e, empty);
  if (!step || !step->is_dirac()) return false;
  const StepOutcome& o = step->entries().front().first;
  return o.cost == 0 && o.forks.empty() && o.heap == empty && expr_equal(o.reduct, e2);
}

std::optional<Value> eval_pure(const ExprPtr& e, std::size_t max_steps) {
  ExprPtr cur = e;
  const Heap empty;
  for (std::size_t i = 0; i <= max_steps; ++i) {
    if (cur->is_value()) return cur->value();
    auto step = prim_step(cur, empty);
    if (!step || !step->is_dirac()) return std::nullopt;
    const StepOutcome& o = step->entries().front().first;
    if (o.cost != 0 || !o.forks.empty() || !(o.heap == empty)) return std::nullopt;
    cur = o.reduct;
  }
  return std::nullopt;
}

}  // namespace phl

std::size_t std::hash<phl::StepOutcome>::operator()(const phl::StepOutcome& o) const {
  std::size_t h = phl::hash_combine(o.reduct->hash(), o.heap.hash());
  h = phl::hash_combine(h, phl::hash_rational(o.cost));
  for (const auto& f : o.forks) h = phl::hash_combine(h, f->hash());
  return h;
}
