#include "phl/syntax.hpp"

#include <algorithm>
#include <stdexcept>

namespace phl {

// ---------------------------------------------------------------------------
// Value

Value Value::list(std::vector<Value> items) {
  return Value(ListV{std::make_shared<const std::vector<Value>>(std::move(items))});
}

Value Value::pair(Value a, Value b) {
  return Value(PairV{std::make_shared<const std::pair<Value, Value>>(std::move(a), std::move(b))});
}

Value Value::inj_left(Value v) { return Value(InjLV{std::make_shared<const Value>(std::move(v))}); }

Value Value::inj_right(Value v) { return Value(InjRV{std::make_shared<const Value>(std::move(v))}); }

Value Value::closure(Binder fn, Binder arg, ExprPtr body) {
  for (const auto& x : body->free_vars()) {
    if (x != fn && x != arg) {
      throw std::invalid_argument("closure body has free variable '" + x + "'");
    }
  }
  return Value(ClosureV{std::move(fn), std::move(arg), std::move(body)});
}

const Value& Value::payload() const {
  if (const auto* l = std::get_if<InjLV>(&data_)) return *l->payload;
  return *std::get<InjRV>(data_).payload;
}

Rational Value::numeric() const {
  if (is(Kind::Int)) return Rational(static_cast<long>(as_int()));
  return as_rat();
}

bool Value::comparable() const {
  switch (kind()) {
    case Kind::Closure:
      return false;
    case Kind::List:
      return std::all_of(as_list().begin(), as_list().end(),
                         [](const Value& v) { return v.comparable(); });
    case Kind::Pair:
      return first().comparable() && second().comparable();
    case Kind::InjL:
    case Kind::InjR:
      return payload().comparable();
    default:
      return true;
  }
}

bool Value::contains_loc() const {
  switch (kind()) {
    case Kind::Loc:
      return true;
    case Kind::List:
      return std::any_of(as_list().begin(), as_list().end(),
                         [](const Value& v) { return v.contains_loc(); });
    case Kind::Pair:
      return first().contains_loc() || second().contains_loc();
    case Kind::InjL:
    case Kind::InjR:
      return payload().contains_loc();
    case Kind::Closure:
      return as_closure().body->contains_loc();
    default:
      return false;
  }
}

std::size_t Value::hash() const {
  std::size_t h = static_cast<std::size_t>(kind()) * 0x100000001B3ULL;
  switch (kind()) {
    case Kind::Unit:
      return h;
    case Kind::Bool:
      return hash_combine(h, as_bool() ? 1 : 2);
    case Kind::Int:
      return hash_combine(h, std::hash<std::int64_t>{}(as_int()));
    case Kind::Rat:
      return hash_combine(h, hash_rational(as_rat()));
    case Kind::Loc:
      return hash_combine(hash_combine(h, as_loc().base), static_cast<std::size_t>(as_loc().offset));
    case Kind::List:
      for (const auto& x : as_list()) h = hash_combine(h, x.hash());
      return hash_combine(h, as_list().size());
    case Kind::Pair:
      return hash_combine(hash_combine(h, first().hash()), second().hash());
    case Kind::InjL:
    case Kind::InjR:
      return hash_combine(h, payload().hash());
    case Kind::Closure: {
      const auto& c = as_closure();
      h = hash_combine(h, std::hash<std::string>{}(c.fn));
      h = hash_combine(h, std::hash<std::string>{}(c.arg));
      return hash_combine(h, c.body->hash());
    }
  }
  return h;
}

bool operator==(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Value::Kind::Unit:
      return true;
    case Value::Kind::Bool:
      return a.as_bool() == b.as_bool();
    case Value::Kind::Int:
      return a.as_int() == b.as_int();
    case Value::Kind::Rat:
      return a.as_rat() == b.as_rat();
    case Value::Kind::Loc:
      return a.as_loc() == b.as_loc();
    case Value::Kind::List: {
      const auto& x = a.as_list();
      const auto& y = b.as_list();
      return &x == &y || x == y;
    }
    case Value::Kind::Pair:
      return a.first() == b.first() && a.second() == b.second();
    case Value::Kind::InjL:
    case Value::Kind::InjR:
      return a.payload() == b.payload();
    case Value::Kind::Closure: {
      const auto& c = a.as_closure();
      const auto& d = b.as_closure();
      return c.fn == d.fn && c.arg == d.arg && expr_equal(c.body, d.body);
    }
  }
  return false;
}

std::optional<bool> values_equal(const Value& a, const Value& b) {
  if (!a.comparable() || !b.comparable()) return std::nullopt;
  if (a.is_numeric() && b.is_numeric()) return a.numeric() == b.numeric();
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Value::Kind::List: {
      const auto& x = a.as_list();
      const auto& y = b.as_list();
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!*values_equal(x[i], y[i])) return false;
      }
      return true;
    }
    case Value::Kind::Pair:
      return *values_equal(a.first(), b.first()) && *values_equal(a.second(), b.second());
    case Value::Kind::InjL:
    case Value::Kind::InjR:
      return values_equal(a.payload(), b.payload());
    default:
      return a == b;
  }
}

std::vector<std::string> free_vars(const Value& v) {
  std::vector<std::string> out;
  if (v.is(Value::Kind::Closure)) {
    const auto& c = v.as_closure();
    for (const auto& x : c.body->free_vars()) {
      if (x != c.fn && x != c.arg) out.push_back(x);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Expr

namespace {

void merge_into(std::vector<std::string>& into, const std::vector<std::string>& more) {
  if (more.empty()) return;
  std::vector<std::string> merged;
  merged.reserve(into.size() + more.size());
  std::set_union(into.begin(), into.end(), more.begin(), more.end(), std::back_inserter(merged));
  into = std::move(merged);
}

void erase_binder(std::vector<std::string>& fv, const std::string& b) {
  if (b.empty()) return;
  auto it = std::lower_bound(fv.begin(), fv.end(), b);
  if (it != fv.end() && *it == b) fv.erase(it);
}

}  // namespace

bool Expr::has_free(const std::string& x) const {
  return std::binary_search(free_vars_.begin(), free_vars_.end(), x);
}

void Expr::finalize() {
  std::size_t h = static_cast<std::size_t>(kind_) * 0xC2B2AE3D27D4EB4FULL;
  free_vars_.clear();
  contains_loc_ = false;
  size_ = 1;
  switch (kind_) {
    case ExprKind::Val:
      h = hash_combine(h, value_.hash());
      contains_loc_ = value_.contains_loc();
      break;
    case ExprKind::Var:
      h = hash_combine(h, std::hash<std::string>{}(name_));
      free_vars_.push_back(name_);
      break;
    case ExprKind::UnOp:
      h = hash_combine(h, static_cast<std::size_t>(unop_));
      break;
    case ExprKind::BinOp:
      h = hash_combine(h, static_cast<std::size_t>(binop_));
      break;
    case ExprKind::Rec:
    case ExprKind::Match:
      h = hash_combine(h, std::hash<std::string>{}(name_));
      h = hash_combine(h, std::hash<std::string>{}(arg_));
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < children_.size(); ++i) {
    const auto& c = children_[i];
    h = hash_combine(h, c->hash());
    size_ += c->size_;
    contains_loc_ = contains_loc_ || c->contains_loc_;
    if (kind_ == ExprKind::Rec) {
      auto fv = c->free_vars_;
      erase_binder(fv, name_);
      erase_binder(fv, arg_);
      merge_into(free_vars_, fv);
    } else if (kind_ == ExprKind::Match && i > 0) {
      auto fv = c->free_vars_;
      erase_binder(fv, i == 1 ? name_ : arg_);
      merge_into(free_vars_, fv);
    } else {
      merge_into(free_vars_, c->free_vars_);
    }
  }
  hash_ = h;
}

ExprPtr Expr::val(Value v) {
  auto e = std::make_shared<Expr>(Token{});
  e->kind_ = ExprKind::Val;
  e->value_ = std::move(v);
  e->finalize();
  return e;
}

ExprPtr Expr::var(std::string x) {
  auto e = std::make_shared<Expr>(Token{});
  e->kind_ = ExprKind::Var;
  e->name_ = std::move(x);
  e->finalize();
  return e;
}

ExprPtr Expr::rec(Binder f, Binder x, ExprPtr body) {
  auto e = std::make_shared<Expr>(Token{});
  e->kind_ = ExprKind::Rec;
  e->name_ = std::move(f);
  e->arg_ = std::move(x);
  e->children_ = {std::move(body)};
  e->finalize();
  return e;
}

ExprPtr Expr::app(ExprPtr f, ExprPtr a) { return make(ExprKind::App, {std::move(f), std::move(a)}); }

ExprPtr Expr::unop(UnOpKind op, ExprPtr a) {
  auto e = std::make_shared<Expr>(Token{});
  e->kind_ = ExprKind::UnOp;
  e->unop_ = op;
  e->children_ = {std::move(a)};
  e->finalize();
  return e;
}

ExprPtr Expr::binop(BinOpKind op, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>(Token{});
  e->kind_ = ExprKind::BinOp;
  e->binop_ = op;
  e->children_ = {std::move(a), std::move(b)};
  e->finalize();
  return e;
}

ExprPtr Expr::if_(ExprPtr c, ExprPtr t, ExprPtr f) {
  return make(ExprKind::If, {std::move(c), std::move(t), std::move(f)});
}

ExprPtr Expr::match(ExprPtr scrut, Binder left, ExprPtr on_left, Binder right, ExprPtr on_right) {
  auto e = std::make_shared<Expr>(Token{});
  e->kind_ = ExprKind::Match;
  e->name_ = std::move(left);
  e->arg_ = std::move(right);
  e->children_ = {std::move(scrut), std::move(on_left), std::move(on_right)};
  e->finalize();
  return e;
}

ExprPtr Expr::make(ExprKind kind, std::vector<ExprPtr> children) {
  auto e = std::make_shared<Expr>(Token{});
  e->kind_ = kind;
  e->children_ = std::move(children);
  e->finalize();
  return e;
}

ExprPtr Expr::let(Binder x, ExprPtr bound, ExprPtr body) {
  return app(rec("", std::move(x), std::move(body)), std::move(bound));
}

ExprPtr Expr::seq(ExprPtr first, ExprPtr second) { return let("", std::move(first), std::move(second)); }

ExprPtr Expr::with_children(std::vector<ExprPtr> children) const {
  auto e = std::make_shared<Expr>(Token{});
  e->kind_ = kind_;
  e->value_ = value_;
  e->name_ = name_;
  e->arg_ = arg_;
  e->unop_ = unop_;
  e->binop_ = binop_;
  e->children_ = std::move(children);
  e->finalize();
  return e;
}

ExprPtr Expr::with_child(std::size_t i, ExprPtr child) const {
  auto kids = children_;
  kids.at(i) = std::move(child);
  return with_children(std::move(kids));
}

bool operator==(const Expr& a, const Expr& b) {
  if (&a == &b) return true;
  if (a.hash_ != b.hash_ || a.kind_ != b.kind_ || a.size_ != b.size_) return false;
  switch (a.kind_) {
    case ExprKind::Val:
      return a.value_ == b.value_;
    case ExprKind::Var:
      return a.name_ == b.name_;
    case ExprKind::UnOp:
      if (a.unop_ != b.unop_) return false;
      break;
    case ExprKind::BinOp:
      if (a.binop_ != b.binop_) return false;
      break;
    case ExprKind::Rec:
    case ExprKind::Match:
      if (a.name_ != b.name_ || a.arg_ != b.arg_) return false;
      break;
    default:
      break;
  }
  if (a.children_.size() != b.children_.size()) return false;
  for (std::size_t i = 0; i < a.children_.size(); ++i) {
    if (!expr_equal(a.children_[i], b.children_[i])) return false;
  }
  return true;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) { return a == b || *a == *b; }

std::optional<Value> to_val(const ExprPtr& e) {
  if (e->is_value()) return e->value();
  return std::nullopt;
}

ExprPtr of_val(Value v) { return Expr::val(std::move(v)); }

ExprPtr subst(const ExprPtr& e, const std::string& x, const Value& v) {
  if (x.empty() || !e->has_free(x)) return e;
  switch (e->kind()) {
    case ExprKind::Var:
      return Expr::val(v);
    case ExprKind::Rec:
      // x is free in e, so neither binder equals x.
      return e->with_child(0, subst(e->child(0), x, v));
    default: {
      std::vector<ExprPtr> kids;
      kids.reserve(e->children().size());
      for (std::size_t i = 0; i < e->children().size(); ++i) {
        const auto& c = e->child(i);
        const bool shadowed = e->kind() == ExprKind::Match &&
                              ((i == 1 && e->name() == x) || (i == 2 && e->arg() == x));
        kids.push_back(shadowed ? c : subst(c, x, v));
      }
      return e->with_children(std::move(kids));
    }
  }
}

}  // namespace phl
