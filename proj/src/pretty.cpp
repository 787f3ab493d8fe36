#include <sstream>

#include "phl/parser.hpp"

namespace phl {
namespace {

// Precedence levels, loosest first; mirrors the grammar in parser.hpp.
enum Level : int {
  kSeq = 0,
  kStore,
  kOr,
  kAnd,
  kCmp,
  kCons,
  kAdd,
  kMul,
  kUnary,
  kApp,
  kAtom,
};

std::string binder_text(const Binder& b) { return b.empty() ? "_" : b; }

struct Printed {
  std::string text;
  int level;
};

std::string wrap(const Printed& p, int required) {
  return p.level < required ? "(" + p.text + ")" : p.text;
}

Printed print_value(const Value& v);
Printed print_expr(const ExprPtr& e);

std::string at(const ExprPtr& e, int required) { return wrap(print_expr(e), required); }
std::string at(const Value& v, int required) { return wrap(print_value(v), required); }

Printed print_number(bool negative, std::string magnitude) {
  if (negative) return {"-" + magnitude, kUnary};
  return {std::move(magnitude), kAtom};
}

Printed print_value(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Unit:
      return {"()", kAtom};
    case Value::Kind::Bool:
      return {v.as_bool() ? "true" : "false", kAtom};
    case Value::Kind::Int: {
      const auto z = v.as_int();
      // Spelled through mpz so INT64_MIN has a magnitude.
      mpz_class m(static_cast<long>(z));
      return print_number(z < 0, mpz_class(abs(m)).get_str());
    }
    case Value::Kind::Rat: {
      const Rational& r = v.as_rat();
      const Rational mag = abs(r);
      std::string dec = terminating_decimal(mag);
      if (dec.empty()) dec = mag.get_num().get_str() + "/" + mag.get_den().get_str() + "r";
      return print_number(r < 0, dec);
    }
    case Value::Kind::Loc: {
      const Loc l = v.as_loc();
      return {"<loc " + std::to_string(l.base) + "+" + std::to_string(l.offset) + ">", kAtom};
    }
    case Value::Kind::List: {
      std::string s = "[";
      const auto& items = v.as_list();
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) s += ", ";
        s += at(items[i], kSeq);
      }
      return {s + "]", kAtom};
    }
    case Value::Kind::Pair:
      return {"(" + at(v.first(), kSeq) + ", " + at(v.second(), kSeq) + ")", kAtom};
    case Value::Kind::InjL:
      return {"inl " + at(v.payload(), kAtom), kApp};
    case Value::Kind::InjR:
      return {"inr " + at(v.payload(), kAtom), kApp};
    case Value::Kind::Closure: {
      const auto& c = v.as_closure();
      return {"rec " + binder_text(c.fn) + " " + binder_text(c.arg) + " := " + at(c.body, kSeq), kSeq};
    }
  }
  return {"?", kAtom};
}

const char* binop_symbol(BinOpKind op) {
  switch (op) {
    case BinOpKind::Add: return "+";
    case BinOpKind::Sub: return "-";
    case BinOpKind::Mul: return "*";
    case BinOpKind::Div: return "/";
    case BinOpKind::Lt: return "<";
    case BinOpKind::Le: return "<=";
    case BinOpKind::Eq: return "=";
    case BinOpKind::And: return "&&";
    case BinOpKind::Or: return "||";
    case BinOpKind::Cons: return "::";
    case BinOpKind::Range: return "range";
  }
  return "?";
}

int binop_level(BinOpKind op) {
  switch (op) {
    case BinOpKind::Add:
    case BinOpKind::Sub: return kAdd;
    case BinOpKind::Mul:
    case BinOpKind::Div: return kMul;
    case BinOpKind::Lt:
    case BinOpKind::Le:
    case BinOpKind::Eq: return kCmp;
    case BinOpKind::And: return kAnd;
    case BinOpKind::Or: return kOr;
    case BinOpKind::Cons: return kCons;
    case BinOpKind::Range: return kApp;
  }
  return kAtom;
}

Printed keyword_app(const std::string& kw, std::span<const ExprPtr> args) {
  std::string s = kw;
  for (const auto& a : args) s += " " + at(a, kAtom);
  return {s, kApp};
}

Printed print_expr(const ExprPtr& e) {
  switch (e->kind()) {
    case ExprKind::Val:
      return print_value(e->value());
    case ExprKind::Var:
      return {e->name(), kAtom};
    case ExprKind::Rec: {
      std::string s = "rec " + binder_text(e->name()) + " " + binder_text(e->arg());
      ExprPtr body = e->child(0);
      while (body->kind() == ExprKind::Rec && body->name().empty()) {
        s += " " + binder_text(body->arg());
        body = body->child(0);
      }
      return {s + " := " + at(body, kSeq), kSeq};
    }
    case ExprKind::App: {
      const ExprPtr& fn = e->child(0);
      if (fn->kind() == ExprKind::Rec && fn->name().empty()) {
        const ExprPtr& body = fn->child(0);
        if (fn->arg().empty()) {
          return {at(e->child(1), kStore) + " ;; " + at(body, kSeq), kSeq};
        }
        return {"let " + fn->arg() + " := " + at(e->child(1), kSeq) + " in " + at(body, kSeq), kSeq};
      }
      return {at(fn, kApp) + " " + at(e->child(1), kAtom), kApp};
    }
    case ExprKind::UnOp: {
      const ExprPtr& a = e->child(0);
      switch (e->unop()) {
        case UnOpKind::Neg: {
          // A bare numeric literal after '-' would fold into a negative literal.
          const bool literal = a->is_value() && a->value().is_numeric();
          return {"-" + (literal ? "(" + at(a, kSeq) + ")" : at(a, kUnary)), kUnary};
        }
        case UnOpKind::Not: return keyword_app("not", e->children());
        case UnOpKind::Head: return keyword_app("head", e->children());
        case UnOpKind::Tail: return keyword_app("tail", e->children());
        case UnOpKind::Length: return keyword_app("length", e->children());
      }
      break;
    }
    case ExprKind::BinOp: {
      const BinOpKind op = e->binop();
      if (op == BinOpKind::Range) return keyword_app("range", e->children());
      const int lvl = binop_level(op);
      int left = lvl;
      int right = lvl + 1;
      if (op == BinOpKind::Cons) std::swap(left, right);
      if (lvl == kCmp) left = right = lvl + 1;
      return {at(e->child(0), left) + " " + binop_symbol(op) + " " + at(e->child(1), right), lvl};
    }
    case ExprKind::If:
      return {"if " + at(e->child(0), kSeq) + " then " + at(e->child(1), kSeq) + " else " +
                  at(e->child(2), kSeq),
              kSeq};
    case ExprKind::Pair:
      return {"(" + at(e->child(0), kSeq) + ", " + at(e->child(1), kSeq) + ")", kAtom};
    case ExprKind::Fst: return keyword_app("fst", e->children());
    case ExprKind::Snd: return keyword_app("snd", e->children());
    case ExprKind::InjL: return keyword_app("inl", e->children());
    case ExprKind::InjR: return keyword_app("inr", e->children());
    case ExprKind::Match:
      return {"match " + at(e->child(0), kSeq) + " with inl " + binder_text(e->name()) + " => " +
                  at(e->child(1), kSeq) + " | inr " + binder_text(e->arg()) + " => " +
                  at(e->child(2), kSeq) + " end",
              kAtom};
    case ExprKind::AllocN: return keyword_app("AllocN", e->children());
    case ExprKind::Free: return keyword_app("Free", e->children());
    case ExprKind::Load: return {"!" + at(e->child(0), kUnary), kUnary};
    case ExprKind::Store:
      return {at(e->child(0), kOr) + " <- " + at(e->child(1), kOr), kStore};
    case ExprKind::CmpXchg: return keyword_app("CmpXchg", e->children());
    case ExprKind::Xchg: return keyword_app("Xchg", e->children());
    case ExprKind::FAA: return keyword_app("FAA", e->children());
    case ExprKind::Fork: return keyword_app("fork", e->children());
    case ExprKind::Tick: return keyword_app("tick", e->children());
    case ExprKind::ChooseUniform: return keyword_app("ChooseUniform", e->children());
    case ExprKind::ChooseWeighted: return keyword_app("ChooseWeighted", e->children());
  }
  return {"?", kAtom};
}

}  // namespace

std::string pretty(const ExprPtr& e) { return print_expr(e).text; }

std::string pretty(const Value& v) { return print_value(v).text; }

}  // namespace phl
