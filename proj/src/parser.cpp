#include <cctype>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "phl/error.hpp"
#include "phl/parser.hpp"

namespace phl {
namespace {

enum class Tok {
  Int,
  Rat,
  Ident,
  Keyword,
  Wildcard,
  Symbol,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
  // Int / Rat payload.
  std::int64_t int_value = 0;
  Rational rat_value;
};

const std::map<std::string, int, std::less<>> kPrimArity = {
    {"tick", 1},   {"fork", 1}, {"ChooseUniform", 1}, {"ChooseWeighted", 1}, {"fst", 1},
    {"snd", 1},    {"inl", 1},  {"inr", 1},           {"Free", 1},           {"not", 1},
    {"head", 1},   {"tail", 1}, {"length", 1},        {"AllocN", 2},         {"Xchg", 2},
    {"FAA", 2},    {"range", 2}, {"ChooseRange", 2},  {"CmpXchg", 3},
};

bool is_keyword(std::string_view s) {
  static const char* const kWords[] = {"let", "in",    "rec",  "if",   "then", "else",
                                       "match", "with", "end", "true", "false"};
  for (const char* w : kWords) {
    if (s == w) return true;
  }
  return kPrimArity.count(s) > 0;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(std::move(t));
        return out;
      }
      const char c = src_[pos_];
      if (digit(c)) {
        lex_number(t);
      } else if (ident_start(c)) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
        t.text = std::string(src_.substr(start, pos_ - start));
        t.kind = t.text == "_" ? Tok::Wildcard : is_keyword(t.text) ? Tok::Keyword : Tok::Ident;
      } else {
        lex_symbol(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      if (std::isspace(static_cast<unsigned char>(src_[pos_]))) {
        advance();
      } else if (src_.substr(pos_, 2) == "//") {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view digits_at(std::size_t p) const {
    std::size_t q = p;
    while (q < src_.size() && digit(src_[q])) ++q;
    return src_.substr(p, q - p);
  }

  void lex_number(Token& t) {
    const std::size_t start = pos_;
    auto whole = digits_at(pos_);
    std::size_t after = pos_ + whole.size();
    // Decimal: 12.5
    if (after + 1 < src_.size() && src_[after] == '.' && digit(src_[after + 1])) {
      auto frac = digits_at(after + 1);
      std::size_t end = after + 1 + frac.size();
      while (pos_ < end) advance();
      t.kind = Tok::Rat;
      t.text = std::string(src_.substr(start, end - start));
      t.rat_value = parse_rational(t.text);
      return;
    }
    // Fraction literal: 1/3r
    if (after + 1 < src_.size() && src_[after] == '/' && digit(src_[after + 1])) {
      auto den = digits_at(after + 1);
      std::size_t r = after + 1 + den.size();
      if (r < src_.size() && src_[r] == 'r' && (r + 1 >= src_.size() || !ident_char(src_[r + 1]))) {
        const std::string spelled(src_.substr(start, r - start));
        Rational value;
        try {
          value = parse_rational(spelled);
        } catch (const std::invalid_argument&) {
          throw ParseError("fraction literal with zero denominator", line_, col_);
        }
        while (pos_ <= r) advance();
        t.kind = Tok::Rat;
        t.text = spelled + "r";
        t.rat_value = value;
        return;
      }
    }
    while (pos_ < after) advance();
    t.kind = Tok::Int;
    t.text = std::string(whole);
    mpz_class z(t.text);
    if (!z.fits_slong_p()) throw ParseError("integer literal out of range", t.line, t.column);
    t.int_value = z.get_si();
  }

  void lex_symbol(Token& t) {
    static const char* const kSymbols[] = {";;", ":=", "<-", "<=", "::", "&&", "||", "=>",
                                           "(",  ")",  "[",  "]",  ",",  "<",  "=",  "+",
                                           "-",  "*",  "/",  "!",  "|"};
    for (const char* s : kSymbols) {
      std::string_view sym(s);
      if (src_.substr(pos_, sym.size()) == sym) {
        t.kind = Tok::Symbol;
        t.text = std::string(sym);
        for (std::size_t i = 0; i < sym.size(); ++i) advance();
        return;
      }
    }
    throw ParseError(std::string("unexpected character '") + src_[pos_] + "'", line_, col_);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ExprPtr program() {
    ExprPtr e = seq();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at_symbol(std::string_view s) const { return peek().kind == Tok::Symbol && peek().text == s; }
  bool at_keyword(std::string_view s) const {
    return peek().kind == Tok::Keyword && peek().text == s;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().line, peek().column);
  }
  void expect_symbol(std::string_view s) {
    if (!at_symbol(s)) fail("expected '" + std::string(s) + "'");
    next();
  }
  void expect_keyword(std::string_view s) {
    if (!at_keyword(s)) fail("expected '" + std::string(s) + "'");
    next();
  }

  Binder binder() {
    if (peek().kind == Tok::Wildcard) {
      next();
      return "";
    }
    if (peek().kind != Tok::Ident) fail("expected a binder");
    return next().text;
  }

  struct Scope {
    Parser& p;
    std::size_t mark;
    explicit Scope(Parser& parser) : p(parser), mark(parser.scope_.size()) {}
    void bind(const Binder& b) {
      if (!b.empty()) p.scope_.push_back(b);
    }
    ~Scope() { p.scope_.resize(mark); }
  };

  bool in_scope(const std::string& x) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
      if (*it == x) return true;
    }
    return false;
  }

  // --- levels ---------------------------------------------------------------

  ExprPtr seq() {
    if (at_keyword("let")) {
      next();
      Binder x = binder();
      expect_symbol(":=");
      ExprPtr bound = seq();
      expect_keyword("in");
      Scope s(*this);
      s.bind(x);
      ExprPtr body = seq();
      return Expr::let(std::move(x), std::move(bound), std::move(body));
    }
    if (at_keyword("if")) {
      next();
      ExprPtr c = seq();
      expect_keyword("then");
      ExprPtr t = seq();
      expect_keyword("else");
      ExprPtr f = seq();
      return Expr::if_(std::move(c), std::move(t), std::move(f));
    }
    if (at_keyword("rec")) {
      next();
      Binder f = binder();
      std::vector<Binder> args;
      while (peek().kind == Tok::Ident || peek().kind == Tok::Wildcard) args.push_back(binder());
      if (args.empty()) fail("rec needs at least one argument binder");
      expect_symbol(":=");
      Scope s(*this);
      s.bind(f);
      for (const auto& a : args) s.bind(a);
      ExprPtr body = seq();
      for (std::size_t i = args.size(); i-- > 1;) body = make_rec("", args[i], std::move(body));
      return make_rec(std::move(f), args[0], std::move(body));
    }
    ExprPtr lhs = store();
    if (at_symbol(";;")) {
      next();
      return Expr::seq(std::move(lhs), seq());
    }
    return lhs;
  }

  ExprPtr store() {
    ExprPtr lhs = or_expr();
    if (at_symbol("<-")) {
      next();
      return Expr::make(ExprKind::Store, {std::move(lhs), or_expr()});
    }
    return lhs;
  }

  ExprPtr or_expr() {
    ExprPtr e = and_expr();
    while (at_symbol("||")) {
      next();
      e = Expr::binop(BinOpKind::Or, std::move(e), and_expr());
    }
    return e;
  }

  ExprPtr and_expr() {
    ExprPtr e = cmp();
    while (at_symbol("&&")) {
      next();
      e = Expr::binop(BinOpKind::And, std::move(e), cmp());
    }
    return e;
  }

  ExprPtr cmp() {
    ExprPtr e = cons();
    std::optional<BinOpKind> op;
    if (at_symbol("<")) op = BinOpKind::Lt;
    if (at_symbol("<=")) op = BinOpKind::Le;
    if (at_symbol("=")) op = BinOpKind::Eq;
    if (op) {
      next();
      e = Expr::binop(*op, std::move(e), cons());
    }
    return e;
  }

  ExprPtr cons() {
    ExprPtr e = add();
    if (at_symbol("::")) {
      next();
      return Expr::binop(BinOpKind::Cons, std::move(e), cons());
    }
    return e;
  }

  ExprPtr add() {
    ExprPtr e = mul();
    for (;;) {
      if (at_symbol("+")) {
        next();
        e = Expr::binop(BinOpKind::Add, std::move(e), mul());
      } else if (at_symbol("-")) {
        next();
        e = Expr::binop(BinOpKind::Sub, std::move(e), mul());
      } else {
        return e;
      }
    }
  }

  ExprPtr mul() {
    ExprPtr e = unary();
    for (;;) {
      if (at_symbol("*")) {
        next();
        e = Expr::binop(BinOpKind::Mul, std::move(e), unary());
      } else if (at_symbol("/")) {
        next();
        e = Expr::binop(BinOpKind::Div, std::move(e), unary());
      } else {
        return e;
      }
    }
  }

  ExprPtr unary() {
    if (at_symbol("-")) {
      next();
      if (peek().kind == Tok::Int) {
        const Token& t = next();
        return continue_app(Expr::val(Value::integer(-t.int_value)));
      }
      if (peek().kind == Tok::Rat) {
        const Token& t = next();
        return continue_app(Expr::val(Value::rational(-t.rat_value)));
      }
      return Expr::unop(UnOpKind::Neg, unary());
    }
    if (at_symbol("!")) {
      next();
      return Expr::make(ExprKind::Load, {unary()});
    }
    return app();
  }

  bool at_atom_start() const {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int:
      case Tok::Rat:
      case Tok::Ident:
        return true;
      case Tok::Keyword:
        return t.text == "true" || t.text == "false" || t.text == "match";
      case Tok::Symbol:
        return t.text == "(" || t.text == "[";
      default:
        return false;
    }
  }

  ExprPtr continue_app(ExprPtr head) {
    while (at_atom_start()) head = Expr::app(std::move(head), atom());
    return head;
  }

  ExprPtr app() {
    if (peek().kind == Tok::Keyword) {
      auto it = kPrimArity.find(peek().text);
      if (it != kPrimArity.end()) {
        const std::string name = next().text;
        std::vector<ExprPtr> args;
        for (int i = 0; i < it->second; ++i) {
          if (!at_atom_start()) fail("'" + name + "' expects " + std::to_string(it->second) + " argument(s)");
          args.push_back(atom());
        }
        return continue_app(build_prim(name, std::move(args)));
      }
    }
    if (!at_atom_start()) {
      fail(peek().kind == Tok::End ? "unexpected end of input" : "unexpected '" + peek().text + "'");
    }
    return continue_app(atom());
  }

  /// A closed function is already a value.
  static ExprPtr make_rec(Binder f, Binder x, ExprPtr body) {
    ExprPtr r = Expr::rec(std::move(f), std::move(x), std::move(body));
    if (!r->is_closed()) return r;
    return Expr::val(Value::closure(r->name(), r->arg(), r->child(0)));
  }

  static ExprPtr build_prim(const std::string& name, std::vector<ExprPtr> a) {
    auto one = [&](ExprKind k) { return Expr::make(k, {a[0]}); };
    if (name == "tick") return one(ExprKind::Tick);
    if (name == "fork") return one(ExprKind::Fork);
    if (name == "ChooseUniform") return one(ExprKind::ChooseUniform);
    if (name == "ChooseWeighted") return one(ExprKind::ChooseWeighted);
    if (name == "fst") return one(ExprKind::Fst);
    if (name == "snd") return one(ExprKind::Snd);
    if (name == "inl") {
      return a[0]->is_value() ? Expr::val(Value::inj_left(a[0]->value())) : one(ExprKind::InjL);
    }
    if (name == "inr") {
      return a[0]->is_value() ? Expr::val(Value::inj_right(a[0]->value())) : one(ExprKind::InjR);
    }
    if (name == "Free") return one(ExprKind::Free);
    if (name == "not") return Expr::unop(UnOpKind::Not, a[0]);
    if (name == "head") return Expr::unop(UnOpKind::Head, a[0]);
    if (name == "tail") return Expr::unop(UnOpKind::Tail, a[0]);
    if (name == "length") return Expr::unop(UnOpKind::Length, a[0]);
    if (name == "AllocN") return Expr::make(ExprKind::AllocN, {a[0], a[1]});
    if (name == "Xchg") return Expr::make(ExprKind::Xchg, {a[0], a[1]});
    if (name == "FAA") return Expr::make(ExprKind::FAA, {a[0], a[1]});
    if (name == "range") return Expr::binop(BinOpKind::Range, a[0], a[1]);
    if (name == "ChooseRange") {
      return Expr::make(ExprKind::ChooseUniform, {Expr::binop(BinOpKind::Range, a[0], a[1])});
    }
    return Expr::make(ExprKind::CmpXchg, {a[0], a[1], a[2]});
  }

  ExprPtr atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int:
        next();
        return Expr::val(Value::integer(t.int_value));
      case Tok::Rat:
        next();
        return Expr::val(Value::rational(t.rat_value));
      case Tok::Ident: {
        if (!in_scope(t.text)) throw UnboundVariable(t.text, t.line, t.column);
        next();
        return Expr::var(t.text);
      }
      case Tok::Keyword:
        if (t.text == "true" || t.text == "false") {
          next();
          return Expr::val(Value::boolean(t.text == "true"));
        }
        if (t.text == "match") return match();
        break;
      case Tok::Symbol:
        if (t.text == "(") return paren();
        if (t.text == "[") return list();
        break;
      default:
        break;
    }
    fail("expected an expression");
  }

  ExprPtr paren() {
    expect_symbol("(");
    if (at_symbol(")")) {
      next();
      return Expr::val(Value::unit());
    }
    ExprPtr e = seq();
    if (at_symbol(",")) {
      next();
      ExprPtr second = seq();
      expect_symbol(")");
      if (e->is_value() && second->is_value()) {
        return Expr::val(Value::pair(e->value(), second->value()));
      }
      return Expr::make(ExprKind::Pair, {std::move(e), std::move(second)});
    }
    expect_symbol(")");
    return e;
  }

  ExprPtr list() {
    expect_symbol("[");
    std::vector<ExprPtr> items;
    if (!at_symbol("]")) {
      items.push_back(seq());
      while (at_symbol(",")) {
        next();
        items.push_back(seq());
      }
    }
    expect_symbol("]");
    bool all_values = true;
    for (const auto& e : items) all_values = all_values && e->is_value();
    if (all_values) {
      std::vector<Value> vs;
      vs.reserve(items.size());
      for (const auto& e : items) vs.push_back(e->value());
      return Expr::val(Value::list(std::move(vs)));
    }
    ExprPtr tail = Expr::val(Value::list({}));
    for (std::size_t i = items.size(); i-- > 0;) {
      tail = Expr::binop(BinOpKind::Cons, items[i], std::move(tail));
    }
    return tail;
  }

  ExprPtr match() {
    expect_keyword("match");
    ExprPtr scrut = seq();
    expect_keyword("with");
    expect_keyword("inl");
    Binder left = binder();
    expect_symbol("=>");
    ExprPtr on_left;
    {
      Scope s(*this);
      s.bind(left);
      on_left = seq();
    }
    expect_symbol("|");
    expect_keyword("inr");
    Binder right = binder();
    expect_symbol("=>");
    ExprPtr on_right;
    {
      Scope s(*this);
      s.bind(right);
      on_right = seq();
    }
    expect_keyword("end");
    return Expr::match(std::move(scrut), std::move(left), std::move(on_left), std::move(right),
                       std::move(on_right));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::string> scope_;
};

}  // namespace

ExprPtr parse_program(std::string_view text) {
  Parser p(Lexer(text).run());
  return p.program();
}

ExprPtr override_let(const ExprPtr& program, const std::string& name, const ExprPtr& replacement) {
  // Walk the outermost let chain: App(Rec(_, x, body), bound).
  std::vector<ExprPtr> spine;
  ExprPtr cur = program;
  while (cur->kind() == ExprKind::App && cur->child(0)->kind() == ExprKind::Rec &&
         cur->child(0)->name().empty()) {
    const ExprPtr& fn = cur->child(0);
    if (fn->arg() == name) {
      ExprPtr rebuilt = cur->with_child(1, replacement);
      while (!spine.empty()) {
        ExprPtr outer = spine.back();
        spine.pop_back();
        rebuilt = outer->with_child(0, outer->child(0)->with_child(0, rebuilt));
      }
      return rebuilt;
    }
    spine.push_back(cur);
    cur = fn->child(0);
  }
  throw std::invalid_argument("no top-level let binds '" + name + "'");
}

}  // namespace phl
