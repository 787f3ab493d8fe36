#include <doctest.h>

#include <cmath>
#include <gmpxx.h>
#include <random>
#include <set>

#include "phl/bound_expr.hpp"
#include "phl/error.hpp"
#include "phl/json_io.hpp"
#include "support.hpp"

using namespace phl;
using phl::test::q;

namespace {

const char* const kQuicksortCost = "2*n*(1 + log(4/3, n))";

ExprPtr unit_predicate() { return parse_program("rec _ v := v = ()"); }

/// Truncated expected cost of the coin toss after n leftmost steps: the k-th
/// tick fires at step 7k - 3 and needs k - 1 tails before it.
Rational coin_truncated(std::size_t n) {
  Rational sum;
  for (long k = 1; 7 * k - 3 <= static_cast<long>(n); ++k) sum += Rational(2) / Rational(mpz_class(1) << k);
  return sum;
}

/// Bit flips needed to count from 0 to m.
long counter_flips(long m) {
  long flips = 0;
  for (long x = 0; x < m; ++x) {
    long y = x;
    ++flips;
    while (y & 1) {
      ++flips;
      y >>= 1;
    }
  }
  return flips;
}

/// ln x to ~200 bits via ln x = 2 atanh((x - 1)/(x + 1)).
mpf_class ln_hp(const mpf_class& x) {
  const mpf_class t = (x - 1) / (x + 1);
  const mpf_class t2 = t * t;
  mpf_class term = t, sum = 0;
  for (int k = 1; k < 4000; k += 2) {
    sum += term / k;
    term *= t2;
  }
  return 2 * sum;
}

double quicksort_bound(long n) {
  if (n == 0) return 0.0;
  return eval_bound(kQuicksortCost, {{"n", Rational(n)}});
}

PostPotential unit_post(const Rational& r) {
  PostPotential p;
  p.cases.push_back({Value::unit(), r});
  return p;
}

std::vector<test::Constraint> broken(const std::vector<test::Constraint>& cs) {
  std::vector<test::Constraint> out;
  for (const auto& c : cs) {
    if (c.violated()) out.push_back(c);
  }
  return out;
}

/// Checker output agrees with the independent constraint evaluation.
void agrees(const ConfigGraph& g, const PotentialCertificate& cert) {
  const CheckReport r = check_certificate(g, cert);
  const auto expected = broken(test::certificate_constraints(g, cert));
  REQUIRE(r.violations.size() == expected.size());
  std::set<std::tuple<int, std::size_t, std::size_t>> want, got;
  for (const auto& c : expected) want.insert(c.key());
  for (const auto& v : r.violations) {
    got.insert({static_cast<int>(v.kind), v.node, v.action.value_or(SIZE_MAX)});
    for (const auto& c : expected) {
      if (c.key() == std::tuple(static_cast<int>(v.kind), v.node, v.action.value_or(SIZE_MAX)) &&
          v.kind != Violation::Kind::Negative && v.kind != Violation::Kind::Stuck) {
        CHECK(v.lhs == c.lhs);
        CHECK(v.rhs == c.rhs);
      }
    }
  }
  CHECK(want == got);
}

PotentialCertificate coin_certificate() {
  return certificate_from_json(Json::parse(test::read_text(test::source_path("programs/coin_toss.cert.json"))));
}

}  // namespace

TEST_CASE("pcost") {
  Config done = Config::initial(Expr::val(Value::unit()));
  done.cost = 3;
  CHECK(pcost(Dist<Config>::dirac(done), PostPotential::zero()) == 3);

  done.cost = 1;
  Config running = Config::initial(parse_program("tick 1"));
  running.cost = 1;
  const auto mu = Dist<Config>::from_weighted(std::vector<std::pair<Rational, Config>>{{q(1), done}, {q(1), running}});
  CHECK(pcost(mu, unit_post(q(4))) == 3);

  const Config coin = Config::initial(test::program("programs/coin_toss.phl"));
  CHECK(pcost(tp_step_n(coin, 0, Scheduler::leftmost()), PostPotential::zero()) == 0);
}

TEST_CASE("post potentials match by object equality") {
  PostPotential p;
  p.cases.push_back({Value::integer(1), q(5)});
  p.cases.push_back({Value::pair(Value::boolean(true), Value::unit()), q(2)});
  p.fallback = q(1, 3);
  CHECK(p(Value::integer(1)) == 5);
  CHECK(p(Value::rational(q(1))) == 5);
  CHECK(p(Value::pair(Value::boolean(true), Value::unit())) == 2);
  CHECK(p(Value::integer(2)) == q(1, 3));
  CHECK(p(Value::closure("", "x", Expr::var("x"))) == q(1, 3));
}

TEST_CASE("coin toss adequacy matches the closed form and path enumeration") {
  const ExprPtr coin = test::program("programs/coin_toss.phl");
  const Config init = Config::initial(coin);
  Rational previous;
  for (std::size_t n = 0; n <= 40; ++n) {
    CAPTURE(n);
    AdequacyOptions opts;
    opts.steps = n;
    opts.bound = 2;
    opts.phi = unit_predicate();
    const AdequacyReport r = adequacy_check(coin, opts);
    CHECK(r.ok());
    CHECK(r.expected_cost == coin_truncated(n));
    CHECK(r.expected_cost == test::path_sum_pcost(init, n, Scheduler::leftmost(), PostPotential::zero()));
    CHECK(r.expected_cost >= previous);
    previous = r.expected_cost;
  }
  CHECK(previous == q(63, 32));
}

TEST_CASE("adequacy clauses fail independently") {
  AdequacyOptions opts;
  opts.steps = 10;
  opts.bound = 100;
  const AdequacyReport stuck = adequacy_check(parse_program("1 + true"), opts);
  CHECK_FALSE(stuck.progress_ok);
  CHECK(stuck.postcondition_ok);
  CHECK(stuck.bound_ok);
  REQUIRE(stuck.stuck_redex);
  CHECK(pretty(stuck.stuck_redex) == "1 + true");
  CHECK(stuck.stuck_thread == 0u);

  opts.bound = 4;
  const AdequacyReport over = adequacy_check(parse_program("tick 5"), opts);
  CHECK(over.progress_ok);
  CHECK_FALSE(over.bound_ok);
  CHECK(over.expected_cost == 5);

  opts.bound = 10;
  opts.phi = parse_program("rec _ v := v < 2");
  const AdequacyReport post = adequacy_check(parse_program("ChooseUniform [1, 2, 3]"), opts);
  CHECK_FALSE(post.postcondition_ok);
  REQUIRE(post.counterexample);
  CHECK(values_equal(*post.counterexample, Value::integer(2)) == true);
  CHECK(post.progress_ok);
  CHECK(post.bound_ok);

  CHECK(holds(parse_program("rec _ v := v = 3"), Value::integer(3)));
  CHECK_FALSE(holds(parse_program("rec _ v := v = 3"), Value::integer(4)));
  CHECK_FALSE(holds(parse_program("rec _ v := tick 1 ;; true"), Value::integer(4)));
}

TEST_CASE("exact expected cost") {
  auto initial = [](const ExprPtr& e) {
    return solve_expected_cost(explore_graph(e, Scheduler::leftmost()))[0];
  };
  const NodeCost coin = initial(test::program("programs/coin_toss.phl"));
  CHECK(coin.status == CostStatus::Finite);
  CHECK(coin.value == 2);
  CHECK(initial(parse_program("tick 3 ;; tick 4")).value == 7);

  const NodeCost counter = initial(test::program("programs/counter.phl"));
  REQUIRE(counter.status == CostStatus::Finite);
  CHECK(counter_flips(4) == 7);
  CHECK(counter.value == Rational(counter_flips(4)) * 2);
  CHECK(counter.value <= 16);

  const ExprPtr loop = parse_program("let f := rec f _ := tick 1 ;; f () in f ()");
  CHECK(initial(loop).status == CostStatus::Nonterminating);
  const ExprPtr sometimes = parse_program(
      "let f := rec f _ := if ChooseUniform [true, false] then () else (tick 1 ;; f ()) in "
      "if ChooseUniform [true, false] then f () else (let g := rec g _ := g () in g ())");
  CHECK(initial(sometimes).status == CostStatus::Nonterminating);
  const ExprPtr stuck = parse_program("if ChooseUniform [true, false] then tick 1 else 1 + true");
  CHECK(initial(stuck).status == CostStatus::StuckReachable);

  const ConfigGraph demonic = explore_graph(parse_program(test::small_programs()[4]), std::nullopt);
  CHECK_THROWS_AS(solve_expected_cost(demonic), std::invalid_argument);
}

TEST_CASE("per-node values satisfy their equations") {
  for (const auto& src : test::small_programs()) {
    CAPTURE(src);
    const ConfigGraph g = explore_graph(parse_program(src), Scheduler::leftmost());
    const auto e = solve_expected_cost(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      REQUIRE(e[i].status == CostStatus::Finite);
      if (g.nodes[i].terminal) {
        CHECK(e[i].value == 0);
        continue;
      }
      Rational rhs;
      for (const auto& edge : g.actions[g.node_actions[i][0]].edges) rhs += edge.prob * (edge.cost + e[edge.to].value);
      CHECK(e[i].value == rhs);
    }
  }
}

TEST_CASE("truncations approach the exact value from below") {
  const ExprPtr coin = test::program("programs/coin_toss.phl");
  const Config init = Config::initial(coin);
  const Scheduler s = Scheduler::leftmost();
  Dist<Config> d = Dist<Config>::dirac(init);
  for (std::size_t n = 0; n < 160; ++n) {
    CHECK(pcost(d, PostPotential::zero()) <= 2);
    d = d.bind([&](const Config& x) { return tp_step_n(x, 1, s); });
  }
  CHECK(2.0 - to_double(pcost(d, PostPotential::zero())) < 1e-6);

  for (const auto& src : test::small_programs()) {
    const ExprPtr e = parse_program(src);
    const Rational exact = solve_expected_cost(explore_graph(e, s))[0].value;
    for (std::size_t n : {0, 5, 20, 80}) {
      CHECK(pcost(tp_step_n(Config::initial(e), n, s), PostPotential::zero()) <= exact);
    }
    CHECK(pcost(tp_step_n(Config::initial(e), 400, s), PostPotential::zero()) <= exact);
  }
}

TEST_CASE("scaling ticks scales the expected cost") {
  const Rational lambda = q(3, 7);
  const std::vector<ExprPtr> programs{test::program("programs/coin_toss.phl"), parse_program("tick 3 ;; tick 4"),
                                      parse_program(test::small_programs()[17]),
                                      parse_program(test::small_programs()[6])};
  for (const auto& e : programs) {
    const Rational base = solve_expected_cost(explore_graph(e, Scheduler::leftmost()))[0].value;
    const Rational scaled = solve_expected_cost(explore_graph(test::scale_ticks(e, lambda), Scheduler::leftmost()))[0].value;
    CHECK(base > 0);
    CHECK(scaled == lambda * base);
  }
}

TEST_CASE("coin toss certificate") {
  const ConfigGraph g = explore_graph(test::program("programs/coin_toss.phl"), std::nullopt);
  const PotentialCertificate cert = coin_certificate();
  const CheckReport ok = check_certificate(g, cert);
  CHECK(ok.accepted());
  agrees(g, cert);

  // Tails branch at 3: the choice node now needs 1/2 * 0 + 1/2 * 3.
  PotentialCertificate tails = cert;
  for (const auto& [node, v] : cert.nodes) {
    if (v == 2 && node >= 7) tails.nodes[node] = 3;
  }
  const CheckReport bad = check_certificate(g, tails);
  REQUIRE_FALSE(bad.accepted());
  bool choice_broken = false;
  for (const auto& v : bad.violations) {
    if (v.kind == Violation::Kind::Step && v.lhs == q(3, 2) && v.rhs == 1) choice_broken = true;
  }
  CHECK(choice_broken);
  agrees(g, tails);

  PotentialCertificate missing = cert;
  missing.nodes.erase(5);
  CHECK_THROWS_AS(check_certificate(g, missing), MissingNodePotential);

  PotentialCertificate low = cert;
  low.bound = q(3, 2);
  const CheckReport b = check_certificate(g, low);
  REQUIRE(b.violations.size() == 1);
  CHECK(b.violations[0].kind == Violation::Kind::Bound);
  CHECK(b.violations[0].describe() == "node 0: initial potential 2 > claimed bound 3/2");
}

TEST_CASE("raising any single coin toss potential is caught") {
  const ConfigGraph g = explore_graph(test::program("programs/coin_toss.phl"), std::nullopt);
  const PotentialCertificate cert = coin_certificate();
  for (std::size_t i = 0; i < g.size(); ++i) {
    CAPTURE(i);
    const PotentialCertificate raised = test::perturb_upward(g, cert, i);
    CHECK(raised.nodes.at(i) > cert.nodes.at(i));
    CHECK_FALSE(check_certificate(g, raised).accepted());
    agrees(g, raised);
  }
}

TEST_CASE("post constraints and stuck nodes") {
  const ConfigGraph g = explore_graph(parse_program("tick 1 ;; 5"), std::nullopt);
  PotentialCertificate cert;
  cert.bound = 1;
  const auto exact = solve_expected_cost(g);
  for (std::size_t i = 0; i < g.size(); ++i) cert.nodes[i] = exact[i].value;
  CHECK(check_certificate(g, cert).accepted());
  cert.post.cases.push_back({Value::integer(5), q(1)});
  CHECK_FALSE(check_certificate(g, cert).accepted());
  agrees(g, cert);

  const ConfigGraph s = explore_graph(parse_program("tick 1 ;; 1 + true"), std::nullopt);
  PotentialCertificate generous;
  generous.bound = 10;
  for (std::size_t i = 0; i < s.size(); ++i) generous.nodes[i] = 10;
  const CheckReport r = check_certificate(s, generous);
  CHECK(std::any_of(r.violations.begin(), r.violations.end(),
                    [](const Violation& v) { return v.kind == Violation::Kind::Stuck; }));
  agrees(s, generous);

  PotentialCertificate negative = generous;
  negative.nodes[0] = -1;
  CHECK_FALSE(check_certificate(s, negative).accepted());
}

TEST_CASE("exact solutions are certificates") {
  std::vector<ExprPtr> programs{test::program("programs/coin_toss.phl"), test::program("programs/counter.phl")};
  for (const auto& src : test::small_programs()) programs.push_back(parse_program(src));
  for (const auto& e : programs) {
    CAPTURE(pretty(e));
    const ConfigGraph g = explore_graph(e, Scheduler::leftmost());
    const auto exact = solve_expected_cost(g);
    PotentialCertificate cert;
    cert.bound = exact[0].value;
    for (std::size_t i = 0; i < g.size(); ++i) cert.nodes[i] = exact[i].value;
    CHECK(check_certificate(g, cert).accepted());

    PotentialCertificate tight = cert;
    tight.bound = cert.bound - q(1, 1000);
    CHECK(check_certificate(g, tight).accepted() == false);
  }
}

TEST_CASE("binary counter certificate") {
  const ConfigGraph g = explore_graph(test::program("programs/counter.phl"), std::nullopt);
  const PotentialCertificate cert = test::counter_certificate(g, q(1, 2), q(16));
  CHECK(cert.nodes.at(0) <= 16);
  const CheckReport r = check_certificate(g, cert);
  for (const auto& v : r.violations) MESSAGE(v.describe());
  CHECK(r.accepted());
}

TEST_CASE("boundary solve") {
  const ConfigGraph g = explore_graph(parse_program("tick 1 ;; tick 2 ;; tick 3"), Scheduler::leftmost());
  const auto free = solve_with_boundary(g, {});
  CHECK(free[0].value == 6);
  // Pin the node right after the first tick.
  std::size_t after = 0;
  for (const auto& act : g.actions) {
    for (const auto& e : act.edges) {
      if (e.cost == 1) after = e.to;
    }
  }
  const auto pinned = solve_with_boundary(g, {{after, q(100)}});
  CHECK(pinned[after].value == 100);
  CHECK(pinned[0].value == 101);
  const auto post = solve_with_boundary(g, {}, [] {
    PostPotential p;
    p.fallback = 4;
    return p;
  }());
  CHECK(post[0].value == 10);
}

TEST_CASE("composition of distributions") {
  std::mt19937_64 rng(99);
  const auto& sources = test::small_programs();
  const Scheduler s = Scheduler::leftmost();
  auto instance = [&](bool enforce) {
    CompositionInstance inst;
    std::vector<std::pair<Rational, Config>> support;
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int k = 0; k < n; ++k) {
      Config c = Config::initial(parse_program(sources[rng() % sources.size()]));
      c.cost = test::random_rational(rng, 4);
      support.emplace_back(Rational(1 + static_cast<long>(rng() % 5)), c);
    }
    inst.mu = Dist<Config>::from_weighted(support);
    const std::size_t steps = rng() % 12;
    inst.kappa = [steps, s](const Config& c) { return tp_step_n(c, steps, s); };
    inst.post.fallback = test::random_rational(rng, 3);
    for (const auto& [c, p] : inst.mu) {
      Rational slack = enforce ? test::random_rational(rng, 2) : Rational(0);
      inst.p.push_back(pcost(inst.kappa(c), inst.post) - c.cost + slack);
    }
    return inst;
  };

  for (int k = 0; k < 100; ++k) {
    const CompositionInstance inst = instance(true);
    REQUIRE(composition_premise(inst));
    CHECK(composition_check(inst));
  }

  // Dirac: the conclusion is the premise.
  CompositionInstance one = instance(true);
  one.mu = Dist<Config>::dirac(one.mu.entries()[0].first);
  one.p.resize(1);
  CHECK(composition_check(one) == composition_premise(one));

  // Underfunding one fiber can break the conclusion; search for a witness.
  bool witness = false;
  for (int k = 0; k < 50 && !witness; ++k) {
    CompositionInstance inst = instance(true);
    inst.p[0] -= Rational(5);
    CHECK_FALSE(composition_premise(inst));
    witness = !composition_check(inst);
  }
  CHECK(witness);
}

TEST_CASE("bound expressions") {
  const double c4 = eval_bound(kQuicksortCost, {{"n", Rational(4)}});
  const mpf_class hp = 8 * (1 + ln_hp(mpf_class(4, 256)) / ln_hp(mpf_class(4, 256) / 3));
  CHECK(std::abs(c4 - hp.get_d()) < 1e-12);
  CHECK(std::abs(c4 - 46.5507334345) < 1e-9);
  CHECK(eval_bound(kQuicksortCost, {{"n", Rational(1)}}) == 2.0);
  CHECK(eval_bound("2*m/p", {{"m", Rational(4)}, {"p", q(1, 2)}}) == 16.0);
  CHECK(eval_bound("floor(7/2) + ceil(1/3) - -1") == 5.0);
  CHECK(std::abs(eval_bound("ln(2)") - std::log(2.0)) < 1e-15);
  CHECK_THROWS_AS(eval_bound("log(2, 0)"), DomainError);
  CHECK_THROWS_AS(eval_bound("1 / 0"), DomainError);
  CHECK_THROWS_AS(eval_bound("2 * (1"), ParseError);
  CHECK_THROWS_AS(eval_bound("n + 1"), UnboundVariable);
  CHECK(within_bound(q(43, 6), c4));
  CHECK(within_bound(Rational(3), 3.0 - 1e-10));
  CHECK_FALSE(within_bound(Rational(3), 3.0 - 1e-8));
}

TEST_CASE("pivot split lemmas") {
  for (long n = 2; n <= 64; ++n) {
    const double cn = quicksort_bound(n);
    for (long k = (n + 3) / 4; k <= 3 * n / 4; ++k) {
      CHECK(quicksort_bound(k) + quicksort_bound(n - k) <= cn - 3.0 * static_cast<double>(n) + kBoundSlack);
    }
    for (long k = 1; k <= n; ++k) CHECK(quicksort_bound(k) + quicksort_bound(n - k) <= cn + kBoundSlack);
  }
}

TEST_CASE("quicksort exact cost agrees with the recursive oracle") {
  const ConfigGraph g = explore_graph(test::program("programs/qsort.phl"), Scheduler::leftmost());
  const auto e = solve_expected_cost(g);
  REQUIRE(e[0].status == CostStatus::Finite);
  CHECK(e[0].value == test::quicksort_comparisons({3, 1, 4, 2}, false));
  CHECK(e[0].value == q(43, 6));
  CHECK(within_bound(e[0].value, quicksort_bound(4)));

  // The oracle itself: averaged over all orders of 4 distinct keys.
  std::vector<long> keys{1, 2, 3, 4};
  Rational total;
  long perms = 0;
  do {
    total += test::quicksort_comparisons(keys, false);
    ++perms;
  } while (std::next_permutation(keys.begin(), keys.end()));
  CHECK(total / Rational(perms) == q(43, 6));
  CHECK(test::quicksort_comparisons({3, 1, 4, 2}, true) == q(41, 3));
}
