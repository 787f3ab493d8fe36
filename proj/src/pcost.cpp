#include "phl/analysis.hpp"

namespace phl {

Rational PostPotential::operator()(const Value& v) const {
  for (const auto& c : cases) {
    if (values_equal(v, c.pattern) == true) return c.value;
  }
  return fallback;
}

Rational pcost(const Dist<Config>& mu, const PostPotential& post) {
  return mu.expect([&](const Config& c) {
    Rational r = c.cost;
    if (auto v = c.main_value()) r += post(*v);
    return r;
  });
}

bool holds(const ExprPtr& phi, const Value& v) {
  auto r = eval_pure(Expr::app(phi, Expr::val(v)));
  return r && r->is(Value::Kind::Bool) && r->as_bool();
}

AdequacyReport adequacy_check(const ExprPtr& e, const AdequacyOptions& opts) {
  const Dist<Config> mu = tp_step_n(Config::initial(e), opts.steps, opts.scheduler, opts.max_support);

  AdequacyReport r;
  r.steps = opts.steps;
  r.bound = opts.bound;
  for (const auto& [c, p] : mu) {
    if (opts.phi && r.postcondition_ok) {
      if (auto v = c.main_value(); v && c.terminated() && !holds(opts.phi, *v)) {
        r.postcondition_ok = false;
        r.counterexample = *v;
      }
    }
    if (r.progress_ok) {
      if (auto i = stuck_thread(c)) {
        r.progress_ok = false;
        r.stuck_config = c;
        r.stuck_thread = *i;
        r.stuck_redex = decompose(c.threads[*i])->redex;
      }
    }
  }
  r.expected_cost = pcost(mu, opts.post);
  r.bound_ok = r.expected_cost <= r.bound;
  return r;
}

namespace {

Rational accumulated(const Dist<Config>& mu) {
  return mu.expect([](const Config& c) { return c.cost; });
}

}  // namespace

bool composition_premise(const CompositionInstance& inst) {
  const auto& entries = inst.mu.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Config& x = entries[i].first;
    if (pcost(inst.kappa(x), inst.post) > inst.p.at(i) + x.cost) return false;
  }
  return true;
}

bool composition_check(const CompositionInstance& inst) {
  const Dist<Config> composed = inst.mu.bind(inst.kappa);
  return pcost(composed, inst.post) <= accumulated(inst.mu) + inst.mu.expect_vector(inst.p);
}

}  // namespace phl
