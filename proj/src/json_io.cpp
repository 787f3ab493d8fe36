#include "phl/json_io.hpp"

#include <stdexcept>

#include "phl/parser.hpp"

namespace phl {

Json rational_json(const Rational& r) { return to_fraction_string(r); }

Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return make_rational(j.get<std::int64_t>());
  throw std::invalid_argument("expected a rational string, got " + j.dump());
}

Json heap_json(const Heap& h) {
  Json out = Json::object();
  for (const auto& [l, v] : h.cells()) out[pretty(Value::location(l))] = pretty(v);
  return out;
}

Json config_json(const Config& c) {
  Json threads = Json::array();
  for (const auto& t : c.threads) threads.push_back(pretty(t));
  return {{"threads", threads}, {"heap", heap_json(c.heap)}, {"cost", rational_json(c.cost)}};
}

Json step_trace_json(const ExprPtr& e, const Heap& h) {
  auto d = decompose(e);
  Json out;
  out["redex"] = d ? Json(pretty(d->redex)) : Json(nullptr);
  out["context_depth"] = d ? d->depth : 0;
  Json outcomes = Json::array();
  if (auto step = prim_step(e, h)) {
    outcomes = dist_json(*step, [](const StepOutcome& o) {
      Json forks = Json::array();
      for (const auto& f : o.forks) forks.push_back(pretty(f));
      return Json{{"reduct", pretty(o.reduct)},
                  {"heap", heap_json(o.heap)},
                  {"cost", rational_json(o.cost)},
                  {"forks", forks}};
    });
  }
  out["outcomes"] = outcomes;
  return out;
}

Json graph_json(const ConfigGraph& g) {
  Json nodes = Json::array();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const GraphNode& n = g.nodes[i];
    Json threads = Json::array();
    for (const auto& t : n.threads) threads.push_back(pretty(t));
    auto main = n.main_value();
    nodes.push_back({{"id", i},
                     {"threads", threads},
                     {"heap", heap_json(n.heap)},
                     {"terminal", n.terminal},
                     {"stuck", n.stuck},
                     {"main_value", main ? Json(pretty(*main)) : Json(nullptr)}});
  }
  Json actions = Json::array();
  for (const auto& a : g.actions) {
    Json edges = Json::array();
    for (const auto& e : a.edges) {
      edges.push_back({{"to", e.to}, {"prob", rational_json(e.prob)}, {"cost", rational_json(e.cost)}});
    }
    actions.push_back({{"node", a.node}, {"thread", a.thread}, {"edges", edges}});
  }
  return {{"nodes", nodes}, {"actions", actions}};
}

Json adequacy_json(const AdequacyReport& r) {
  Json out;
  out["steps"] = r.steps;
  out["postcondition_ok"] = r.postcondition_ok;
  out["counterexample"] = r.counterexample ? Json(pretty(*r.counterexample)) : Json(nullptr);
  out["progress_ok"] = r.progress_ok;
  if (r.stuck_config) {
    out["stuck"] = {{"config", config_json(*r.stuck_config)},
                    {"thread", *r.stuck_thread},
                    {"redex", pretty(r.stuck_redex)}};
  } else {
    out["stuck"] = nullptr;
  }
  out["expected_cost"] = rational_json(r.expected_cost);
  out["bound"] = rational_json(r.bound);
  out["bound_ok"] = r.bound_ok;
  out["ok"] = r.ok();
  return out;
}

namespace {

const char* violation_kind(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::Step: return "step";
    case Violation::Kind::Post: return "post";
    case Violation::Kind::Stuck: return "stuck";
    case Violation::Kind::Negative: return "negative";
    case Violation::Kind::Bound: return "bound";
  }
  return "?";
}

}  // namespace

Json check_json(const CheckReport& r, const ConfigGraph& g) {
  Json violations = Json::array();
  for (const auto& v : r.violations) {
    Json j{{"kind", violation_kind(v.kind)}, {"node", v.node}};
    j["action"] = v.action ? Json(*v.action) : Json(nullptr);
    j["thread"] = v.thread ? Json(*v.thread) : Json(nullptr);
    j["lhs"] = rational_json(v.lhs);
    j["rhs"] = rational_json(v.rhs);
    j["message"] = v.describe();
    violations.push_back(std::move(j));
  }
  return {{"accepted", r.accepted()},
          {"nodes", g.size()},
          {"constraints", r.constraints},
          {"violations", violations}};
}

Json mc_json(const McReport& r) {
  return {{"trials", r.trials},
          {"seed", r.seed},
          {"max_steps", r.max_steps},
          {"mean_cost", r.mean_cost},
          {"sample_stddev", r.sample_stddev},
          {"ci95", {r.ci95.first, r.ci95.second}},
          {"truncated_fraction", r.truncated_fraction},
          {"stuck_runs", r.stuck_runs},
          {"total_cost", rational_json(r.total_cost)}};
}

PotentialCertificate certificate_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("certificate must be a JSON object");
  PotentialCertificate cert;
  cert.bound = rational_from_json(j.at("bound"));
  if (j.contains("default")) cert.post.fallback = rational_from_json(j.at("default"));
  if (j.contains("post")) {
    for (const auto& c : j.at("post")) {
      const std::string text = c.at("pattern").get<std::string>();
      auto v = eval_pure(parse_program(text));
      if (!v) throw std::invalid_argument("post pattern '" + text + "' does not reduce to a value");
      cert.post.cases.push_back({*v, rational_from_json(c.at("value"))});
    }
  }
  for (const auto& [key, val] : j.at("nodes").items()) {
    std::size_t pos = 0;
    const unsigned long id = std::stoul(key, &pos);
    if (pos != key.size()) throw std::invalid_argument("bad node id '" + key + "'");
    cert.nodes[id] = rational_from_json(val);
  }
  return cert;
}

Json certificate_json(const PotentialCertificate& cert) {
  Json post = Json::array();
  for (const auto& c : cert.post.cases) {
    post.push_back({{"pattern", pretty(c.pattern)}, {"value", rational_json(c.value)}});
  }
  Json nodes = Json::object();
  for (const auto& [id, v] : cert.nodes) nodes[std::to_string(id)] = rational_json(v);
  return {{"bound", rational_json(cert.bound)},
          {"post", post},
          {"default", rational_json(cert.post.fallback)},
          {"nodes", nodes}};
}

}  // namespace phl
