#include "phl/analysis.hpp"
#include "phl/error.hpp"

namespace phl {

std::string Violation::describe() const {
  std::string where = "node " + std::to_string(node);
  if (action) where += ", action " + std::to_string(*action);
  if (thread) where += " (thread " + std::to_string(*thread) + ")";
  const std::string l = to_short_string(lhs);
  const std::string r = to_short_string(rhs);
  switch (kind) {
    case Kind::Step:
      return where + ": expected successor potential plus step cost " + l + " > potential " + r;
    case Kind::Post:
      return where + ": postcondition potential " + l + " > potential " + r;
    case Kind::Stuck:
      return where + ": configuration is stuck";
    case Kind::Negative:
      return where + ": negative potential " + l;
    case Kind::Bound:
      return where + ": initial potential " + l + " > claimed bound " + r;
  }
  return where;
}

CheckReport check_certificate(const ConfigGraph& g, const PotentialCertificate& cert) {
  std::vector<Rational> phi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto it = cert.nodes.find(i);
    if (it == cert.nodes.end()) throw MissingNodePotential(i);
    phi[i] = it->second;
  }

  CheckReport report;
  auto require = [&](bool ok, Violation v) {
    ++report.constraints;
    if (!ok) report.violations.push_back(std::move(v));
  };

  for (std::size_t i = 0; i < g.size(); ++i) {
    const GraphNode& node = g.nodes[i];
    require(phi[i] >= 0, {Violation::Kind::Negative, i, {}, {}, phi[i], Rational(0)});
    require(!node.stuck, {Violation::Kind::Stuck, i, {}, {}, Rational(0), Rational(0)});
    if (auto v = node.main_value()) {
      const Rational p = cert.post(*v);
      require(p <= phi[i], {Violation::Kind::Post, i, {}, {}, p, phi[i]});
    }
    for (std::size_t a : g.node_actions[i]) {
      const GraphAction& act = g.actions[a];
      Rational lhs;
      for (const auto& e : act.edges) lhs += e.prob * (phi[e.to] + e.cost);
      require(lhs <= phi[i], {Violation::Kind::Step, i, a, act.thread, lhs, phi[i]});
    }
  }
  if (!g.nodes.empty()) {
    require(phi[0] <= cert.bound, {Violation::Kind::Bound, 0, {}, {}, phi[0], cert.bound});
  }
  return report;
}

}  // namespace phl
