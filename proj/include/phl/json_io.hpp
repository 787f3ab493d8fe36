#pragma once

// JSON encodings. Rationals are always "num/den" strings on output; inputs
// accept any spelling parse_rational understands, or JSON integers.

#include <json.hpp>

#include "phl/analysis.hpp"
#include "phl/mc.hpp"

namespace phl {

using Json = nlohmann::ordered_json;

Json rational_json(const Rational& r);
/// Throws std::invalid_argument.
Rational rational_from_json(const Json& j);

/// [{"value", "prob"}, ...] in support order.
template <class T, class F>
Json dist_json(const Dist<T>& d, F&& elem) {
  Json out = Json::array();
  for (const auto& [x, p] : d) {
    out.push_back({{"value", elem(x)}, {"prob", rational_json(p)}});
  }
  return out;
}

Json heap_json(const Heap& h);
Json config_json(const Config& c);

/// {redex, context_depth, outcomes: [...]} for one prim_step; null redex for values.
Json step_trace_json(const ExprPtr& e, const Heap& h);

Json graph_json(const ConfigGraph& g);

Json adequacy_json(const AdequacyReport& r);
Json check_json(const CheckReport& r, const ConfigGraph& g);
Json mc_json(const McReport& r);

/// Certificate file format:
///   {"bound": "2/1", "post": [{"pattern": "()", "value": "0/1"}],
///    "default": "0/1", "nodes": {"0": "2/1", ...}}
/// Patterns are closed expressions that reduce purely to a value.
PotentialCertificate certificate_from_json(const Json& j);
Json certificate_json(const PotentialCertificate& cert);

}  // namespace phl
