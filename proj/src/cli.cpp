#include "phl/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "phl/analysis.hpp"
#include "phl/bound_expr.hpp"
#include "phl/error.hpp"
#include "phl/json_io.hpp"
#include "phl/mc.hpp"
#include "phl/parser.hpp"

namespace phl {
namespace {

struct Options {
  std::string file;
  bool json = false;
  std::string scheduler = "leftmost";
  std::size_t steps = 100;
  std::string bound;
  std::vector<std::string> vars;
  std::string cert;
  std::size_t max_nodes = ExploreLimits{}.max_nodes;
  std::size_t max_support = kDefaultMaxSupport;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  std::size_t max_steps = 10000;
  std::vector<std::string> defines;
  std::string phi;
  std::vector<std::string> post;
  std::string post_default = "0";
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A failed check: the report is already printed.
struct CheckFailed {};

std::pair<std::string, std::string> split_binding(const std::string& text, const char* what) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError(std::string(what) + " expects NAME=VALUE, got '" + text + "'");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExprPtr load_program(const Options& o) {
  ExprPtr e = parse_program(read_file(o.file));
  for (const auto& d : o.defines) {
    auto [name, literal] = split_binding(d, "--define");
    e = override_let(e, name, parse_program(literal));
  }
  return e;
}

std::map<std::string, Rational> bound_env(const Options& o) {
  std::map<std::string, Rational> env;
  for (const auto& v : o.vars) {
    auto [name, value] = split_binding(v, "--var");
    env[name] = parse_rational(value);
  }
  return env;
}

std::string decimal_text(const Rational& r) {
  const std::string exact = terminating_decimal(r);
  if (!exact.empty()) return "= " + exact;
  char buf[64];
  std::snprintf(buf, sizeof buf, "~ %.12g", to_double(r));
  return buf;
}

std::string double_text(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", d);
  return buf;
}

void print_json(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------
// Subcommands

void cmd_parse(const Options& o, std::ostream& out) {
  const ExprPtr e = load_program(o);
  const std::string text = pretty(e);
  const bool stable = expr_equal(parse_program(text), e);
  if (o.json) {
    print_json(out, {{"ast", text}, {"round_trip", stable}});
  } else {
    out << text << '\n';
  }
  if (!stable) throw CheckFailed{};
}

void cmd_run(const Options& o, std::ostream& out) {
  const ExprPtr e = load_program(o);
  std::vector<TraceEntry> trace;
  const SampleResult r = sample_run(e, o.seed, o.max_steps, Scheduler::parse(o.scheduler), 0, &trace);
  const char* status = r.terminated ? "terminated" : r.stuck ? "stuck" : "truncated";
  if (o.json) {
    Json steps = Json::array();
    for (const auto& t : trace) {
      steps.push_back({{"thread", t.thread}, {"redex", pretty(t.redex)}, {"cost", rational_json(t.cost)}});
    }
    print_json(out, {{"seed", o.seed},
                     {"scheduler", o.scheduler},
                     {"status", status},
                     {"steps", steps},
                     {"final", config_json(r.final)}});
  } else {
    for (std::size_t i = 0; i < trace.size(); ++i) {
      out << "step " << i << ": thread " << trace[i].thread;
      if (trace[i].cost != 0) out << " (+" << to_short_string(trace[i].cost) << ")";
      out << "  " << pretty(trace[i].redex) << '\n';
    }
    out << status << " after " << r.steps << " steps, cost " << to_short_string(r.final.cost);
    if (auto v = r.final.main_value()) out << ", result " << pretty(*v);
    out << '\n';
  }
  if (r.stuck) throw CheckFailed{};
}

void cmd_graph(const Options& o, std::ostream& out) {
  const ExprPtr e = load_program(o);
  std::optional<Scheduler> s;
  if (o.scheduler != "demonic") s = Scheduler::parse(o.scheduler);
  print_json(out, graph_json(explore_graph(e, s, {o.max_nodes})));
}

void cmd_expect(const Options& o, std::ostream& out) {
  const ExprPtr e = load_program(o);
  const ConfigGraph g = explore_graph(e, Scheduler::parse(o.scheduler), {o.max_nodes});
  const NodeCost root = solve_expected_cost(g).front();

  const char* status = root.status == CostStatus::Finite           ? "finite"
                       : root.status == CostStatus::Nonterminating ? "nonterminating"
                                                                   : "stuck-reachable";
  bool ok = root.status == CostStatus::Finite;
  std::optional<double> bound;
  if (ok && !o.bound.empty()) {
    bound = eval_bound(o.bound, bound_env(o));
    ok = within_bound(root.value, *bound);
  }

  if (o.json) {
    Json j{{"status", status}, {"scheduler", o.scheduler}, {"nodes", g.size()}};
    if (root.status == CostStatus::Finite) {
      j["expected"] = rational_json(root.value);
      j["decimal"] = to_double(root.value);
    } else {
      j["expected"] = nullptr;
      j["decimal"] = nullptr;
    }
    if (bound) {
      j["bound"] = {{"expr", o.bound}, {"value", *bound}, {"holds", ok}};
    } else {
      j["bound"] = nullptr;
    }
    print_json(out, j);
  } else if (root.status != CostStatus::Finite) {
    out << status << '\n';
  } else {
    out << to_short_string(root.value) << " (" << decimal_text(root.value) << ")\n";
    if (bound) {
      out << "bound " << o.bound << " = " << double_text(*bound) << (ok ? " holds" : " violated")
          << '\n';
    }
  }
  if (!ok) throw CheckFailed{};
}

void cmd_check_certificate(const Options& o, std::ostream& out) {
  const ExprPtr e = load_program(o);
  const ConfigGraph g = explore_graph(e, std::nullopt, {o.max_nodes});
  Json raw;
  try {
    raw = Json::parse(read_file(o.cert));
  } catch (const Json::parse_error& ex) {
    throw UsageError("malformed certificate: " + std::string(ex.what()));
  }
  const PotentialCertificate cert = certificate_from_json(raw);
  const CheckReport r = check_certificate(g, cert);
  if (o.json) {
    print_json(out, check_json(r, g));
  } else if (r.accepted()) {
    out << "accepted: bound " << to_short_string(cert.bound) << " (" << g.size() << " nodes, "
        << r.constraints << " constraints)\n";
  } else {
    out << "rejected: " << r.violations.size() << " violated constraint(s)\n";
    for (const auto& v : r.violations) out << "  " << v.describe() << '\n';
  }
  if (!r.accepted()) throw CheckFailed{};
}

void cmd_check_adequacy(const Options& o, std::ostream& out) {
  if (o.bound.empty()) throw UsageError("check needs --cert FILE or --bound EXPR");
  const ExprPtr e = load_program(o);
  AdequacyOptions a;
  a.steps = o.steps;
  a.scheduler = Scheduler::parse(o.scheduler);
  a.max_support = o.max_support;
  try {
    a.bound = parse_rational(o.bound);
  } catch (const std::invalid_argument&) {
    // Symbolic bounds are evaluated numerically and relaxed by the slack.
    a.bound = Rational(eval_bound(o.bound, bound_env(o)) + kBoundSlack);
  }
  if (!o.phi.empty()) a.phi = parse_program(o.phi);
  a.post.fallback = parse_rational(o.post_default);
  for (const auto& p : o.post) {
    auto [pattern, value] = split_binding(p, "--post");
    auto v = eval_pure(parse_program(pattern));
    if (!v) throw UsageError("post pattern '" + pattern + "' does not reduce to a value");
    a.post.cases.push_back({*v, parse_rational(value)});
  }

  const AdequacyReport r = adequacy_check(e, a);
  if (o.json) {
    print_json(out, adequacy_json(r));
  } else {
    out << "steps: " << r.steps << '\n';
    out << "postcondition: ";
    if (r.postcondition_ok) {
      out << (a.phi ? "ok" : "not checked") << '\n';
    } else {
      out << "fails on " << pretty(*r.counterexample) << '\n';
    }
    out << "progress: ";
    if (r.progress_ok) {
      out << "ok\n";
    } else {
      out << "stuck in thread " << *r.stuck_thread << " at " << pretty(r.stuck_redex) << '\n';
    }
    out << "expected cost: " << to_short_string(r.expected_cost) << (r.bound_ok ? " <= " : " > ")
        << to_short_string(r.bound) << (r.bound_ok ? " ok" : " violated") << '\n';
  }
  if (!r.ok()) throw CheckFailed{};
}

void cmd_sample(const Options& o, std::ostream& out) {
  if (o.trials < 2) throw UsageError("--trials must be at least 2");
  const ExprPtr e = load_program(o);
  const McReport r = estimate(e, o.trials, o.seed, o.max_steps, Scheduler::parse(o.scheduler));
  if (o.json) {
    print_json(out, mc_json(r));
  } else {
    out << "mean " << double_text(r.mean_cost) << ", sd " << double_text(r.sample_stddev)
        << ", 95% CI [" << double_text(r.ci95.first) << ", " << double_text(r.ci95.second) << "]\n";
    out << "trials " << r.trials << ", seed " << r.seed << ", truncated "
        << double_text(r.truncated_fraction) << ", stuck " << r.stuck_runs << '\n';
  }
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("file", o.file, "Program (.phl)")->required();
  sub->add_flag("--json", o.json, "Machine-readable output");
  sub->add_option("--define", o.defines, "Override a top-level let: NAME=LITERAL");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interpreter and expected-cost analyzer for probabilistic heap programs", "phl"};
  app.require_subcommand(1);
  Options o;

  auto* parse = app.add_subcommand("parse", "Parse and pretty-print");
  add_common(parse, o);

  auto* run = app.add_subcommand("run", "One seeded run with a step trace");
  add_common(run, o);
  run->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  run->add_option("--max-steps", o.max_steps, "Step limit per run")->capture_default_str();
  run->add_option("--scheduler", o.scheduler, "leftmost, round-robin or fixed:i,j,...")->capture_default_str();

  auto* graph = app.add_subcommand("graph", "Dump the configuration graph as JSON");
  add_common(graph, o);
  graph->add_option("--scheduler", o.scheduler, "leftmost, round-robin, fixed:i,j,... or demonic");
  graph->add_option("--max-nodes", o.max_nodes, "Graph exploration limit")->capture_default_str();

  auto* expect = app.add_subcommand("expect", "Exact expected cost");
  add_common(expect, o);
  expect->add_option("--scheduler", o.scheduler, "leftmost, round-robin or fixed:i,j,...")->capture_default_str();
  expect->add_option("--max-nodes", o.max_nodes, "Graph exploration limit")->capture_default_str();
  expect->add_option("--bound", o.bound, "Bound expression to compare against");
  expect->add_option("--var", o.vars, "Bound variable: NAME=RATIONAL");

  auto* check = app.add_subcommand("check", "Check a potential certificate or the adequacy clauses");
  add_common(check, o);
  check->add_option("--cert", o.cert, "Certificate JSON");
  check->add_option("--max-nodes", o.max_nodes, "Graph exploration limit")->capture_default_str();
  check->add_option("--steps", o.steps, "Steps for the adequacy check")->capture_default_str();
  check->add_option("--bound", o.bound, "Expected-cost bound p");
  check->add_option("--var", o.vars, "Bound variable: NAME=RATIONAL");
  check->add_option("--scheduler", o.scheduler, "leftmost, round-robin or fixed:i,j,...")->capture_default_str();
  check->add_option("--max-support", o.max_support, "Support size limit for n-step distributions")->capture_default_str();
  check->add_option("--phi", o.phi, "Postcondition predicate, e.g. \"rec _ v := v = ()\"");
  check->add_option("--post", o.post, "Postcondition potential case: PATTERN=RATIONAL");
  check->add_option("--post-default", o.post_default, "Postcondition potential for unmatched values")->capture_default_str();

  auto* sample = app.add_subcommand("sample", "Monte Carlo estimate");
  add_common(sample, o);
  sample->add_option("--trials", o.trials, "Number of runs")->capture_default_str();
  sample->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  sample->add_option("--max-steps", o.max_steps, "Step limit per run")->capture_default_str();
  sample->add_option("--scheduler", o.scheduler, "leftmost, round-robin or fixed:i,j,...")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "phl: " << ex.what() << '\n';
    return kExitUsage;
  }

  try {
    if (parse->parsed()) {
      cmd_parse(o, out);
    } else if (run->parsed()) {
      cmd_run(o, out);
    } else if (graph->parsed()) {
      cmd_graph(o, out);
    } else if (expect->parsed()) {
      cmd_expect(o, out);
    } else if (check->parsed()) {
      if (o.cert.empty()) {
        cmd_check_adequacy(o, out);
      } else {
        cmd_check_certificate(o, out);
      }
    } else if (sample->parsed()) {
      cmd_sample(o, out);
    }
  } catch (const CheckFailed&) {
    return kExitCheckFailed;
  } catch (const ParseError& ex) {
    err << o.file << ":" << ex.what() << '\n';
    return kExitUsage;
  } catch (const ResourceLimit& ex) {
    err << "phl: " << ex.what() << '\n';
    return kExitResourceLimit;
  } catch (const std::exception& ex) {
    err << "phl: " << ex.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace phl
