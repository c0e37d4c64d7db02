// Command-line front end: containment, query and database satisfiability,
// certain answers, PDL satisfiability and model checking, and the
// differential suite.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "dlrq/engine.hpp"
#include "dlrq/finite_model.hpp"
#include "dlrq/pdl_sat.hpp"
#include "dlrq/sexpr.hpp"

using namespace dlrq;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitError = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json stats_json(const red::ReductionStats& s) {
  std::size_t l2 = 0;
  json per = json::array();
  for (const auto& d : s.disjuncts) {
    l2 = std::max(l2, d.l2);
    per.push_back(d.l2);
  }
  return {{"formula_size", s.formula_size},
          {"l1", s.l1},
          {"l2", l2},
          {"l2_per_disjunct", per},
          {"partitions", s.partitions()},
          {"instantiations", s.instantiations()}};
}

json oracle_json(const engine::OracleRecord& o) {
  return {{"used", o.used}, {"bound", o.bound}, {"outcome", o.outcome}};
}

json report(const std::string& command, const std::string& verdict, const engine::ContainmentVerdict& v) {
  json j;
  j["command"] = command;
  j["verdict"] = verdict;
  j["stats"] = stats_json(v.stats);
  j["time_ms"] = v.time_ms;
  j["oracle"] = oracle_json(v.oracle);
  if (!v.diagnostic.empty()) j["diagnostic"] = v.diagnostic;
  return j;
}

int exit_for(engine::Verdict v) {
  switch (v) {
    case engine::Verdict::Contained: return 0;
    case engine::Verdict::NotContained: return 1;
    case engine::Verdict::Inconclusive: return 2;
  }
  return kExitError;
}

int exit_for(engine::Satisfiability v) {
  switch (v) {
    case engine::Satisfiability::Satisfiable: return 0;
    case engine::Satisfiability::Unsatisfiable: return 1;
    case engine::Satisfiability::Inconclusive: return 2;
  }
  return kExitError;
}

std::vector<std::string> split_tuple(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct Common {
  bool json_out = false;
  long long budget_ms = 0;
  int oracle_bound = 0;

  engine::Options options() const {
    engine::Options o;
    o.solver.time_limit = std::chrono::milliseconds(budget_ms);
    o.oracle_bound = oracle_bound;
    return o;
  }
};

void add_common(CLI::App* cmd, Common& c, bool oracle) {
  cmd->add_flag("--json", c.json_out, "Print a JSON report");
  cmd->add_option("--budget-ms", c.budget_ms, "Solver wall-clock budget in milliseconds (0 = unlimited)")
      ->check(CLI::NonNegativeNumber);
  if (oracle)
    cmd->add_option("--oracle-bound", c.oracle_bound, "Cross-check with the finite-model oracle up to this domain size")
        ->check(CLI::NonNegativeNumber);
}

void print_sat(const std::string& command, const engine::SatisfiabilityVerdict& v, const Common& c) {
  const std::string verdict = engine::to_string(v.verdict);
  if (c.json_out) {
    std::cout << report(command, verdict, v.containment).dump() << "\n";
  } else {
    std::cout << verdict << "\n";
    if (!v.containment.diagnostic.empty()) std::cerr << "note: " << v.containment.diagnostic << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query containment and answering under DLR_reg schemas"};
  app.require_subcommand(1);
  int code = 0;

  Common check_opts;
  std::string schema, lhs, rhs, emit;
  auto* check = app.add_subcommand("check", "Decide whether lhs is contained in rhs under the schema");
  check->add_option("--schema", schema, "Schema file")->required();
  check->add_option("--lhs", lhs, "Contained query")->required();
  check->add_option("--rhs", rhs, "Containing query")->required();
  check->add_option("--emit-pdl", emit, "Write the PDL encoding to this file");
  add_common(check, check_opts, true);
  check->callback([&] {
    auto s = dlr::parse_schema(read_file(schema));
    auto q = dlr::parse_query(read_file(lhs), s.signature);
    auto q2 = dlr::parse_query(read_file(rhs), s.signature);
    auto v = engine::check_containment(s, q, q2, check_opts.options());
    if (!emit.empty()) {
      std::ofstream out(emit);
      if (!out) throw std::runtime_error("cannot write " + emit);
      out << pdl::to_sexpr(v.phi) << "\n";
    }
    if (check_opts.json_out) {
      std::cout << report("check", engine::to_string(v.verdict), v).dump() << "\n";
    } else {
      std::cout << engine::to_string(v.verdict) << "\n";
      if (!v.diagnostic.empty()) std::cerr << "note: " << v.diagnostic << "\n";
      if (v.oracle.used) std::cerr << "oracle (bound " << v.oracle.bound << "): " << v.oracle.outcome << "\n";
    }
    code = exit_for(v.verdict);
  });

  Common sq_opts;
  std::string sq_schema, sq_query;
  auto* sat_query = app.add_subcommand("sat-query", "Decide whether a query can have a non-empty answer");
  sat_query->add_option("--schema", sq_schema, "Schema file")->required();
  sat_query->add_option("--query", sq_query, "Query file")->required();
  add_common(sat_query, sq_opts, false);
  sat_query->callback([&] {
    auto s = dlr::parse_schema(read_file(sq_schema));
    auto q = dlr::parse_query(read_file(sq_query), s.signature);
    auto v = engine::check_query_satisfiability(s, q, sq_opts.options());
    print_sat("sat-query", v, sq_opts);
    code = exit_for(v.verdict);
  });

  Common ce_opts;
  std::string ce_schema, ce_abox, ce_query, ce_tuple;
  auto* certain = app.add_subcommand("certain", "Certain answers of a query over a database");
  certain->add_option("--schema", ce_schema, "Schema file")->required();
  certain->add_option("--abox", ce_abox, "Database file")->required();
  certain->add_option("--query", ce_query, "Query file")->required();
  certain->add_option("--tuple", ce_tuple, "Check one tuple, constants separated by commas");
  add_common(certain, ce_opts, false);
  certain->callback([&] {
    auto s = dlr::parse_schema(read_file(ce_schema));
    auto d = dlr::parse_abox(read_file(ce_abox), s.signature);
    auto q = dlr::parse_query(read_file(ce_query), s.signature);
    auto tuple_text = [](const std::vector<std::string>& t) {
      std::string out = "(";
      for (std::size_t i = 0; i < t.size(); ++i) out += (i ? "," : "") + t[i];
      return out + ")";
    };
    if (certain->count("--tuple")) {
      auto m = engine::certain_member(s, d, q, split_tuple(ce_tuple), ce_opts.options());
      if (ce_opts.json_out) {
        auto j = report("certain", engine::to_string(m.membership), m.containment);
        j["tuple"] = m.tuple;
        std::cout << j.dump() << "\n";
      } else {
        std::cout << engine::to_string(m.membership) << "\n";
      }
      code = m.membership == engine::Membership::Member ? 0 : m.membership == engine::Membership::NotMember ? 1 : 2;
      return;
    }
    auto set = engine::certain_answers(s, d, q, ce_opts.options());
    bool inconclusive = false;
    json cands = json::array();
    for (const auto& m : set.candidates) {
      inconclusive |= m.membership == engine::Membership::Inconclusive;
      cands.push_back({{"tuple", m.tuple}, {"verdict", engine::to_string(m.membership)},
                       {"time_ms", m.containment.time_ms}});
    }
    if (ce_opts.json_out) {
      json j;
      j["command"] = "certain";
      j["verdict"] = inconclusive ? "Inconclusive" : "Complete";
      j["answers"] = set.answers;
      j["candidates"] = cands;
      std::cout << j.dump() << "\n";
    } else {
      for (const auto& m : set.candidates)
        std::cout << tuple_text(m.tuple) << " " << engine::to_string(m.membership) << "\n";
    }
    code = inconclusive ? 2 : 0;
  });

  Common as_opts;
  std::string as_schema, as_abox;
  auto* abox_sat = app.add_subcommand("abox-sat", "Decide whether a database is consistent with the schema");
  abox_sat->add_option("--schema", as_schema, "Schema file")->required();
  abox_sat->add_option("--abox", as_abox, "Database file")->required();
  add_common(abox_sat, as_opts, false);
  abox_sat->callback([&] {
    auto s = dlr::parse_schema(read_file(as_schema));
    auto d = dlr::parse_abox(read_file(as_abox), s.signature);
    auto v = engine::check_db_satisfiability(s, d, as_opts.options());
    print_sat("abox-sat", v, as_opts);
    code = exit_for(v.verdict);
  });

  Common ps_opts;
  std::string ps_file;
  bool ps_witness = false, ps_trace = false;
  auto* pdl_sat = app.add_subcommand("pdl-sat", "Decide satisfiability of a PDL formula");
  pdl_sat->add_option("formula", ps_file, "Formula file")->required();
  pdl_sat->add_flag("--witness", ps_witness, "Print the witness structure");
  pdl_sat->add_flag("--trace", ps_trace, "Print the solver trace as JSON");
  add_common(pdl_sat, ps_opts, false);
  pdl_sat->callback([&] {
    auto f = pdl::parse_formula(read_file(ps_file));
    pdl::SolverOptions o;
    o.budget.time_limit = std::chrono::milliseconds(ps_opts.budget_ms);
    pdl::Trace trace;
    auto r = pdl::decide_with_trace(f, trace, o);
    if (ps_opts.json_out) {
      json j;
      j["command"] = "pdl-sat";
      j["verdict"] = pdl::to_string(r.status);
      j["time_ms"] = trace.time_ms;
      if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
      if (ps_witness && r.witness) j["witness"] = pdl::to_sexpr(*r.witness);
      if (ps_trace) j["trace"] = json::parse(trace.to_json());
      std::cout << j.dump() << "\n";
    } else {
      std::cout << pdl::to_string(r.status) << "\n";
      if (ps_witness && r.witness) std::cout << pdl::to_sexpr(*r.witness) << "\n";
      if (ps_trace) std::cout << trace.to_json() << "\n";
      if (!r.diagnostic.empty()) std::cerr << "note: " << r.diagnostic << "\n";
    }
    code = r.sat() ? 0 : r.unsat() ? 1 : 2;
  });

  std::string mc_model, mc_formula;
  bool mc_json = false;
  auto* pdl_mc = app.add_subcommand("pdl-mc", "Model-check a formula on a Kripke structure");
  pdl_mc->add_option("--model", mc_model, "Kripke structure file")->required();
  pdl_mc->add_option("--formula", mc_formula, "Formula file")->required();
  pdl_mc->add_flag("--json", mc_json, "Print a JSON report");
  pdl_mc->callback([&] {
    auto m = pdl::parse_kripke(read_file(mc_model));
    pdl::require_valid(m);
    auto f = pdl::parse_formula(read_file(mc_formula));
    auto states = pdl::model_check(m, f);
    std::vector<std::string> names;
    for (int s : states) names.push_back(m.states[s]);
    if (mc_json) {
      std::cout << json{{"command", "pdl-mc"}, {"states", names}}.dump() << "\n";
    } else {
      for (const auto& n : names) std::cout << n << "\n";
    }
    code = states.empty() ? 1 : 0;
  });

  engine::DiffConfig diff;
  bool diff_json = false;
  long long diff_budget = 0;
  auto* difftest = app.add_subcommand("difftest", "Compare the pipeline with the finite-model oracle");
  difftest->add_option("--seed", diff.seed, "First generator seed");
  difftest->add_option("--count", diff.count, "Number of instances")->check(CLI::NonNegativeNumber);
  difftest->add_option("--oracle-bound", diff.oracle_bound, "Oracle domain bound")->check(CLI::PositiveNumber);
  difftest->add_option("--budget-ms", diff_budget, "Solver budget per instance in milliseconds (0 = unlimited)");
  difftest->add_flag("--json", diff_json, "Print a JSON report");
  difftest->callback([&] {
    diff.solver.time_limit = std::chrono::milliseconds(diff_budget);
    auto r = engine::run_differential_suite(diff);
    if (diff_json) {
      std::cout << r.to_json() << "\n";
    } else {
      std::cout << "instances " << r.cases.size() << "\n"
                << "contained " << r.contained << "\n"
                << "not_contained " << r.not_contained << "\n"
                << "inconclusive " << r.inconclusive << "\n"
                << "countermodels " << r.countermodels << "\n"
                << "reify_failures " << r.reify_failures << "\n"
                << "contradictions " << r.contradictions << "\n"
                << "time_ms " << r.time_ms << "\n";
      for (const auto& c : r.cases)
        if (c.contradiction) std::cout << "contradiction seed " << c.seed << ": " << c.note << "\n";
    }
    code = r.contradictions == 0 ? 0 : 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return code;
}
