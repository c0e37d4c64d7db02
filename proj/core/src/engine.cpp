#include "dlrq/engine.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "dlrq/finite_model.hpp"
#include "json.hpp"

namespace dlrq::engine {

namespace {

// Reserved prefix: user names cannot start with '$'.
const std::string kEmptyName = "$Empty";

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

ContainmentVerdict decide_reduction(const red::Reduction& r, const Options& options) {
  ContainmentVerdict v;
  v.stats = r.stats;
  v.phi = r.phi;
  pdl::SolverOptions so;
  so.budget = options.solver;
  const auto result = pdl::decide(r.phi, so);
  switch (result.status) {
    case pdl::SatResult::Status::Unsatisfiable: v.verdict = Verdict::Contained; break;
    case pdl::SatResult::Status::Satisfiable:
      v.verdict = Verdict::NotContained;
      v.witness = result.witness;
      break;
    case pdl::SatResult::Status::ResourceLimit:
      v.verdict = Verdict::Inconclusive;
      v.diagnostic = result.diagnostic;
      break;
  }
  return v;
}

OracleRecord run_oracle(const dlr::Schema& s, const dlr::Query& q, const dlr::Query& q2, int bound,
                        fm::OracleResult* out = nullptr) {
  OracleRecord rec;
  rec.used = true;
  rec.bound = bound;
  try {
    fm::OracleOptions o;
    o.bound = bound;
    auto res = fm::find_containment_counterexample(s, q, q2, o);
    rec.outcome = res.found() ? "countermodel" : "none-up-to-bound";
    if (out) *out = std::move(res);
  } catch (const fm::OracleResourceError&) {
    rec.outcome = "limit";
  }
  return rec;
}

void check_constants(const dlr::IncompleteDatabase& d, const std::vector<std::string>& tuple) {
  const auto cs = d.constants();
  for (const auto& c : tuple)
    if (std::find(cs.begin(), cs.end(), c) == cs.end())
      throw std::invalid_argument("constant " + c + " does not occur in the database");
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Contained: return "Contained";
    case Verdict::NotContained: return "NotContained";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

std::string to_string(Satisfiability v) {
  switch (v) {
    case Satisfiability::Satisfiable: return "Satisfiable";
    case Satisfiability::Unsatisfiable: return "Unsatisfiable";
    case Satisfiability::Inconclusive: return "Inconclusive";
  }
  return "?";
}

std::string to_string(Membership m) {
  switch (m) {
    case Membership::Member: return "Member";
    case Membership::NotMember: return "NotMember";
    case Membership::Inconclusive: return "Inconclusive";
  }
  return "?";
}

ContainmentVerdict check_containment(const dlr::Schema& s, const dlr::Query& q, const dlr::Query& q2,
                                     const Options& options) {
  const auto start = std::chrono::steady_clock::now();
  const auto r = red::build_reduction(s, q, q2);
  auto v = decide_reduction(r, options);
  if (options.oracle_bound > 0) v.oracle = run_oracle(s, q, q2, options.oracle_bound);
  v.time_ms = elapsed_ms(start);
  return v;
}

dlr::Query empty_query(std::size_t arity) {
  dlr::Query u;
  u.name = "empty";
  std::vector<dlr::Term> xs;
  for (std::size_t i = 1; i <= arity; ++i) {
    u.head.push_back("x" + std::to_string(i));
    xs.push_back(dlr::Term::var(u.head.back()));
  }
  dlr::Conjunction body;
  if (arity == 1 || arity == 0) {
    const auto t = arity == 1 ? xs[0] : dlr::Term::var("z");
    auto c = dlr::atomic_concept(kEmptyName);
    body.push_back(dlr::Atom::concept_atom(c, t));
    body.push_back(dlr::Atom::concept_atom(dlr::negate(c), t));
  } else {
    const int n = static_cast<int>(arity);
    auto p = dlr::atomic_relation(kEmptyName, n);
    body.push_back(dlr::Atom::relation_atom(p, xs));
    body.push_back(dlr::Atom::relation_atom(dlr::negate(p), xs));
  }
  u.disjuncts.push_back(std::move(body));
  return u;
}

dlr::Schema with_empty_query_name(const dlr::Schema& s, std::size_t arity) {
  dlr::Schema out = s;
  if (arity <= 1)
    out.signature.concepts.insert(kEmptyName);
  else
    out.signature.relations[kEmptyName] = static_cast<int>(arity);
  return out;
}

SatisfiabilityVerdict check_query_satisfiability(const dlr::Schema& s, const dlr::Query& q, const Options& options) {
  SatisfiabilityVerdict v;
  const auto s2 = with_empty_query_name(s, q.arity());
  v.containment = check_containment(s2, q, empty_query(q.arity()), options);
  switch (v.containment.verdict) {
    case Verdict::Contained: v.verdict = Satisfiability::Unsatisfiable; break;
    case Verdict::NotContained: v.verdict = Satisfiability::Satisfiable; break;
    case Verdict::Inconclusive: v.verdict = Satisfiability::Inconclusive; break;
  }
  return v;
}

dlr::Query build_QD(const dlr::IncompleteDatabase& d) {
  if (d.facts.empty()) throw std::invalid_argument("the database has no facts");
  dlr::Query q;
  q.name = "QD";
  q.disjuncts.push_back(d.facts);
  return q;
}

dlr::Query build_Qqc(const dlr::Query& q, const std::vector<std::string>& tuple) {
  if (tuple.size() != q.arity())
    throw std::invalid_argument("tuple has " + std::to_string(tuple.size()) + " constants but the query has arity " +
                                std::to_string(q.arity()));
  dlr::Query out;
  out.name = q.name + "_c";
  for (const auto& conj : q.disjuncts) {
    dlr::Conjunction c = conj;
    for (auto& atom : c)
      for (auto& t : atom.terms) {
        if (!t.is_var()) continue;
        auto it = std::find(q.head.begin(), q.head.end(), t.name);
        if (it != q.head.end()) t = dlr::Term::constant(tuple[it - q.head.begin()]);
      }
    out.disjuncts.push_back(std::move(c));
  }
  return out;
}

MemberVerdict certain_member(const dlr::Schema& s, const dlr::IncompleteDatabase& d, const dlr::Query& q,
                             const std::vector<std::string>& tuple, const Options& options) {
  check_constants(d, tuple);
  MemberVerdict m;
  m.tuple = tuple;
  m.containment = check_containment(s, build_QD(d), build_Qqc(q, tuple), options);
  switch (m.containment.verdict) {
    case Verdict::Contained: m.membership = Membership::Member; break;
    case Verdict::NotContained: m.membership = Membership::NotMember; break;
    case Verdict::Inconclusive: m.membership = Membership::Inconclusive; break;
  }
  return m;
}

CertainAnswerSet certain_answers(const dlr::Schema& s, const dlr::IncompleteDatabase& d, const dlr::Query& q,
                                 const Options& options) {
  CertainAnswerSet out;
  out.query = q.name;
  const auto cs = d.constants();
  const std::size_t n = q.arity();
  std::vector<std::size_t> idx(n, 0);
  if (n > 0 && cs.empty()) return out;
  for (;;) {
    std::vector<std::string> tuple;
    for (auto i : idx) tuple.push_back(cs[i]);
    auto m = certain_member(s, d, q, tuple, options);
    if (m.membership == Membership::Member) out.answers.push_back(tuple);
    out.candidates.push_back(std::move(m));
    // Odometer over positions, last position fastest.
    std::size_t pos = n;
    while (pos > 0 && ++idx[pos - 1] == cs.size()) idx[--pos] = 0;
    if (pos == 0) break;
  }
  return out;
}

SatisfiabilityVerdict check_db_satisfiability(const dlr::Schema& s, const dlr::IncompleteDatabase& d,
                                              const Options& options) {
  return check_query_satisfiability(s, build_QD(d), options);
}

std::string DiffReport::to_json() const {
  nlohmann::ordered_json j;
  j["instances"] = cases.size();
  j["contained"] = contained;
  j["not_contained"] = not_contained;
  j["inconclusive"] = inconclusive;
  j["countermodels"] = countermodels;
  j["reify_checked"] = reify_checked;
  j["reify_failures"] = reify_failures;
  j["contradictions"] = contradictions;
  j["time_ms"] = time_ms;
  j["cases"] = nlohmann::ordered_json::array();
  for (const auto& c : cases) {
    nlohmann::ordered_json x;
    x["seed"] = c.seed;
    x["verdict"] = to_string(c.verdict);
    x["oracle"] = c.oracle;
    if (c.reify_holds) x["reify_holds"] = *c.reify_holds;
    x["contradiction"] = c.contradiction;
    if (!c.note.empty()) x["note"] = c.note;
    x["time_ms"] = c.time_ms;
    j["cases"].push_back(x);
  }
  return j.dump();
}

DiffReport run_differential_suite(const DiffConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  DiffReport report;
  Options options;
  options.solver = config.solver;
  for (int i = 0; i < config.count; ++i) {
    const auto case_start = std::chrono::steady_clock::now();
    DiffCase c;
    c.seed = config.seed + static_cast<std::uint64_t>(i);
    const auto inst = gen::generate_micro(c.seed, config.micro);
    const auto r = red::build_reduction(inst.schema, inst.lhs, inst.rhs);
    // The verdict is fixed before the oracle runs.
    const auto v = decide_reduction(r, options);
    c.verdict = v.verdict;
    fm::OracleResult oracle;
    c.oracle = run_oracle(inst.schema, inst.lhs, inst.rhs, config.oracle_bound, &oracle).outcome;
    if (oracle.found()) {
      ++report.countermodels;
      const auto reified = red::reify(*oracle.model, r.problem, oracle.tuple);
      c.reify_holds = pdl::holds(reified.model, reified.root, r.phi);
      ++report.reify_checked;
      if (!*c.reify_holds) ++report.reify_failures;
      if (c.verdict == Verdict::Contained) {
        c.contradiction = true;
        c.note = "oracle countermodel against Contained";
      } else if (c.verdict == Verdict::NotContained && !*c.reify_holds) {
        c.contradiction = true;
        c.note = "reified countermodel violates the encoding";
      }
    }
    switch (c.verdict) {
      case Verdict::Contained: ++report.contained; break;
      case Verdict::NotContained: ++report.not_contained; break;
      case Verdict::Inconclusive: ++report.inconclusive; break;
    }
    if (c.contradiction) ++report.contradictions;
    c.time_ms = elapsed_ms(case_start);
    report.cases.push_back(std::move(c));
  }
  report.time_ms = elapsed_ms(start);
  return report;
}

}  // namespace dlrq::engine
