#include "dlrq/engine.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "dlrq/finite_model.hpp"

using namespace dlrq;
using namespace dlrq::engine;

namespace {

std::string read(const std::string& name) {
  std::ifstream in(std::string(DLRQ_CORPUS_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing corpus file " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

dlr::Schema schema(const std::string& name) { return dlr::parse_schema(read(name)); }
dlr::Query query(const std::string& name, const dlr::Schema& s) { return dlr::parse_query(read(name), s.signature); }
dlr::IncompleteDatabase abox(const std::string& name, const dlr::Schema& s) {
  return dlr::parse_abox(read(name), s.signature);
}

Options budget() {
  Options o;
  o.solver.time_limit = std::chrono::minutes(2);
  return o;
}

}  // namespace

TEST(Containment, TrivialCases) {
  auto s = schema("ab.schema");
  auto qa = query("q_a.query", s), qb = query("q_b.query", s);
  EXPECT_EQ(check_containment(s, qa, qa, budget()).verdict, Verdict::Contained);
  auto v = check_containment(s, qa, qb, budget());
  EXPECT_EQ(v.verdict, Verdict::NotContained);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_FALSE(pdl::model_check(*v.witness, v.phi).empty());
}

TEST(Containment, OracleIsRecordedNotConsulted) {
  auto s = schema("ab.schema");
  auto qa = query("q_a.query", s), qb = query("q_b.query", s);
  Options o = budget();
  o.oracle_bound = 2;
  auto v = check_containment(s, qa, qb, o);
  EXPECT_TRUE(v.oracle.used);
  EXPECT_EQ(v.oracle.bound, 2);
  EXPECT_EQ(v.oracle.outcome, "countermodel");
  EXPECT_EQ(check_containment(s, qa, qb, budget()).oracle.outcome, "skipped");
}

TEST(Containment, Flagship) {
  auto s = schema("sales.schema");
  auto v = check_containment(s, query("sales_q.query", s), query("sales_q1.query", s), budget());
  EXPECT_EQ(v.verdict, Verdict::Contained) << v.diagnostic;
  EXPECT_EQ(v.stats.partitions(), 2u);
}

TEST(QuerySatisfiability, EmptyQueryShape) {
  for (std::size_t n : {0u, 1u, 2u, 3u}) {
    auto u = empty_query(n);
    EXPECT_EQ(u.arity(), n);
    ASSERT_EQ(u.disjuncts.size(), 1u);
    EXPECT_EQ(u.disjuncts[0].size(), 2u);
    auto s = with_empty_query_name(dlr::Schema{}, n);
    EXPECT_TRUE(dlr::check_well_typed(u, s.signature).empty()) << n;
  }
}

TEST(QuerySatisfiability, Examples) {
  auto s = schema("ab.schema");
  auto qa = query("q_a.query", s);
  EXPECT_EQ(check_query_satisfiability(s, qa, budget()).verdict, Satisfiability::Satisfiable);
  auto contradictory = dlr::parse_query("(query q (x) (disjunct (c A (var x)) (c (not A) (var x))))", s.signature);
  EXPECT_EQ(check_query_satisfiability(s, contradictory, budget()).verdict, Satisfiability::Unsatisfiable);
  auto pair = query("q_pxy.query", s);
  EXPECT_EQ(check_query_satisfiability(s, pair, budget()).verdict, Satisfiability::Satisfiable);
}

TEST(QuerySatisfiability, SalesReadings) {
  auto s = schema("sales.schema");
  auto literal = check_query_satisfiability(s, query("sales_q2_literal.query", s), budget());
  EXPECT_EQ(literal.verdict, Satisfiability::Satisfiable) << literal.containment.diagnostic;
  auto concept_atom = check_query_satisfiability(s, query("sales_q2_concept.query", s), budget());
  EXPECT_EQ(concept_atom.verdict, Satisfiability::Unsatisfiable) << concept_atom.containment.diagnostic;
}

TEST(Answering, BuildQueries) {
  auto s = schema("ab.schema");
  auto d = abox("p_cd.abox", s);
  auto qd = build_QD(d);
  EXPECT_EQ(qd.arity(), 0u);
  ASSERT_EQ(qd.disjuncts.size(), 1u);
  EXPECT_EQ(qd.disjuncts[0].size(), 1u);
  EXPECT_THROW(build_QD(dlr::IncompleteDatabase{}), std::invalid_argument);
  auto qc = build_Qqc(query("q_p.query", s), {"c"});
  EXPECT_EQ(qc.arity(), 0u);
  EXPECT_EQ(qc.disjuncts[0][0].terms[0], dlr::Term::constant("c"));
  EXPECT_EQ(qc.disjuncts[0][0].terms[1], dlr::Term::var("y"));
  EXPECT_THROW(build_Qqc(query("q_p.query", s), {"c", "d"}), std::invalid_argument);
  EXPECT_THROW(certain_member(s, d, query("q_p.query", s), {"e"}, budget()), std::invalid_argument);
}

TEST(Answering, MembershipExamples) {
  auto incl = schema("incl_ab.schema");
  EXPECT_EQ(certain_member(incl, abox("a_c.abox", incl), query("q_b.query", incl), {"c"}, budget()).membership,
            Membership::Member);
  auto s = schema("ab.schema");
  EXPECT_EQ(certain_member(s, abox("b_c.abox", s), query("q_a.query", s), {"c"}, budget()).membership,
            Membership::NotMember);
  auto cert = certain_answers(s, abox("p_cd.abox", s), query("q_p.query", s), budget());
  ASSERT_EQ(cert.candidates.size(), 2u);
  ASSERT_EQ(cert.answers.size(), 1u);
  EXPECT_EQ(cert.answers[0], std::vector<std::string>{"c"});
}

TEST(Answering, CandidateCount) {
  auto s = schema("ab.schema");
  auto d = abox("three_constants.abox", s);
  ASSERT_EQ(d.constants().size(), 3u);
  auto cert = certain_answers(s, d, query("q_pxy.query", s), budget());
  EXPECT_EQ(cert.candidates.size(), 9u);
  ASSERT_EQ(cert.answers.size(), 1u);
  EXPECT_EQ(cert.answers[0], (std::vector<std::string>{"a", "b"}));
}

TEST(Answering, DatabaseSatisfiability) {
  auto sales = schema("sales.schema");
  EXPECT_EQ(check_db_satisfiability(sales, abox("main_controlled.abox", sales), budget()).verdict,
            Satisfiability::Unsatisfiable);
  auto s = schema("ab.schema");
  EXPECT_EQ(check_db_satisfiability(s, abox("p_cd.abox", s), budget()).verdict, Satisfiability::Satisfiable);
  auto neg = dlr::parse_schema("(declare-concept A) (declare-concept B) (conc-incl A (not B))");
  auto d = dlr::parse_abox("(member A (const c)) (member B (const c))", neg.signature);
  EXPECT_EQ(check_db_satisfiability(neg, d, budget()).verdict, Satisfiability::Unsatisfiable);
}

TEST(Differential, SmallRunIsDeterministicAndConsistent) {
  DiffConfig c;
  c.seed = 1000;
  c.count = 15;
  c.oracle_bound = 2;
  auto a = run_differential_suite(c);
  auto b = run_differential_suite(c);
  ASSERT_EQ(a.cases.size(), 15u);
  EXPECT_EQ(a.contradictions, 0);
  EXPECT_EQ(a.reify_failures, 0);
  for (std::size_t i = 0; i < a.cases.size(); ++i) {
    EXPECT_EQ(a.cases[i].verdict, b.cases[i].verdict);
    EXPECT_EQ(a.cases[i].oracle, b.cases[i].oracle);
    if (a.cases[i].oracle == "countermodel") EXPECT_NE(a.cases[i].verdict, Verdict::Contained);
  }
  EXPECT_EQ(a.contained + a.not_contained + a.inconclusive, 15);
  EXPECT_FALSE(a.to_json().empty());
}
