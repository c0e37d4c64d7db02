#include "dlrq/reduction.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "dlrq/finite_model.hpp"
#include "dlrq/microgen.hpp"
#include "support.hpp"

using namespace dlrq;
using dlrq::fixtures::read_corpus;

namespace {

std::vector<pdl::Formula> conjuncts(pdl::Formula f) {
  std::vector<pdl::Formula> out;
  std::function<void(pdl::Formula)> walk = [&](pdl::Formula g) {
    if (g->kind == pdl::FormulaKind::And) {
      walk(g->left);
      walk(g->right);
    } else {
      out.push_back(g);
    }
  };
  walk(f);
  return out;
}

bool has_conjunct(pdl::Formula f, pdl::Formula c) {
  auto cs = conjuncts(f);
  return std::find(cs.begin(), cs.end(), c) != cs.end();
}

dlr::Schema schema_of(const std::string& text) { return dlr::parse_schema(text); }
dlr::Query query_of(const std::string& text, const dlr::Schema& s) { return dlr::parse_query(text, s.signature); }

pdl::Program U(int n = 2) { return red::universal(n); }

// Bell numbers by the triangle recurrence.
std::size_t bell(std::size_t n) {
  std::vector<std::size_t> row{1};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> next{row.back()};
    for (std::size_t v : row) next.push_back(next.back() + v);
    row = next;
  }
  return row.front();
}

// An edge is a bridge iff deleting it disconnects its endpoints.
std::set<std::string> cyclic_by_deletion(const red::TupleGraph& g) {
  const int T = static_cast<int>(g.terms.size());
  auto connected = [&](int skip, int from, int to) {
    std::vector<char> seen(T + g.tuples.size(), 0);
    std::vector<int> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        if (static_cast<int>(e) == skip) continue;
        int a = T + g.edges[e].tuple, b = g.edges[e].term;
        int w = v == a ? b : v == b ? a : -1;
        if (w >= 0 && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    return seen[to] != 0;
  };
  std::set<std::string> out;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    if (connected(static_cast<int>(e), T + edge.tuple, edge.term) && g.terms[edge.term].term.is_var())
      out.insert(g.terms[edge.term].term.name);
  }
  return out;
}

std::set<std::string> names_of(const std::vector<dlr::Term>& ts) {
  std::set<std::string> out;
  for (const auto& t : ts) out.insert(t.name);
  return out;
}

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

}  // namespace

TEST(Sigma, TranslationCases) {
  auto s = schema_of("(declare-concept A) (declare-relation P 2) (declare-relation R 3)");
  auto c = [&](const char* t) { return dlr::parse_concept(parse_sexpr(t), s.signature); };
  auto r = [&](const char* t) { return dlr::parse_relation(parse_sexpr(t), s.signature); };
  auto A = pdl::atom("A");
  auto T1 = pdl::atom("$T1");
  EXPECT_EQ(red::sigma(c("top1")), T1);
  EXPECT_EQ(red::sigma(c("(not A)")), pdl::conj(T1, pdl::neg(A)));
  EXPECT_EQ(red::sigma(r("(sel 2 3 A)")), pdl::conj(pdl::atom("$T3"), pdl::box(pdl::prog("f2"), A)));
  EXPECT_EQ(red::sigma(c("(some-rel 2 P)")), pdl::dia(pdl::converse("f2"), pdl::atom("P")));
  EXPECT_EQ(red::sigma(c("(atmost 3 1 R)")), pdl::at_most(3, pdl::converse("f1"), pdl::atom("R")));
  EXPECT_EQ(red::sigma(r("(not-r P)")), pdl::conj(pdl::atom("$T2"), pdl::neg(pdl::atom("P"))));
  auto path = dlr::parse_path(parse_sexpr("(proj P 2 1)"), s.signature);
  EXPECT_EQ(red::sigma(path),
            pdl::seq({pdl::converse("f2"), pdl::test(pdl::atom("P")), pdl::prog("f1")}));
  auto star = dlr::parse_path(parse_sexpr("(star (proj P 1 2))"), s.signature);
  EXPECT_EQ(red::sigma(c("(some (star (proj P 1 2)) A)")), pdl::dia(red::sigma(star), A));
}

TEST(Sigma, InjectiveOnRandomConcepts) {
  fixtures::ExprGen g(17, fixtures::small_signature());
  std::map<pdl::Formula, std::string> seen;
  for (int i = 0; i < 300; ++i) {
    auto c = g.concept_expr(3);
    auto f = red::sigma(c);
    auto [it, fresh] = seen.emplace(f, dlr::to_sexpr(c));
    if (!fresh) EXPECT_EQ(it->second, dlr::to_sexpr(c));
  }
}

TEST(PhiSchema, EmptySchemaKeepsStructuralAxioms) {
  auto s = schema_of("(declare-relation P 2)");
  auto phi = red::build_phi_schema(s);
  auto T1 = pdl::atom("$T1"), T2 = pdl::atom("$T2");
  EXPECT_TRUE(has_conjunct(phi, pdl::box(U(), pdl::disj(T1, T2))));
  EXPECT_TRUE(has_conjunct(phi, pdl::box(U(), pdl::at_most(1, pdl::prog("f1"), pdl::top()))));
  EXPECT_TRUE(has_conjunct(phi, pdl::box(U(), pdl::at_most(1, pdl::prog("f2"), pdl::top()))));
  // n = n_max: no conjunct mentions f3.
  EXPECT_TRUE(has_conjunct(phi, pdl::box(U(), pdl::iff(T2, pdl::conj(pdl::dia(pdl::prog("f1"), T1),
                                                                     pdl::dia(pdl::prog("f2"), T1))))));
  EXPECT_TRUE(has_conjunct(phi, pdl::box(U(), pdl::implies(pdl::box(pdl::prog("f1"), pdl::bottom()),
                                                           pdl::box(pdl::prog("f2"), pdl::bottom())))));
  EXPECT_TRUE(has_conjunct(phi, pdl::box(U(), pdl::implies(pdl::atom("P"), T2))));
  std::set<std::string> atoms, programs;
  pdl::collect_names(phi, atoms, programs);
  EXPECT_EQ(programs, (std::set<std::string>{"create", "f1", "f2"}));
}

TEST(PhiSchema, ShapeAxiomsBelowMaximalArity) {
  auto s = schema_of("(declare-relation P 2) (declare-relation R 3)");
  auto phi = red::build_phi_schema(s);
  auto T1 = pdl::atom("$T1");
  auto shape2 = pdl::conj({pdl::dia(pdl::prog("f1"), T1), pdl::dia(pdl::prog("f2"), T1),
                           pdl::box(pdl::prog("f3"), pdl::bottom())});
  EXPECT_TRUE(has_conjunct(phi, pdl::box(U(3), pdl::iff(pdl::atom("$T2"), shape2))));
}

TEST(PhiSchema, Assertions) {
  auto s = schema_of("(declare-concept A) (declare-concept B) (conc-incl A B)");
  EXPECT_TRUE(has_conjunct(red::build_phi_schema(s), pdl::box(U(), pdl::implies(pdl::atom("A"), pdl::atom("B")))));
  auto sales = schema_of(read_corpus("sales.schema"));
  auto main = dlr::parse_concept(parse_sexpr("MainDept"), sales.signature);
  auto rhs = dlr::parse_concept(parse_sexpr("(and Dept (not (some-rel 2 CONTROLS)))"), sales.signature);
  EXPECT_TRUE(has_conjunct(red::build_phi_schema(sales),
                           pdl::box(U(3), pdl::implies(red::sigma(main), red::sigma(rhs)))));
}

TEST(PhiSchema, GradedNumbersBoundedBySchema) {
  auto sales = schema_of(read_corpus("sales.schema"));
  auto q = query_of(read_corpus("sales_q.query"), sales);
  auto q1 = query_of(read_corpus("sales_q1.query"), sales);
  auto r = red::build_reduction(sales, q, q1);
  std::size_t bound = std::max(1, dlr::max_count(sales));
  for (auto f : pdl::fl_closure(r.phi_prime))
    if (f->kind == pdl::FormulaKind::AtMost) EXPECT_LE(static_cast<std::size_t>(f->count), bound);
  std::set<std::string> atoms, programs;
  pdl::collect_names(r.phi, atoms, programs);
  EXPECT_EQ(programs, (std::set<std::string>{"create", "f1", "f2", "f3"}));
}

TEST(Skolemize, HeadAndBodyTerms) {
  auto s = schema_of("(declare-concept A) (declare-concept B)");
  auto q = query_of("(query q (x) (disjunct (c A (var x))))", s);
  auto q2 = query_of("(query q2 (y) (disjunct (c B (var y))))", s);
  auto p = red::skolemize(s, q, q2);
  ASSERT_EQ(p.head.size(), 1u);
  EXPECT_EQ(p.head[0], dlr::Term::skolem("a1"));
  EXPECT_EQ(p.names.atoms(), std::vector<std::string>{"$N:!a1"});
  EXPECT_EQ(p.rhs_disjuncts[0][0].terms[0], dlr::Term::skolem("a1"));

  auto e = schema_of(read_corpus("empty.schema"));
  auto p31 = red::skolemize(e, query_of(read_corpus("tuple_p.query"), e), query_of(read_corpus("tuple_r.query"), e));
  EXPECT_EQ(p31.names.atoms(), (std::vector<std::string>{"$N:!a1", "$N:!a2", "$N:<!a1,!a2>"}));
  EXPECT_EQ(p31.candidates.size(), 2u);

  auto qc = query_of("(query q (x) (disjunct (c A (var x)) (c A (const k))))", s);
  auto q2c = query_of("(query q2 (x) (disjunct (c B (var x)) (c B (const m))))", s);
  auto pc = red::skolemize(s, qc, q2c);
  EXPECT_TRUE(pc.names.find(dlr::Term::constant("m")).has_value());
  EXPECT_TRUE(pc.names.find(dlr::Term::constant("k")).has_value());
  EXPECT_EQ(pc.candidates.size(), 3u);

  auto q2wide = query_of("(query q2 (x y) (disjunct (c B (var x)) (c B (var y))))", s);
  EXPECT_THROW(red::skolemize(s, q, q2wide), std::invalid_argument);
}

TEST(PhiConj, Items) {
  auto s = schema_of("(declare-concept A) (declare-relation P 2) (declare-relation Q 2)");
  auto q = query_of("(query q (x) (disjunct (c A (var x))))", s);
  auto p = red::skolemize(s, q, q);
  auto N = pdl::atom("$N:!a1");
  EXPECT_EQ(red::build_phi_conj(p, 0), pdl::box(U(), pdl::implies(N, pdl::atom("A"))));

  auto qq = query_of("(query q (x) (disjunct (r P (var x) (var y)) (r Q (var x) (var y))))", s);
  auto pp = red::skolemize(s, qq, qq);
  auto phi = red::build_phi_conj(pp, 0);
  auto Nt = pdl::atom("$N:<!a1,!b1.y>");
  auto Na = pdl::atom("$N:!a1"), Nb = pdl::atom("$N:!b1.y");
  EXPECT_TRUE(has_conjunct(phi, pdl::box(U(), pdl::iff(Nt, pdl::conj(pdl::dia(pdl::prog("f1"), Na),
                                                                     pdl::dia(pdl::prog("f2"), Nb))))));
  EXPECT_TRUE(has_conjunct(phi, pdl::box(U(), pdl::implies(Nb, pdl::conj(pdl::dia(pdl::converse("f2"), Nt),
                                                                         pdl::at_most(1, pdl::converse("f2"), Nt))))));
  EXPECT_TRUE(has_conjunct(phi, pdl::box(U(), pdl::implies(Nt, pdl::atom("P")))));
  EXPECT_TRUE(has_conjunct(phi, pdl::box(U(), pdl::implies(Nt, pdl::atom("Q")))));
  // One name for the shared tuple: 1 iff + 2 component axioms + 2 relation axioms.
  EXPECT_EQ(conjuncts(phi).size(), 5u);
}

TEST(TupleGraph, Example31) {
  auto e = schema_of(read_corpus("empty.schema"));
  auto q = query_of(read_corpus("tuple_p.query"), e);
  auto q2 = query_of(read_corpus("tuple_r.query"), e);
  auto p = red::skolemize(e, q, q2);
  auto g = red::build_tuple_graph(p.rhs_disjuncts[0]);
  EXPECT_EQ(g.terms.size(), 3u);
  EXPECT_EQ(g.tuples.size(), 1u);
  EXPECT_EQ(g.edges.size(), 3u);
  EXPECT_TRUE(red::cyclic_variables(g).empty());

  std::vector<char> tm, um;
  auto t = red::visit(g, red::start_node(g, g.components()[0]), tm, um);
  EXPECT_EQ(t.to_string(g),
            "[!a1 & <(inv (prog f1))>[(!a1,!a2,z) & (atom r) & <(prog f1)>!a1 & <(prog f2)>!a2 & <(prog f3)>z]]");
}

TEST(TupleGraph, CyclesInTheMultigraph) {
  auto s = schema_of("(declare-concept A) (declare-relation R 2)");
  auto graph = [&](const char* body) {
    auto q = query_of(std::string("(query q (x) (disjunct ") + body + "))", s);
    auto p = red::skolemize(s, q, q);
    return red::build_tuple_graph(p.rhs_disjuncts[0]);
  };
  auto g1 = graph("(c A (var x)) (r R (var z1) (var z2)) (r R (var z2) (var z1))");
  EXPECT_EQ(g1.tuples.size(), 2u);
  EXPECT_EQ(names_of(red::cyclic_variables(g1)), (std::set<std::string>{"z1", "z2"}));
  auto g2 = graph("(r R (var x) (var z)) (r R (var z) (var z))");
  EXPECT_EQ(names_of(red::cyclic_variables(g2)), (std::set<std::string>{"z"}));
  auto g3 = graph("(r R (var x) (var z1)) (r R (var z1) (var z2))");
  EXPECT_TRUE(red::cyclic_variables(g3).empty());
  auto g4 = graph("(r R (var x) (const c)) (r R (const c) (var x)) (r R (var x) (var z))");
  EXPECT_TRUE(red::cyclic_variables(g4).empty());
  EXPECT_EQ(g1.components().size(), 2u);
}

TEST(TupleGraph, BridgeDetectionMatchesEdgeDeletion) {
  std::mt19937 rng(5);
  auto s = schema_of("(declare-relation R 2) (declare-relation T 3)");
  const char* vars[] = {"x", "z1", "z2", "z3", "z4"};
  for (int round = 0; round < 300; ++round) {
    std::string body;
    int atoms = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < atoms; ++i) {
      auto v = [&] { return std::string("(var ") + vars[rng() % 5] + ")"; };
      body += rng() % 2 ? "(r R " + v() + " " + v() + ")" : "(r T " + v() + " " + v() + " " + v() + ")";
    }
    body += "(r R (var x) (var x))";
    auto q = query_of("(query q (x) (disjunct " + body + "))", s);
    auto p = red::skolemize(s, q, q);
    auto g = red::build_tuple_graph(p.rhs_disjuncts[0]);
    EXPECT_EQ(names_of(red::cyclic_variables(g)), cyclic_by_deletion(g)) << body;
  }
}

TEST(Visit, SingleNodeAndMarkedComponents) {
  auto s = schema_of("(declare-concept A) (declare-relation R 2)");
  auto q = query_of("(query q (x) (disjunct (c A (var x))))", s);
  auto p = red::skolemize(s, q, q);
  auto g = red::build_tuple_graph(p.rhs_disjuncts[0]);
  std::vector<char> tm, um;
  EXPECT_EQ(red::visit(g, 0, tm, um).to_string(g), "[!a1 & (atom A)]");

  auto qz = query_of("(query q (x) (disjunct (r R (var z) (var z)) (r R (var x) (var z))))", s);
  auto pz = red::skolemize(s, qz, qz);
  auto gz = red::build_tuple_graph(pz.rhs_disjuncts[0]);
  std::vector<char> tm2, um2;
  auto t = red::visit(gz, red::start_node(gz, gz.components()[0]), tm2, um2);
  EXPECT_EQ(t.to_string(gz),
            "[!a1 & <(inv (prog f1))>[(!a1,z) & (atom R) & <(prog f1)>!a1 & <(prog f2)>[z & "
            "<(inv (prog f1))>[(z,z) & (atom R) & <(prog f1)>z & <(prog f2)>z]]]]");
  EXPECT_TRUE(std::all_of(tm2.begin(), tm2.end(), [](char c) { return c != 0; }));
  EXPECT_TRUE(std::all_of(um2.begin(), um2.end(), [](char c) { return c != 0; }));
}

TEST(Partitions, BellCountsAndCover) {
  for (std::size_t n = 0; n <= 7; ++n) {
    std::vector<std::string> items;
    for (std::size_t i = 0; i < n; ++i) items.push_back("v" + std::to_string(i));
    auto ps = red::partitions(items);
    EXPECT_EQ(ps.size(), bell(n));
    std::set<std::vector<std::vector<std::string>>> distinct(ps.begin(), ps.end());
    EXPECT_EQ(distinct.size(), ps.size());
    for (const auto& p : ps) {
      std::multiset<std::string> covered;
      for (const auto& cls : p) {
        EXPECT_FALSE(cls.empty());
        covered.insert(cls.begin(), cls.end());
      }
      EXPECT_EQ(covered, std::multiset<std::string>(items.begin(), items.end()));
    }
  }
}

TEST(PhiConjPrime, CountsMatchEmittedFormula) {
  auto s = schema_of("(declare-concept A) (declare-relation R 2)");
  struct Case {
    const char* lhs;
    const char* rhs;
  };
  const Case cases[] = {
      {"(r R (var x) (var y)) (c A (const k))", "(r R (var x) (var z1)) (r R (var z1) (var z2)) (r R (var z2) (var x))"},
      {"(r R (var x) (var y))", "(r R (var z1) (var z2)) (r R (var z2) (var z1)) (c A (var x))"},
      {"(c A (var x))", "(r R (var x) (var z1)) (r R (var x) (var z2)) (r R (var x) (var z3))"},
      {"(r R (var x) (var x))", "(r R (var x) (var z)) (r R (var z) (var x)) (c A (const m))"},
  };
  for (const auto& c : cases) {
    auto q = query_of(std::string("(query q (x) (disjunct ") + c.lhs + "))", s);
    auto q2 = query_of(std::string("(query q2 (x) (disjunct ") + c.rhs + "))", s);
    auto p = red::skolemize(s, q, q2);
    red::DisjunctStats st;
    auto phi = red::build_phi_conj_prime(p, 0, &st);
    const auto zs = q2.existential_variables(0);
    EXPECT_EQ(st.l2, zs.size());
    EXPECT_EQ(st.partitions.size(), bell(zs.size()));
    std::size_t total = 0;
    auto parts = red::partitions(zs);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      std::map<std::string, dlr::Term> sub;
      for (const auto& cls : parts[i])
        for (const auto& v : cls) sub[v] = dlr::Term::var(*std::min_element(cls.begin(), cls.end()));
      auto conj = p.rhs_disjuncts[0];
      for (auto& a : conj)
        for (auto& t : a.terms)
          if (t.is_var()) t = sub.at(t.name);
      auto expected = ipow(p.candidates.size(), cyclic_by_deletion(red::build_tuple_graph(conj)).size());
      EXPECT_EQ(st.partitions[i].instantiations, expected) << c.rhs << " partition " << i;
      total += expected;
    }
    EXPECT_EQ(conjuncts(pdl::neg(phi)).size(), total) << c.rhs;
  }
}

TEST(PhiConjPrime, TreeShapedGivesOneInstantiation) {
  auto s = schema_of("(declare-concept A) (declare-relation R 2)");
  auto q = query_of("(query q (x) (disjunct (c A (var x))))", s);
  auto q2 = query_of("(query q2 (x) (disjunct (r R (var x) (var z1)) (r R (var x) (var z2)) (c A (var z2))))", s);
  auto p = red::skolemize(s, q, q2);
  red::DisjunctStats st;
  red::build_phi_conj_prime(p, 0, &st);
  ASSERT_EQ(st.partitions.size(), 2u);
  for (const auto& ps : st.partitions) EXPECT_EQ(ps.instantiations, 1u);
}

TEST(PhiAux, NamesAndConstants) {
  auto s = schema_of("(declare-concept A) (declare-concept B)");
  auto q = query_of("(query q (x) (disjunct (c A (var x)) (c A (const c1))))", s);
  auto q2 = query_of("(query q2 (x) (disjunct (c B (var x)) (c B (const c2))))", s);
  auto r = red::build_reduction(s, q, q2);
  auto N1 = pdl::atom("$N:#c1"), N2 = pdl::atom("$N:#c2"), Na = pdl::atom("$N:!a1");
  EXPECT_TRUE(has_conjunct(r.phi_aux, pdl::box(U(), pdl::implies(N1, pdl::neg(N2)))));
  for (auto n : {N1, N2, Na}) EXPECT_TRUE(has_conjunct(r.phi_aux, pdl::dia(red::create(), n)));
  EXPECT_FALSE(has_conjunct(r.phi_aux, pdl::box(U(), pdl::implies(Na, pdl::neg(N1)))));
  EXPECT_FALSE(has_conjunct(r.phi_aux, pdl::box(U(), pdl::implies(N2, pdl::neg(N1)))));
  // Agreement formulas for a closure member.
  auto phi = pdl::atom("A");
  EXPECT_TRUE(has_conjunct(r.phi_aux, pdl::box(U(), pdl::implies(pdl::conj(Na, phi), pdl::box(U(), pdl::implies(Na, phi))))));
}

TEST(PhiAux, SkolemsOnlyGetNoDistinctness) {
  auto e = schema_of(read_corpus("empty.schema"));
  auto r = red::build_reduction(e, query_of(read_corpus("tuple_p.query"), e), query_of(read_corpus("tuple_r.query"), e));
  auto Na1 = pdl::atom("$N:!a1"), Na2 = pdl::atom("$N:!a2");
  EXPECT_FALSE(has_conjunct(r.phi_aux, pdl::box(U(3), pdl::implies(Na1, pdl::neg(Na2)))));
  EXPECT_EQ(r.stats.l1, 2u);
  EXPECT_EQ(r.stats.partitions(), 1u);
  EXPECT_EQ(r.stats.instantiations(), 1u);
}

// A root with create edges to the states named a1, a2 and to the
// tuple state t, which satisfies p and points to a1 and a2.
TEST(Fixture, TuplePairStructure) {
  auto e = schema_of(read_corpus("empty.schema"));
  auto q = query_of(read_corpus("tuple_p.query"), e);
  auto q2 = query_of(read_corpus("tuple_r.query"), e);
  auto r = red::build_reduction(e, q, q2);
  pdl::Kripke m = pdl::parse_kripke(R"(
    (kripke (states root a1 a2 t)
      (label a1 $N:!a1 $T1) (label a2 $N:!a2 $T1) (label t $N:<!a1,!a2> p $T2)
      (edge f1 t a1) (edge f2 t a2)
      (edge create root a1) (edge create root a2) (edge create root t)))");
  int root = m.state("root");
  EXPECT_TRUE(pdl::holds(m, root, r.phi_conj[0]));
  EXPECT_TRUE(pdl::holds(m, root, pdl::neg(r.phi_conj_prime[0])));
  // Adding an r-tuple over (a1, a2, _) makes the right-hand query true.
  m.add_state("u");
  m.add_state("z");
  m.label(m.state("u"), "r");
  m.label(m.state("u"), "$T3");
  m.label(m.state("z"), "$T1");
  m.edge("f1", m.state("u"), m.state("a1"));
  m.edge("f2", m.state("u"), m.state("a2"));
  m.edge("f3", m.state("u"), m.state("z"));
  EXPECT_FALSE(pdl::holds(m, root, pdl::neg(r.phi_conj_prime[0])));
}

// On structures that reify an interpretation, the emitted rhs encoding agrees
// with [U](N_a1 => [f1-](r => [f2]not N_a2 or [f3]F)). Nesting [f3]F under
// [f2] instead would make the formula trivially true at element states.
TEST(Fixture, Example31DisplayedFormEquivalent) {
  auto e = schema_of(read_corpus("empty.schema"));
  auto r = red::build_reduction(e, query_of(read_corpus("tuple_p.query"), e), query_of(read_corpus("tuple_r.query"), e));
  auto Na1 = pdl::atom("$N:!a1"), Na2 = pdl::atom("$N:!a2");
  auto displayed = pdl::box(U(3), pdl::implies(Na1, pdl::box(pdl::converse("f1"),
      pdl::implies(pdl::atom("r"), pdl::disj(pdl::box(pdl::prog("f2"), pdl::neg(Na2)), pdl::box(pdl::prog("f3"), pdl::bottom()))))));
  std::mt19937 rng(31);
  for (int round = 0; round < 200; ++round) {
    const int d = 1 + static_cast<int>(rng() % 3);
    pdl::Kripke m;
    for (int i = 0; i < d; ++i) {
      m.add_state("e" + std::to_string(i));
      m.label(i, "$T1");
      if (rng() % 3 == 0) m.label(i, "$N:!a1");
      if (rng() % 3 == 0) m.label(i, "$N:!a2");
    }
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          if (rng() % 4 == 0) {
            int s = m.add_state("t" + std::to_string(a) + std::to_string(b) + std::to_string(c));
            m.label(s, "$T3");
            if (rng() % 2) m.label(s, "r");
            m.edge("f1", s, a);
            m.edge("f2", s, b);
            m.edge("f3", s, c);
          }
    for (int s = 1; s < m.size(); ++s) m.edge("create", 0, s);
    EXPECT_EQ(pdl::model_check(m, pdl::neg(r.phi_conj_prime[0])), pdl::model_check(m, displayed)) << round;
  }
}

TEST(Reify, SalesModel) {
  auto sales = schema_of(read_corpus("sales.schema"));
  auto q = query_of(read_corpus("sales_q.query"), sales);
  auto q2 = query_of(read_corpus("sales_q2_literal.query"), sales);
  auto r = red::build_reduction(sales, q, q2);
  // m controls d, both sold; m sold to itself; (m, m, m) is in top3 without being a sale... it is, so
  // q2 holds at m only if some (m, w1, w2) is outside SOLD. Here every top3 tuple is a sale.
  auto I = fm::parse_interpretation(R"(
    (interpretation (domain 2)
      (top 2 (0 1)) (top 3 (0 0 0) (1 0 0))
      (concept Dept 0 1) (concept MainDept 0) (concept Company 0) (concept Money 0)
      (relation CONTROLS (0 1)) (relation SOLD (0 0 0) (1 0 0))))");
  ASSERT_TRUE(fm::is_model(I, sales));
  auto rf = red::reify(I, r.problem, {0});
  EXPECT_TRUE(pdl::holds(rf.model, rf.root, r.phi));
  EXPECT_THROW(red::reify(I, r.problem, {1}), std::invalid_argument);
}

// Any finite counterexample found by the oracle reifies to a model of the
// encoding, checked at the root.
TEST(Reify, OracleCountermodelsSatisfyEncoding) {
  int found = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto inst = gen::generate_micro(seed);
    fm::OracleOptions opt;
    opt.bound = 2;
    auto res = fm::find_containment_counterexample(inst.schema, inst.lhs, inst.rhs, opt);
    if (!res.found()) continue;
    ++found;
    auto r = red::build_reduction(inst.schema, inst.lhs, inst.rhs);
    auto rf = red::reify(*res.model, r.problem, res.tuple);
    EXPECT_TRUE(pdl::holds(rf.model, rf.root, r.phi)) << inst.to_sexpr();
  }
  EXPECT_GE(found, 50);
}
