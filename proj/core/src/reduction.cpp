#include "dlrq/reduction.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace dlrq::red {

using pdl::Formula;
using pdl::Program;

Formula top_atom(int arity) { return pdl::atom("$T" + std::to_string(arity)); }
Program component(int i) { return pdl::prog("f" + std::to_string(i)); }
Program create() { return pdl::prog("create"); }

Program universal(int n_max) {
  std::vector<Program> steps{create()};
  for (int i = 1; i <= n_max; ++i) steps.push_back(component(i));
  steps.push_back(pdl::converse("create"));
  for (int i = 1; i <= n_max; ++i) steps.push_back(pdl::converse("f" + std::to_string(i)));
  return pdl::star(pdl::alt(steps));
}

namespace {

Program component_inv(int i) { return pdl::converse("f" + std::to_string(i)); }

}  // namespace

Formula sigma(const dlr::Concept& c) {
  using K = dlr::ConceptKind;
  switch (c->kind) {
    case K::Top: return top_atom(1);
    case K::Atomic: return pdl::atom(c->name);
    case K::Not: return pdl::conj(top_atom(1), pdl::neg(sigma(c->left)));
    case K::And: return pdl::conj(sigma(c->left), sigma(c->right));
    case K::SomePath: return pdl::dia(sigma(c->path), sigma(c->left));
    case K::SomeRel: return pdl::dia(component_inv(c->component), sigma(c->relation));
    case K::AtMost: return pdl::at_most(c->count, component_inv(c->component), sigma(c->relation));
  }
  throw std::logic_error("sigma: unknown concept");
}

Formula sigma(const dlr::Relation& r) {
  using K = dlr::RelationKind;
  switch (r->kind) {
    case K::Top: return top_atom(r->arity);
    case K::Atomic: return pdl::atom(r->name);
    case K::Select: return pdl::conj(top_atom(r->arity), pdl::box(component(r->component), sigma(r->filler)));
    case K::Not: return pdl::conj(top_atom(r->arity), pdl::neg(sigma(r->left)));
    case K::And: return pdl::conj(sigma(r->left), sigma(r->right));
  }
  throw std::logic_error("sigma: unknown relation");
}

Program sigma(const dlr::Path& e) {
  using K = dlr::PathKind;
  switch (e->kind) {
    case K::Epsilon: return pdl::skip();
    case K::Proj:
      return pdl::seq({component_inv(e->from), pdl::test(sigma(e->relation)), component(e->to)});
    case K::Comp: return pdl::seq(sigma(e->left), sigma(e->right));
    case K::Union: return pdl::alt(sigma(e->left), sigma(e->right));
    case K::Star: return pdl::star(sigma(e->left));
  }
  throw std::logic_error("sigma: unknown path");
}

Formula build_phi_schema(const dlr::Schema& s) {
  const int n_max = s.n_max();
  const Program u = universal(n_max);
  std::vector<Formula> out;
  auto global = [&](Formula f) { out.push_back(pdl::box(u, f)); };

  std::vector<Formula> tops;
  for (int n = 1; n <= n_max; ++n) tops.push_back(top_atom(n));
  global(pdl::disj(tops));
  for (int i = 1; i <= n_max; ++i) global(pdl::at_most(1, component(i), pdl::top()));
  for (int n = 2; n <= n_max; ++n) {
    std::vector<Formula> shape;
    for (int i = 1; i <= n; ++i) shape.push_back(pdl::dia(component(i), top_atom(1)));
    // f_{n_max+1} is not a program of the encoding, so [f_{n_max+1}]F is dropped.
    if (n < n_max) shape.push_back(pdl::box(component(n + 1), pdl::bottom()));
    global(pdl::iff(top_atom(n), pdl::conj(shape)));
  }
  for (int i = 1; i < n_max; ++i)
    global(pdl::implies(pdl::box(component(i), pdl::bottom()), pdl::box(component(i + 1), pdl::bottom())));
  for (const auto& a : s.signature.concepts) global(pdl::implies(pdl::atom(a), top_atom(1)));
  for (const auto& [p, n] : s.signature.relations) global(pdl::implies(pdl::atom(p), top_atom(n)));
  for (const auto& ci : s.concept_inclusions) global(pdl::implies(sigma(ci.lhs), sigma(ci.rhs)));
  for (const auto& ri : s.relation_inclusions) global(pdl::implies(sigma(ri.lhs), sigma(ri.rhs)));
  return pdl::conj(out);
}

// ---------------------------------------------------------------------------
// Names

std::string NameRegistry::atom_name(const dlr::Term& t) { return "$N:" + dlr::label(t); }

std::string NameRegistry::atom_name(const std::vector<dlr::Term>& tuple) {
  std::string s = "$N:<";
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (i) s += ",";
    s += dlr::label(tuple[i]);
  }
  return s + ">";
}

Formula NameRegistry::add(std::string a) {
  auto it = index_.find(a);
  if (it != index_.end()) return it->second;
  Formula f = pdl::atom(a);
  index_.emplace(a, f);
  atoms_.push_back(std::move(a));
  return f;
}

Formula NameRegistry::name(const dlr::Term& t) { return add(atom_name(t)); }
Formula NameRegistry::name(const std::vector<dlr::Term>& tuple) { return add(atom_name(tuple)); }

std::optional<Formula> NameRegistry::find(const dlr::Term& t) const {
  auto it = index_.find(atom_name(t));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<Formula> NameRegistry::find(const std::vector<dlr::Term>& tuple) const {
  auto it = index_.find(atom_name(tuple));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Skolemization

namespace {

dlr::Conjunction substitute(const dlr::Conjunction& conj, const std::map<std::string, dlr::Term>& sub) {
  dlr::Conjunction out = conj;
  for (auto& atom : out)
    for (auto& t : atom.terms)
      if (t.is_var()) {
        auto it = sub.find(t.name);
        if (it != sub.end()) t = it->second;
      }
  return out;
}

void add_unique(std::vector<dlr::Term>& v, const dlr::Term& t) {
  if (std::find(v.begin(), v.end(), t) == v.end()) v.push_back(t);
}

}  // namespace

ContainmentProblem skolemize(const dlr::Schema& s, const dlr::Query& q, const dlr::Query& q2) {
  if (q.arity() != q2.arity())
    throw std::invalid_argument("arity mismatch: " + std::to_string(q.arity()) + " vs " +
                                std::to_string(q2.arity()));
  ContainmentProblem p;
  p.schema = s;
  p.lhs = q;
  p.rhs = q2;
  p.n_max = s.n_max();

  std::map<std::string, dlr::Term> head1, head2;
  for (std::size_t i = 0; i < q.arity(); ++i) {
    p.head.push_back(dlr::Term::skolem("a" + std::to_string(i + 1)));
    head1[q.head[i]] = p.head.back();
    head2[q2.head[i]] = p.head.back();
  }
  for (const auto& a : p.head) {
    p.names.name(a);
    add_unique(p.candidates, a);
  }

  for (std::size_t j = 0; j < q.disjuncts.size(); ++j) {
    auto sub = head1;
    std::vector<dlr::Term> skolems;
    for (const auto& v : q.existential_variables(j)) {
      skolems.push_back(dlr::Term::skolem("b" + std::to_string(j + 1) + "." + v));
      sub[v] = skolems.back();
    }
    auto conj = substitute(q.disjuncts[j], sub);
    for (const auto& b : skolems) {
      p.names.name(b);
      add_unique(p.candidates, b);
    }
    for (const auto& c : q.constants(j)) {
      p.names.name(c);
      add_unique(p.candidates, c);
    }
    for (const auto& atom : conj)
      if (!atom.is_concept()) p.names.name(atom.terms);
    p.lhs_skolems.push_back(std::move(skolems));
    p.lhs_disjuncts.push_back(std::move(conj));
  }
  for (const auto& c : q2.constants()) {
    p.names.name(c);
    add_unique(p.candidates, c);
  }
  for (const auto& d : q2.disjuncts) p.rhs_disjuncts.push_back(substitute(d, head2));
  return p;
}

Formula build_phi_conj(ContainmentProblem& p, std::size_t j) {
  const Program u = universal(p.n_max);
  const auto& conj = p.lhs_disjuncts.at(j);
  std::vector<Formula> out;
  std::vector<std::vector<dlr::Term>> seen;
  for (const auto& atom : conj) {
    if (atom.is_concept() || std::find(seen.begin(), seen.end(), atom.terms) != seen.end()) continue;
    seen.push_back(atom.terms);
    const int n = static_cast<int>(atom.terms.size());
    Formula nt = p.names.name(atom.terms);
    std::vector<Formula> shape;
    for (int i = 1; i <= n; ++i) shape.push_back(pdl::dia(component(i), p.names.name(atom.terms[i - 1])));
    if (n < p.n_max) shape.push_back(pdl::box(component(n + 1), pdl::bottom()));
    out.push_back(pdl::box(u, pdl::iff(nt, pdl::conj(shape))));
    for (int i = 1; i <= n; ++i)
      out.push_back(pdl::box(u, pdl::implies(p.names.name(atom.terms[i - 1]),
                                             pdl::conj(pdl::dia(component_inv(i), nt),
                                                       pdl::at_most(1, component_inv(i), nt)))));
  }
  for (const auto& atom : conj)
    if (atom.is_concept())
      out.push_back(pdl::box(u, pdl::implies(p.names.name(atom.terms[0]), sigma(atom.filler))));
  for (const auto& atom : conj)
    if (!atom.is_concept()) out.push_back(pdl::box(u, pdl::implies(p.names.name(atom.terms), sigma(atom.relation))));
  return pdl::conj(out);
}

// ---------------------------------------------------------------------------
// Tuple graphs

int TupleGraph::term_node(const dlr::Term& t) const {
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (terms[i].term == t) return static_cast<int>(i);
  return -1;
}

std::vector<std::vector<int>> TupleGraph::components() const {
  std::vector<int> parent(terms.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> root = [&](int x) { return parent[x] == x ? x : parent[x] = root(parent[x]); };
  for (const auto& tup : tuples) {
    int first = term_node(tup.terms[0]);
    for (const auto& t : tup.terms) parent[root(term_node(t))] = root(first);
  }
  std::vector<std::vector<int>> out;
  std::map<int, std::size_t> slot;
  for (int i = 0; i < static_cast<int>(terms.size()); ++i) {
    auto [it, fresh] = slot.emplace(root(i), out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(i);
  }
  return out;
}

TupleGraph build_tuple_graph(const dlr::Conjunction& conj) {
  TupleGraph g;
  auto term = [&](const dlr::Term& t) {
    int i = g.term_node(t);
    if (i >= 0) return i;
    g.terms.push_back({t, {}});
    return static_cast<int>(g.terms.size()) - 1;
  };
  for (const auto& atom : conj) {
    if (atom.is_concept()) {
      g.terms[term(atom.terms[0])].labels.push_back(sigma(atom.filler));
      continue;
    }
    for (const auto& t : atom.terms) term(t);
    auto it = std::find_if(g.tuples.begin(), g.tuples.end(), [&](const auto& n) { return n.terms == atom.terms; });
    if (it == g.tuples.end()) {
      g.tuples.push_back({atom.terms, {}});
      int ti = static_cast<int>(g.tuples.size()) - 1;
      for (std::size_t i = 0; i < atom.terms.size(); ++i)
        g.edges.push_back({ti, g.term_node(atom.terms[i]), static_cast<int>(i) + 1});
      it = g.tuples.end() - 1;
    }
    it->labels.push_back(sigma(atom.relation));
  }
  return g;
}

std::vector<dlr::Term> cyclic_variables(const TupleGraph& g) {
  // Undirected multigraph: term nodes 0..T-1, tuple nodes T..T+U-1.
  const int T = static_cast<int>(g.terms.size());
  const int V = T + static_cast<int>(g.tuples.size());
  std::vector<std::vector<std::pair<int, int>>> adj(V);  // (neighbour, edge id)
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    int a = T + g.edges[e].tuple, b = g.edges[e].term;
    adj[a].push_back({b, static_cast<int>(e)});
    adj[b].push_back({a, static_cast<int>(e)});
  }
  std::vector<int> disc(V, -1), low(V, 0);
  std::vector<char> bridge(g.edges.size(), 0);
  int timer = 0;
  std::function<void(int, int)> dfs = [&](int v, int via) {
    disc[v] = low[v] = timer++;
    for (auto [w, e] : adj[v]) {
      if (e == via) continue;
      if (disc[w] < 0) {
        dfs(w, e);
        low[v] = std::min(low[v], low[w]);
        if (low[w] > disc[v]) bridge[e] = 1;
      } else {
        low[v] = std::min(low[v], disc[w]);
      }
    }
  };
  for (int v = 0; v < V; ++v)
    if (disc[v] < 0) dfs(v, -1);
  std::vector<char> cyclic(T, 0);
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (!bridge[e]) cyclic[g.edges[e].term] = 1;
  std::vector<dlr::Term> out;
  for (int i = 0; i < T; ++i)
    if (cyclic[i] && g.terms[i].term.is_var()) out.push_back(g.terms[i].term);
  return out;
}

// ---------------------------------------------------------------------------
// Templates

namespace {

Template fixed(Formula f) {
  Template t;
  t.kind = Template::Kind::Fixed;
  t.fixed = f;
  return t;
}

Template hole(Template::Kind k, int node) {
  Template t;
  t.kind = k;
  t.node = node;
  return t;
}

Template diamond(Program p, Template body) {
  Template t;
  t.kind = Template::Kind::Dia;
  t.program = p;
  t.children.push_back(std::move(body));
  return t;
}

Template conjunction(std::vector<Template> parts) {
  if (parts.size() == 1) return std::move(parts[0]);
  Template t;
  t.kind = Template::Kind::And;
  t.children = std::move(parts);
  return t;
}

Template visit_tuple(const TupleGraph& g, int u, std::vector<char>& tm, std::vector<char>& um);

Template visit_term(const TupleGraph& g, int t, std::vector<char>& tm, std::vector<char>& um) {
  tm[t] = 1;
  std::vector<Template> parts{hole(Template::Kind::TermHole, t)};
  for (Formula l : g.terms[t].labels) parts.push_back(fixed(l));
  // Edges are stored tuple by tuple in component order.
  for (const auto& e : g.edges)
    if (e.term == t && !um[e.tuple]) parts.push_back(diamond(component_inv(e.index), visit_tuple(g, e.tuple, tm, um)));
  return conjunction(std::move(parts));
}

Template visit_tuple(const TupleGraph& g, int u, std::vector<char>& tm, std::vector<char>& um) {
  um[u] = 1;
  std::vector<Template> parts{hole(Template::Kind::TupleHole, u)};
  for (Formula l : g.tuples[u].labels) parts.push_back(fixed(l));
  for (const auto& e : g.edges) {
    if (e.tuple != u) continue;
    if (!tm[e.term])
      parts.push_back(diamond(component(e.index), visit_term(g, e.term, tm, um)));
    else
      parts.push_back(diamond(component(e.index), hole(Template::Kind::TermHole, e.term)));
  }
  return conjunction(std::move(parts));
}

}  // namespace

std::string Template::to_string(const TupleGraph& g) const {
  switch (kind) {
    case Kind::TermHole: return dlr::label(g.terms[node].term);
    case Kind::TupleHole: {
      std::string s = "(";
      const auto& ts = g.tuples[node].terms;
      for (std::size_t i = 0; i < ts.size(); ++i) s += (i ? "," : "") + dlr::label(ts[i]);
      return s + ")";
    }
    case Kind::Fixed: return pdl::to_sexpr(fixed);
    case Kind::Dia: return "<" + pdl::to_sexpr(program) + ">" + children[0].to_string(g);
    case Kind::And: {
      std::string s = "[";
      for (std::size_t i = 0; i < children.size(); ++i) s += (i ? " & " : "") + children[i].to_string(g);
      return s + "]";
    }
  }
  return "";
}

Template visit(const TupleGraph& g, int start_term, std::vector<char>& term_marked, std::vector<char>& tuple_marked) {
  term_marked.resize(g.terms.size(), 0);
  tuple_marked.resize(g.tuples.size(), 0);
  return visit_term(g, start_term, term_marked, tuple_marked);
}

int start_node(const TupleGraph& g, const std::vector<int>& component) {
  return *std::min_element(component.begin(), component.end(), [&](int a, int b) {
    return dlr::label(g.terms[a].term) < dlr::label(g.terms[b].term);
  });
}

Formula instantiate(const Template& t, const TupleGraph& g, const std::vector<Formula>& term_value) {
  switch (t.kind) {
    case Template::Kind::TermHole: return term_value.at(t.node);
    case Template::Kind::TupleHole: return top_atom(static_cast<int>(g.tuples[t.node].terms.size()));
    case Template::Kind::Fixed: return t.fixed;
    case Template::Kind::Dia: return pdl::dia(t.program, instantiate(t.children[0], g, term_value));
    case Template::Kind::And: {
      std::vector<Formula> parts;
      for (const auto& c : t.children) parts.push_back(instantiate(c, g, term_value));
      return pdl::conj(parts);
    }
  }
  throw std::logic_error("instantiate: unknown template");
}

std::vector<std::vector<std::vector<std::string>>> partitions(const std::vector<std::string>& items) {
  std::vector<std::vector<std::vector<std::string>>> out;
  const std::size_t n = items.size();
  std::vector<std::size_t> rgs(n, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t blocks) {
    if (i == n) {
      std::vector<std::vector<std::string>> classes(blocks);
      for (std::size_t k = 0; k < n; ++k) classes[rgs[k]].push_back(items[k]);
      out.push_back(std::move(classes));
      return;
    }
    for (std::size_t b = 0; b <= blocks; ++b) {
      rgs[i] = b;
      rec(i + 1, std::max(blocks, b + 1));
    }
  };
  rec(0, 0);
  return out;
}

Formula build_phi_conj_prime(ContainmentProblem& p, std::size_t j, DisjunctStats* stats) {
  const Program u = universal(p.n_max);
  const auto& conj = p.rhs_disjuncts.at(j);
  std::vector<std::string> zs = p.rhs.existential_variables(j);
  DisjunctStats local;
  local.l2 = zs.size();

  std::vector<Formula> candidates;
  for (const auto& c : p.candidates) candidates.push_back(p.names.name(c));

  std::vector<Formula> by_partition;
  for (const auto& classes : partitions(zs)) {
    std::map<std::string, dlr::Term> sub;
    for (const auto& cls : classes) {
      const std::string rep = *std::min_element(cls.begin(), cls.end());
      for (const auto& v : cls) sub[v] = dlr::Term::var(rep);
    }
    TupleGraph g = build_tuple_graph(substitute(conj, sub));

    std::vector<Template> templates;
    std::vector<char> tm, um;
    for (const auto& comp : g.components()) templates.push_back(visit(g, start_node(g, comp), tm, um));

    std::vector<Formula> value(g.terms.size(), nullptr);
    std::vector<int> open;  // term nodes of cyclic variables
    auto cyc = cyclic_variables(g);
    for (std::size_t i = 0; i < g.terms.size(); ++i) {
      const auto& t = g.terms[i].term;
      if (!t.is_var())
        value[i] = p.names.name(t);
      else if (std::find(cyc.begin(), cyc.end(), t) != cyc.end())
        open.push_back(static_cast<int>(i));
      else
        value[i] = top_atom(1);
    }

    PartitionStats ps;
    ps.cyclic = open.size();
    std::vector<Formula> disjuncts;
    std::vector<std::size_t> digit(open.size(), 0);
    if (!open.empty() && candidates.empty()) {
      local.partitions.push_back(ps);
      continue;
    }
    while (true) {
      for (std::size_t k = 0; k < open.size(); ++k) value[open[k]] = candidates[digit[k]];
      std::vector<Formula> parts;
      for (const auto& t : templates) parts.push_back(pdl::dia(u, instantiate(t, g, value)));
      disjuncts.push_back(pdl::conj(parts));
      ++ps.instantiations;
      std::size_t k = 0;
      while (k < digit.size() && ++digit[k] == candidates.size()) digit[k++] = 0;
      if (k == digit.size()) break;
    }
    local.partitions.push_back(ps);
    by_partition.push_back(pdl::disj(disjuncts));
  }
  if (stats) *stats = local;
  return pdl::disj(by_partition);
}

// ---------------------------------------------------------------------------
// Auxiliary part

Formula build_phi_aux(const Formula& phi_prime, const ContainmentProblem& p) {
  const Program u = universal(p.n_max);
  std::set<std::string> atoms, programs;
  pdl::collect_names(phi_prime, atoms, programs);
  std::vector<std::string> names;
  for (const auto& a : p.names.atoms())
    if (atoms.count(a)) names.push_back(a);

  std::vector<Formula> out;
  for (const auto& n : names) out.push_back(pdl::dia(create(), pdl::atom(n)));

  std::vector<dlr::Term> consts;
  for (const auto& c : p.candidates)
    if (c.is_const() && atoms.count(NameRegistry::atom_name(c))) consts.push_back(c);
  for (std::size_t i = 0; i < consts.size(); ++i)
    for (std::size_t k = i + 1; k < consts.size(); ++k)
      out.push_back(pdl::box(u, pdl::implies(pdl::atom(NameRegistry::atom_name(consts[i])),
                                             pdl::neg(pdl::atom(NameRegistry::atom_name(consts[k]))))));

  const auto cl = pdl::fl_closure(phi_prime);
  std::vector<Formula> shared(cl.begin(), cl.end());
  std::unordered_set<Formula> in_shared(cl.begin(), cl.end());
  auto add = [&](Formula f) {
    if (in_shared.insert(f).second) shared.push_back(f);
  };
  std::vector<Program> diamond_programs;
  std::set<std::string> basic_names;
  std::unordered_set<Program> seen_program;
  for (Formula f : cl) {
    if (f->kind == pdl::FormulaKind::Dia) {
      add(pdl::dia(pdl::bar(f->program, names), f->left));
      if (seen_program.insert(f->program).second) diamond_programs.push_back(f->program);
    }
    if (f->kind == pdl::FormulaKind::Dia || f->kind == pdl::FormulaKind::AtMost) {
      std::set<std::string> a, progs;
      pdl::collect_names(f, a, progs);
      basic_names.insert(progs.begin(), progs.end());
    }
  }
  std::vector<Program> steps;
  for (const auto& f : basic_names) {
    steps.push_back(pdl::prog(f));
    steps.push_back(pdl::converse(f));
  }
  for (Program r : diamond_programs)
    for (Program pre : pdl::prefixes(r)) {
      Program b = pdl::bar(pre, names);
      for (Program step : steps)
        for (const auto& n : names) add(pdl::dia(pdl::seq(b, step), pdl::atom(n)));
    }

  for (const auto& n : names) {
    Formula nf = pdl::atom(n);
    for (Formula phi : shared)
      out.push_back(pdl::box(u, pdl::implies(pdl::conj(nf, phi), pdl::box(u, pdl::implies(nf, phi)))));
  }
  return pdl::conj(out);
}

// ---------------------------------------------------------------------------
// Assembly

std::size_t ReductionStats::partitions() const {
  std::size_t n = 0;
  for (const auto& d : disjuncts) n += d.partitions.size();
  return n;
}

std::size_t ReductionStats::instantiations() const {
  std::size_t n = 0;
  for (const auto& d : disjuncts)
    for (const auto& p : d.partitions) n += p.instantiations;
  return n;
}

std::string ReductionStats::to_json() const {
  nlohmann::json j;
  j["formula_size"] = formula_size;
  j["l1"] = l1;
  auto l2 = nlohmann::json::array();
  auto parts = nlohmann::json::array();
  auto inst = nlohmann::json::array();
  for (const auto& d : disjuncts) {
    l2.push_back(d.l2);
    parts.push_back(d.partitions.size());
    auto per = nlohmann::json::array();
    for (const auto& p : d.partitions) per.push_back(p.instantiations);
    inst.push_back(per);
  }
  j["l2_per_disjunct"] = l2;
  j["partitions"] = parts;
  j["instantiations"] = inst;
  return j.dump();
}

namespace {

dlr::Schema extended_schema(const dlr::Schema& s, const dlr::Query& q, const dlr::Query& q2) {
  dlr::Schema out = s;
  for (const dlr::Query* query : {&q, &q2})
    for (const auto& d : query->disjuncts)
      for (const auto& a : d) {
        if (a.is_concept())
          dlr::collect_names(a.filler, out.signature.concepts, out.signature.relations);
        else
          dlr::collect_names(a.relation, out.signature.concepts, out.signature.relations);
      }
  return out;
}

void require_typed(const dlr::Diagnostics& d) {
  if (!d.empty()) throw std::invalid_argument(d.front());
}

}  // namespace

Reduction build_reduction(const dlr::Schema& s, const dlr::Query& q, const dlr::Query& q2) {
  dlr::Schema full = extended_schema(s, q, q2);
  require_typed(dlr::check_well_typed(full));
  require_typed(dlr::check_well_typed(q, full.signature));
  require_typed(dlr::check_well_typed(q2, full.signature));

  Reduction r;
  r.problem = skolemize(full, q, q2);
  auto& p = r.problem;
  r.phi_schema = build_phi_schema(full);
  for (std::size_t j = 0; j < p.lhs_disjuncts.size(); ++j) r.phi_conj.push_back(build_phi_conj(p, j));
  r.stats.disjuncts.resize(p.rhs_disjuncts.size());
  std::vector<Formula> negated;
  for (std::size_t j = 0; j < p.rhs_disjuncts.size(); ++j) {
    r.phi_conj_prime.push_back(build_phi_conj_prime(p, j, &r.stats.disjuncts[j]));
    negated.push_back(pdl::neg(r.phi_conj_prime.back()));
  }
  r.phi_prime = pdl::conj({r.phi_schema, pdl::disj(r.phi_conj), pdl::conj(negated)});
  r.phi_aux = build_phi_aux(r.phi_prime, p);
  r.phi = pdl::conj(r.phi_prime, r.phi_aux);
  r.stats.l1 = p.candidates.size();
  r.stats.formula_size = pdl::dag_size(r.phi);
  std::size_t aux = 0;
  for (Formula f = r.phi_aux; f->kind == pdl::FormulaKind::And; f = f->left) ++aux;
  r.stats.aux_conjuncts = aux + 1;
  return r;
}

// ---------------------------------------------------------------------------
// Reification of a finite counterexample

namespace {

struct Match {
  std::size_t disjunct;
  std::map<dlr::Term, fm::Element> value;
};

std::optional<Match> find_match(const fm::Interpretation& I, const ContainmentProblem& p, const fm::Tuple& answer) {
  for (std::size_t j = 0; j < p.lhs_disjuncts.size(); ++j) {
    std::map<dlr::Term, fm::Element> value;
    for (std::size_t i = 0; i < p.head.size(); ++i) value[p.head[i]] = answer[i];
    const auto& conj = p.lhs_disjuncts[j];
    std::vector<fm::ElementSet> cext;
    std::vector<fm::TupleSet> rext;
    for (const auto& a : conj) {
      cext.push_back(a.is_concept() ? fm::eval_concept(I, a.filler) : fm::ElementSet{});
      rext.push_back(a.is_concept() ? fm::TupleSet{} : fm::eval_relation(I, a.relation));
    }
    auto val = [&](const dlr::Term& t) {
      if (t.is_const()) return I.constants.at(t.name);
      return value.at(t);
    };
    const auto& bs = p.lhs_skolems[j];
    std::vector<int> digit(bs.size(), 0);
    while (true) {
      for (std::size_t k = 0; k < bs.size(); ++k) value[bs[k]] = digit[k];
      bool ok = true;
      for (std::size_t a = 0; a < conj.size() && ok; ++a) {
        if (conj[a].is_concept()) {
          ok = cext[a].count(val(conj[a].terms[0])) > 0;
        } else {
          fm::Tuple t;
          for (const auto& term : conj[a].terms) t.push_back(val(term));
          ok = rext[a].count(t) > 0;
        }
      }
      if (ok) return Match{j, value};
      std::size_t k = 0;
      while (k < digit.size() && ++digit[k] == I.domain_size) digit[k++] = 0;
      if (k == digit.size()) break;
    }
  }
  return std::nullopt;
}

std::string tuple_state_name(const fm::Tuple& t) {
  std::string s = "t(";
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
  return s + ")";
}

}  // namespace

Reified reify(const fm::Interpretation& I, const ContainmentProblem& p, const fm::Tuple& answer) {
  fm::require_valid(I);
  if (answer.size() != p.head.size()) throw std::invalid_argument("reify: answer arity mismatch");
  if (I.domain_size == 0) throw std::invalid_argument("reify: empty domain");
  if (fm::eval_query(I, p.rhs).count(answer)) throw std::invalid_argument("reify: answer satisfies the right query");
  auto match = find_match(I, p, answer);
  if (!match) throw std::invalid_argument("reify: answer does not satisfy the left query");

  Reified r;
  auto& m = r.model;
  for (int e = 0; e < I.domain_size; ++e) {
    int s = m.add_state("e" + std::to_string(e));
    m.label(s, "$T1");
  }
  for (const auto& [c, ext] : I.concepts)
    for (int e : ext) m.label(e, c);
  std::map<fm::Tuple, int> tuple_state;
  for (const auto& [n, ext] : I.top) {
    if (n < 2) continue;
    for (const auto& t : ext) {
      int s = m.add_state(tuple_state_name(t));
      tuple_state[t] = s;
      m.label(s, "$T" + std::to_string(n));
      for (std::size_t i = 0; i < t.size(); ++i) m.edge("f" + std::to_string(i + 1), s, t[i]);
    }
  }
  for (const auto& [rel, ext] : I.relations)
    for (const auto& t : ext) m.label(tuple_state.at(t), rel);
  r.root = answer.empty() ? 0 : answer[0];

  std::map<std::string, int> named;
  auto value = [&](const dlr::Term& t) -> std::optional<fm::Element> {
    if (t.is_const()) {
      auto it = I.constants.find(t.name);
      if (it == I.constants.end()) throw std::invalid_argument("reify: constant '" + t.name + "' not interpreted");
      return it->second;
    }
    auto it = match->value.find(t);
    if (it == match->value.end()) return std::nullopt;
    return it->second;
  };
  auto name_term = [&](const dlr::Term& t) {
    auto v = value(t);
    named.emplace(NameRegistry::atom_name(t), v ? *v : 0);
  };
  for (const auto& a : p.head) name_term(a);
  auto name_disjunct = [&](std::size_t j) {
    for (const auto& b : p.lhs_skolems[j]) name_term(b);
    for (const auto& atom : p.lhs_disjuncts[j]) {
      for (const auto& t : atom.terms) name_term(t);
      if (atom.is_concept()) continue;
      fm::Tuple vals;
      bool known = true;
      for (const auto& t : atom.terms) {
        auto v = value(t);
        known = known && v.has_value();
        if (v) vals.push_back(*v);
      }
      auto it = known ? tuple_state.find(vals) : tuple_state.end();
      named.emplace(NameRegistry::atom_name(atom.terms), it == tuple_state.end() ? r.root : it->second);
    }
  };
  name_disjunct(match->disjunct);
  for (std::size_t j = 0; j < p.lhs_disjuncts.size(); ++j) name_disjunct(j);
  for (const auto& c : p.candidates)
    if (c.is_const()) name_term(c);
  for (const auto& [n, s] : named) {
    m.label(s, n);
    m.edge("create", r.root, s);
  }
  return r;
}

}  // namespace dlrq::red
