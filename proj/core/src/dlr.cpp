#include "dlrq/dlr.hpp"

#include <algorithm>
#include <functional>

namespace dlrq::dlr {

// ---------------------------------------------------------------------------
// Constructors

Concept top1() { return std::make_shared<ConceptNode>(ConceptNode{ConceptKind::Top}); }

Concept atomic_concept(std::string name) {
  ConceptNode n{ConceptKind::Atomic};
  n.name = std::move(name);
  return std::make_shared<ConceptNode>(std::move(n));
}

Concept negate(Concept c) {
  ConceptNode n{ConceptKind::Not};
  n.left = std::move(c);
  return std::make_shared<ConceptNode>(std::move(n));
}

Concept conjoin(Concept a, Concept b) {
  ConceptNode n{ConceptKind::And};
  n.left = std::move(a);
  n.right = std::move(b);
  return std::make_shared<ConceptNode>(std::move(n));
}

Concept some(Path e, Concept c) {
  ConceptNode n{ConceptKind::SomePath};
  n.path = std::move(e);
  n.left = std::move(c);
  return std::make_shared<ConceptNode>(std::move(n));
}

Concept all(Path e, Concept c) { return negate(some(std::move(e), negate(std::move(c)))); }

Concept some_rel(int component, Relation r) {
  ConceptNode n{ConceptKind::SomeRel};
  n.component = component;
  n.relation = std::move(r);
  return std::make_shared<ConceptNode>(std::move(n));
}

Concept at_most(int count, int component, Relation r) {
  ConceptNode n{ConceptKind::AtMost};
  n.count = count;
  n.component = component;
  n.relation = std::move(r);
  return std::make_shared<ConceptNode>(std::move(n));
}

Relation top_n(int arity) {
  RelationNode n{RelationKind::Top};
  n.arity = arity;
  return std::make_shared<RelationNode>(std::move(n));
}

Relation atomic_relation(std::string name, int arity) {
  RelationNode n{RelationKind::Atomic};
  n.arity = arity;
  n.name = std::move(name);
  return std::make_shared<RelationNode>(std::move(n));
}

Relation select(int component, int arity, Concept c) {
  RelationNode n{RelationKind::Select};
  n.arity = arity;
  n.component = component;
  n.filler = std::move(c);
  return std::make_shared<RelationNode>(std::move(n));
}

Relation negate(Relation r) {
  RelationNode n{RelationKind::Not};
  n.arity = r->arity;
  n.left = std::move(r);
  return std::make_shared<RelationNode>(std::move(n));
}

Relation conjoin(Relation a, Relation b) {
  RelationNode n{RelationKind::And};
  n.arity = a->arity;
  n.left = std::move(a);
  n.right = std::move(b);
  return std::make_shared<RelationNode>(std::move(n));
}

Path epsilon() { return std::make_shared<PathNode>(PathNode{PathKind::Epsilon}); }

Path proj(Relation r, int from, int to) {
  PathNode n{PathKind::Proj};
  n.relation = std::move(r);
  n.from = from;
  n.to = to;
  return std::make_shared<PathNode>(std::move(n));
}

Path compose(Path a, Path b) {
  PathNode n{PathKind::Comp};
  n.left = std::move(a);
  n.right = std::move(b);
  return std::make_shared<PathNode>(std::move(n));
}

Path unite(Path a, Path b) {
  PathNode n{PathKind::Union};
  n.left = std::move(a);
  n.right = std::move(b);
  return std::make_shared<PathNode>(std::move(n));
}

Path star(Path e) {
  PathNode n{PathKind::Star};
  n.left = std::move(e);
  return std::make_shared<PathNode>(std::move(n));
}

// ---------------------------------------------------------------------------
// Structural equality

bool equal(const Concept& a, const Concept& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case ConceptKind::Top: return true;
    case ConceptKind::Atomic: return a->name == b->name;
    case ConceptKind::Not: return equal(a->left, b->left);
    case ConceptKind::And: return equal(a->left, b->left) && equal(a->right, b->right);
    case ConceptKind::SomePath: return equal(a->path, b->path) && equal(a->left, b->left);
    case ConceptKind::SomeRel: return a->component == b->component && equal(a->relation, b->relation);
    case ConceptKind::AtMost:
      return a->count == b->count && a->component == b->component && equal(a->relation, b->relation);
  }
  return false;
}

bool equal(const Relation& a, const Relation& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind || a->arity != b->arity) return false;
  switch (a->kind) {
    case RelationKind::Top: return true;
    case RelationKind::Atomic: return a->name == b->name;
    case RelationKind::Select: return a->component == b->component && equal(a->filler, b->filler);
    case RelationKind::Not: return equal(a->left, b->left);
    case RelationKind::And: return equal(a->left, b->left) && equal(a->right, b->right);
  }
  return false;
}

bool equal(const Path& a, const Path& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case PathKind::Epsilon: return true;
    case PathKind::Proj: return a->from == b->from && a->to == b->to && equal(a->relation, b->relation);
    case PathKind::Comp:
    case PathKind::Union: return equal(a->left, b->left) && equal(a->right, b->right);
    case PathKind::Star: return equal(a->left, b->left);
  }
  return false;
}

bool equal(const Atom& a, const Atom& b) {
  if (a.is_concept() != b.is_concept() || a.terms != b.terms) return false;
  return a.is_concept() ? equal(a.filler, b.filler) : equal(a.relation, b.relation);
}

bool equal(const Query& a, const Query& b) {
  if (a.name != b.name || a.head != b.head || a.disjuncts.size() != b.disjuncts.size()) return false;
  for (std::size_t j = 0; j < a.disjuncts.size(); ++j) {
    const auto& x = a.disjuncts[j];
    const auto& y = b.disjuncts[j];
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!equal(x[i], y[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Printing

std::string to_sexpr(const Concept& c) {
  switch (c->kind) {
    case ConceptKind::Top: return "top1";
    case ConceptKind::Atomic: return c->name;
    case ConceptKind::Not: return "(not " + to_sexpr(c->left) + ")";
    case ConceptKind::And: return "(and " + to_sexpr(c->left) + " " + to_sexpr(c->right) + ")";
    case ConceptKind::SomePath: return "(some " + to_sexpr(c->path) + " " + to_sexpr(c->left) + ")";
    case ConceptKind::SomeRel: return "(some-rel " + std::to_string(c->component) + " " + to_sexpr(c->relation) + ")";
    case ConceptKind::AtMost:
      return "(atmost " + std::to_string(c->count) + " " + std::to_string(c->component) + " " +
             to_sexpr(c->relation) + ")";
  }
  return {};
}

std::string to_sexpr(const Relation& r) {
  switch (r->kind) {
    case RelationKind::Top: return "(top " + std::to_string(r->arity) + ")";
    case RelationKind::Atomic: return r->name;
    case RelationKind::Select:
      return "(sel " + std::to_string(r->component) + " " + std::to_string(r->arity) + " " + to_sexpr(r->filler) +
             ")";
    case RelationKind::Not: return "(not-r " + to_sexpr(r->left) + ")";
    case RelationKind::And: return "(and-r " + to_sexpr(r->left) + " " + to_sexpr(r->right) + ")";
  }
  return {};
}

std::string to_sexpr(const Path& e) {
  switch (e->kind) {
    case PathKind::Epsilon: return "eps";
    case PathKind::Proj:
      return "(proj " + to_sexpr(e->relation) + " " + std::to_string(e->from) + " " + std::to_string(e->to) + ")";
    case PathKind::Comp: return "(comp " + to_sexpr(e->left) + " " + to_sexpr(e->right) + ")";
    case PathKind::Union: return "(union " + to_sexpr(e->left) + " " + to_sexpr(e->right) + ")";
    case PathKind::Star: return "(star " + to_sexpr(e->left) + ")";
  }
  return {};
}

std::string to_sexpr(const Term& t) {
  switch (t.kind) {
    case TermKind::Var: return "(var " + t.name + ")";
    case TermKind::Const: return "(const " + t.name + ")";
    case TermKind::Skolem: return "(skolem " + t.name + ")";
  }
  return {};
}

std::string label(const Term& t) {
  switch (t.kind) {
    case TermKind::Var: return t.name;
    case TermKind::Const: return "#" + t.name;
    case TermKind::Skolem: return "!" + t.name;
  }
  return t.name;
}

std::string to_sexpr(const Atom& a) {
  std::string out = a.is_concept() ? "(c " + to_sexpr(a.filler) : "(r " + to_sexpr(a.relation);
  for (const auto& t : a.terms) out += " " + to_sexpr(t);
  return out + ")";
}

std::string to_sexpr(const Query& q) {
  std::string out = "(query " + q.name + " (";
  for (std::size_t i = 0; i < q.head.size(); ++i) out += (i ? " " : "") + q.head[i];
  out += ")";
  for (const auto& d : q.disjuncts) {
    out += "\n  (disjunct";
    for (const auto& a : d) out += " " + to_sexpr(a);
    out += ")";
  }
  return out + ")\n";
}

std::string to_sexpr(const IncompleteDatabase& d) {
  std::string out;
  for (const auto& f : d.facts) {
    if (f.is_concept()) {
      out += "(member " + to_sexpr(f.filler) + " " + to_sexpr(f.terms[0]) + ")\n";
    } else {
      out += "(member-r " + to_sexpr(f.relation);
      for (const auto& t : f.terms) out += " " + to_sexpr(t);
      out += ")\n";
    }
  }
  return out;
}

std::string to_sexpr(const Schema& s) {
  std::string out;
  for (const auto& c : s.signature.concepts) out += "(declare-concept " + c + ")\n";
  for (const auto& [r, n] : s.signature.relations) out += "(declare-relation " + r + " " + std::to_string(n) + ")\n";
  for (const auto& ci : s.concept_inclusions)
    out += "(conc-incl " + to_sexpr(ci.lhs) + " " + to_sexpr(ci.rhs) + ")\n";
  for (const auto& ri : s.relation_inclusions)
    out += "(rel-incl " + to_sexpr(ri.lhs) + " " + to_sexpr(ri.rhs) + ")\n";
  return out;
}

// ---------------------------------------------------------------------------
// Queries and databases

int Signature::n_max() const {
  int n = 2;
  for (const auto& [name, arity] : relations) n = std::max(n, arity);
  return n;
}

std::vector<std::string> Query::existential_variables(std::size_t j) const {
  std::vector<std::string> out;
  for (const auto& a : disjuncts.at(j))
    for (const auto& t : a.terms)
      if (t.is_var() && std::find(head.begin(), head.end(), t.name) == head.end() &&
          std::find(out.begin(), out.end(), t.name) == out.end())
        out.push_back(t.name);
  return out;
}

std::vector<Term> Query::constants(std::size_t j) const {
  std::vector<Term> out;
  for (const auto& a : disjuncts.at(j))
    for (const auto& t : a.terms)
      if (!t.is_var() && std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  return out;
}

std::vector<Term> Query::constants() const {
  std::vector<Term> out;
  for (std::size_t j = 0; j < disjuncts.size(); ++j)
    for (auto& t : constants(j))
      if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  return out;
}

std::vector<std::string> IncompleteDatabase::constants() const {
  std::vector<std::string> out;
  for (const auto& f : facts)
    for (const auto& t : f.terms)
      if (std::find(out.begin(), out.end(), t.name) == out.end()) out.push_back(t.name);
  return out;
}

// ---------------------------------------------------------------------------
// Well-typedness

namespace {

void check(const Concept& c, const Signature& sig, Diagnostics& out);
void check(const Relation& r, const Signature& sig, Diagnostics& out);
void check(const Path& e, const Signature& sig, Diagnostics& out);

void check(const Concept& c, const Signature& sig, Diagnostics& out) {
  if (!c) {
    out.push_back("missing concept");
    return;
  }
  switch (c->kind) {
    case ConceptKind::Top: break;
    case ConceptKind::Atomic:
      if (c->name.empty()) out.push_back("empty concept name");
      else if (!sig.has_concept(c->name)) out.push_back("undeclared name '" + c->name + "'");
      break;
    case ConceptKind::Not: check(c->left, sig, out); break;
    case ConceptKind::And:
      check(c->left, sig, out);
      check(c->right, sig, out);
      break;
    case ConceptKind::SomePath:
      check(c->path, sig, out);
      check(c->left, sig, out);
      break;
    case ConceptKind::SomeRel:
    case ConceptKind::AtMost:
      if (c->kind == ConceptKind::AtMost && c->count < 0) out.push_back("negative number restriction");
      check(c->relation, sig, out);
      if (c->relation && (c->component < 1 || c->component > c->relation->arity))
        out.push_back("component index out of range: " + std::to_string(c->component) + " for arity " +
                      std::to_string(c->relation->arity));
      break;
  }
}

void check(const Relation& r, const Signature& sig, Diagnostics& out) {
  if (!r) {
    out.push_back("missing relation");
    return;
  }
  if (r->arity < 2 || r->arity > sig.n_max())
    out.push_back("arity " + std::to_string(r->arity) + " outside [2, " + std::to_string(sig.n_max()) + "]");
  switch (r->kind) {
    case RelationKind::Top: break;
    case RelationKind::Atomic: {
      auto it = sig.relations.find(r->name);
      if (it == sig.relations.end()) out.push_back("undeclared name '" + r->name + "'");
      else if (it->second != r->arity)
        out.push_back("arity mismatch: '" + r->name + "' has arity " + std::to_string(it->second));
      break;
    }
    case RelationKind::Select:
      if (r->component < 1 || r->component > r->arity)
        out.push_back("component index out of range: " + std::to_string(r->component) + " for arity " +
                      std::to_string(r->arity));
      check(r->filler, sig, out);
      break;
    case RelationKind::Not:
      check(r->left, sig, out);
      if (r->left && r->left->arity != r->arity) out.push_back("arity mismatch under relation negation");
      break;
    case RelationKind::And:
      check(r->left, sig, out);
      check(r->right, sig, out);
      if (r->left && r->right && (r->left->arity != r->right->arity || r->left->arity != r->arity))
        out.push_back("arity mismatch: intersection of relations of arity " + std::to_string(r->left->arity) +
                      " and " + std::to_string(r->right->arity));
      break;
  }
}

void check(const Path& e, const Signature& sig, Diagnostics& out) {
  if (!e) {
    out.push_back("missing path");
    return;
  }
  switch (e->kind) {
    case PathKind::Epsilon: break;
    case PathKind::Proj:
      check(e->relation, sig, out);
      if (e->relation && (e->from < 1 || e->from > e->relation->arity || e->to < 1 || e->to > e->relation->arity))
        out.push_back("component index out of range in projection");
      break;
    case PathKind::Comp:
    case PathKind::Union:
      check(e->left, sig, out);
      check(e->right, sig, out);
      break;
    case PathKind::Star: check(e->left, sig, out); break;
  }
}

void check(const Atom& a, const Signature& sig, Diagnostics& out) {
  for (const auto& t : a.terms)
    if (t.name.empty()) out.push_back("empty term name");
  if (a.is_concept()) {
    check(a.filler, sig, out);
    if (a.terms.size() != 1) out.push_back("concept atom must have exactly one term");
  } else {
    check(a.relation, sig, out);
    if (a.relation && static_cast<int>(a.terms.size()) != a.relation->arity)
      out.push_back("arity mismatch: relation atom with " + std::to_string(a.terms.size()) + " terms, arity " +
                    std::to_string(a.relation->arity));
  }
}

}  // namespace

Diagnostics check_well_typed(const Concept& c, const Signature& sig) {
  Diagnostics d;
  check(c, sig, d);
  return d;
}

Diagnostics check_well_typed(const Relation& r, const Signature& sig) {
  Diagnostics d;
  check(r, sig, d);
  return d;
}

Diagnostics check_well_typed(const Path& e, const Signature& sig) {
  Diagnostics d;
  check(e, sig, d);
  return d;
}

Diagnostics check_well_typed(const Schema& s) {
  Diagnostics d;
  for (const auto& [name, arity] : s.signature.relations)
    if (arity < 2) d.push_back("relation '" + name + "' declared with arity below 2");
  for (const auto& ci : s.concept_inclusions) {
    check(ci.lhs, s.signature, d);
    check(ci.rhs, s.signature, d);
  }
  for (const auto& ri : s.relation_inclusions) {
    check(ri.lhs, s.signature, d);
    check(ri.rhs, s.signature, d);
    if (ri.lhs && ri.rhs && ri.lhs->arity != ri.rhs->arity)
      d.push_back("arity mismatch in relation inclusion");
  }
  return d;
}

Diagnostics check_well_typed(const Query& q, const Signature& sig) {
  Diagnostics d;
  std::set<std::string> seen;
  for (const auto& h : q.head)
    if (!seen.insert(h).second) d.push_back("duplicate head variable '" + h + "'");
  if (q.disjuncts.empty()) d.push_back("query has no disjuncts");
  for (const auto& conj : q.disjuncts) {
    if (conj.empty()) d.push_back("empty disjunct");
    std::set<std::string> vars;
    for (const auto& a : conj) {
      check(a, sig, d);
      for (const auto& t : a.terms)
        if (t.is_var()) vars.insert(t.name);
    }
    for (const auto& h : q.head)
      if (!vars.count(h)) d.push_back("unsafe head variable '" + h + "'");
  }
  return d;
}

Diagnostics check_well_typed(const IncompleteDatabase& db, const Signature& sig) {
  Diagnostics d;
  for (const auto& f : db.facts) {
    check(f, sig, d);
    for (const auto& t : f.terms)
      if (!t.is_const()) d.push_back("membership assertion over a non-constant term");
  }
  return d;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

void require(bool cond, const SExpr& at, const std::string& message) {
  if (!cond) at.fail(message);
}

void require_size(const SExpr& e, std::size_t n) {
  require(e.size() == n, e, "'" + e[0].symbol + "' expects " + std::to_string(n - 1) + " arguments");
}

void ensure_typed(Diagnostics d, const SExpr& at) {
  if (!d.empty()) at.fail(d.front());
}

}  // namespace

Concept parse_concept(const SExpr& e, const Signature& sig) {
  Concept c;
  if (e.is_symbol()) {
    if (e.symbol == "top1") return top1();
    require(sig.has_concept(e.symbol), e, "undeclared name '" + e.symbol + "'");
    return atomic_concept(e.symbol);
  }
  require(!e.items.empty() && e[0].is_symbol(), e, "malformed concept");
  const auto& head = e[0].symbol;
  if (head == "not") {
    require_size(e, 2);
    c = negate(parse_concept(e[1], sig));
  } else if (head == "and") {
    require(e.size() >= 3, e, "'and' expects at least 2 arguments");
    c = parse_concept(e[1], sig);
    for (std::size_t i = 2; i < e.size(); ++i) c = conjoin(c, parse_concept(e[i], sig));
  } else if (head == "some") {
    require_size(e, 3);
    c = some(parse_path(e[1], sig), parse_concept(e[2], sig));
  } else if (head == "all") {
    require_size(e, 3);
    c = all(parse_path(e[1], sig), parse_concept(e[2], sig));
  } else if (head == "some-rel") {
    require_size(e, 3);
    c = some_rel(e[1].as_int(), parse_relation(e[2], sig));
  } else if (head == "atmost") {
    require_size(e, 4);
    int k = e[1].as_int();
    require(k >= 0, e[1], "number restriction must be nonnegative");
    c = at_most(k, e[2].as_int(), parse_relation(e[3], sig));
  } else {
    e.fail("unknown concept constructor '" + head + "'");
  }
  ensure_typed(check_well_typed(c, sig), e);
  return c;
}

Relation parse_relation(const SExpr& e, const Signature& sig) {
  Relation r;
  if (e.is_symbol()) {
    auto it = sig.relations.find(e.symbol);
    require(it != sig.relations.end(), e, "undeclared name '" + e.symbol + "'");
    return atomic_relation(e.symbol, it->second);
  }
  require(!e.items.empty() && e[0].is_symbol(), e, "malformed relation");
  const auto& head = e[0].symbol;
  if (head == "top") {
    require_size(e, 2);
    r = top_n(e[1].as_int());
  } else if (head == "sel") {
    require_size(e, 4);
    r = select(e[1].as_int(), e[2].as_int(), parse_concept(e[3], sig));
  } else if (head == "not-r" || head == "not") {
    require_size(e, 2);
    r = negate(parse_relation(e[1], sig));
  } else if (head == "and-r" || head == "and") {
    require(e.size() >= 3, e, "'" + head + "' expects at least 2 arguments");
    r = parse_relation(e[1], sig);
    for (std::size_t i = 2; i < e.size(); ++i) r = conjoin(r, parse_relation(e[i], sig));
  } else {
    e.fail("unknown relation constructor '" + head + "'");
  }
  ensure_typed(check_well_typed(r, sig), e);
  return r;
}

Path parse_path(const SExpr& e, const Signature& sig) {
  if (e.is_symbol("eps")) return epsilon();
  require(e.is_list && !e.items.empty() && e[0].is_symbol(), e, "malformed path expression");
  const auto& head = e[0].symbol;
  Path p;
  if (head == "proj") {
    require_size(e, 4);
    p = proj(parse_relation(e[1], sig), e[2].as_int(), e[3].as_int());
  } else if (head == "comp") {
    require_size(e, 3);
    p = compose(parse_path(e[1], sig), parse_path(e[2], sig));
  } else if (head == "union") {
    require_size(e, 3);
    p = unite(parse_path(e[1], sig), parse_path(e[2], sig));
  } else if (head == "star") {
    require_size(e, 2);
    p = star(parse_path(e[1], sig));
  } else {
    e.fail("unknown path constructor '" + head + "'");
  }
  ensure_typed(check_well_typed(p, sig), e);
  return p;
}

Schema parse_schema(std::string_view text) {
  auto forms = parse_sexprs(text);
  Schema s;
  for (const auto& f : forms) {
    require(f.is_list && !f.items.empty() && f[0].is_symbol(), f, "malformed schema form");
    if (f.has_head("declare-concept") || f.has_head("declare-relation")) {
      // '$' names are reserved for atoms introduced by the reduction.
      require(f.size() >= 2 && !f[1].as_symbol().empty() && f[1].symbol[0] != '$', f, "reserved or empty name");
    }
    if (f.has_head("declare-concept")) {
      require_size(f, 2);
      s.signature.concepts.insert(f[1].as_symbol());
    } else if (f.has_head("declare-relation")) {
      require_size(f, 3);
      int arity = f[2].as_int();
      require(arity >= 2, f[2], "relation arity must be at least 2");
      auto [it, fresh] = s.signature.relations.emplace(f[1].as_symbol(), arity);
      require(fresh || it->second == arity, f, "arity mismatch: conflicting declarations of '" + f[1].symbol + "'");
    }
  }
  for (const auto& c : s.signature.concepts)
    if (s.signature.has_relation(c)) throw ParseError("'" + c + "' declared both as concept and as relation", 1, 1);
  for (const auto& f : forms) {
    if (f.has_head("conc-incl")) {
      require_size(f, 3);
      s.concept_inclusions.push_back({parse_concept(f[1], s.signature), parse_concept(f[2], s.signature)});
    } else if (f.has_head("rel-incl")) {
      require_size(f, 3);
      auto lhs = parse_relation(f[1], s.signature);
      auto rhs = parse_relation(f[2], s.signature);
      require(lhs->arity == rhs->arity, f, "arity mismatch in relation inclusion");
      s.relation_inclusions.push_back({lhs, rhs});
    } else if (!f.has_head("declare-concept") && !f.has_head("declare-relation")) {
      f.fail("unknown schema form '" + f[0].symbol + "'");
    }
  }
  return s;
}

namespace {

Term parse_term(const SExpr& e) {
  require(e.is_list && e.size() == 2 && e[0].is_symbol(), e, "malformed term");
  const auto& name = e[1].as_symbol();
  require(!name.empty(), e, "empty term name");
  if (e[0].symbol == "var") return Term::var(name);
  if (e[0].symbol == "const") return Term::constant(name);
  e.fail("unknown term kind '" + e[0].symbol + "'");
}

Atom parse_atom(const SExpr& e, const Signature& sig) {
  require(e.is_list && e.size() >= 3 && e[0].is_symbol(), e, "malformed atom");
  if (e[0].symbol == "c") {
    require_size(e, 3);
    return Atom::concept_atom(parse_concept(e[1], sig), parse_term(e[2]));
  }
  if (e[0].symbol == "r") {
    auto r = parse_relation(e[1], sig);
    std::vector<Term> ts;
    for (std::size_t i = 2; i < e.size(); ++i) ts.push_back(parse_term(e[i]));
    require(static_cast<int>(ts.size()) == r->arity, e,
            "arity mismatch: relation of arity " + std::to_string(r->arity) + " applied to " +
                std::to_string(ts.size()) + " terms");
    return Atom::relation_atom(r, std::move(ts));
  }
  e.fail("unknown atom kind '" + e[0].symbol + "'");
}

}  // namespace

Query parse_query(const SExpr& e, const Signature& sig) {
  require(e.has_head("query") && e.size() >= 4, e, "expected (query NAME (VARS...) (disjunct ...)...)");
  Query q;
  q.name = e[1].as_symbol();
  require(e[2].is_list, e[2], "expected head variable list");
  for (const auto& v : e[2].items) {
    const auto& name = v.as_symbol();
    require(std::find(q.head.begin(), q.head.end(), name) == q.head.end(), v,
            "duplicate head variable '" + name + "'");
    q.head.push_back(name);
  }
  for (std::size_t i = 3; i < e.size(); ++i) {
    const auto& d = e[i];
    require(d.has_head("disjunct"), d, "expected (disjunct ATOM...)");
    require(d.size() >= 2, d, "empty disjunct");
    Conjunction conj;
    for (std::size_t k = 1; k < d.size(); ++k) conj.push_back(parse_atom(d[k], sig));
    for (const auto& h : q.head) {
      bool found = false;
      for (const auto& a : conj)
        for (const auto& t : a.terms) found = found || (t.is_var() && t.name == h);
      require(found, d, "unsafe head variable '" + h + "'");
    }
    q.disjuncts.push_back(std::move(conj));
  }
  return q;
}

Query parse_query(std::string_view text, const Signature& sig) { return parse_query(parse_sexpr(text), sig); }

IncompleteDatabase parse_abox(std::string_view text, const Signature& sig) {
  IncompleteDatabase db;
  for (const auto& f : parse_sexprs(text)) {
    if (f.has_head("member")) {
      require_size(f, 3);
      auto t = parse_term(f[2]);
      require(t.is_const(), f[2], "membership assertions take constants");
      db.facts.push_back(Atom::concept_atom(parse_concept(f[1], sig), t));
    } else if (f.has_head("member-r")) {
      require(f.size() >= 3, f, "malformed member-r");
      auto r = parse_relation(f[1], sig);
      std::vector<Term> ts;
      for (std::size_t i = 2; i < f.size(); ++i) {
        ts.push_back(parse_term(f[i]));
        require(ts.back().is_const(), f[i], "membership assertions take constants");
      }
      require(static_cast<int>(ts.size()) == r->arity, f, "arity mismatch in membership assertion");
      db.facts.push_back(Atom::relation_atom(r, std::move(ts)));
    } else {
      f.fail("expected (member ...) or (member-r ...)");
    }
  }
  return db;
}

// ---------------------------------------------------------------------------

void collect_names(const Concept& c, std::set<std::string>& concepts, std::map<std::string, int>& relations) {
  switch (c->kind) {
    case ConceptKind::Top: break;
    case ConceptKind::Atomic: concepts.insert(c->name); break;
    case ConceptKind::Not: collect_names(c->left, concepts, relations); break;
    case ConceptKind::And:
      collect_names(c->left, concepts, relations);
      collect_names(c->right, concepts, relations);
      break;
    case ConceptKind::SomePath: {
      std::function<void(const Path&)> walk = [&](const Path& p) {
        if (p->kind == PathKind::Proj) collect_names(p->relation, concepts, relations);
        if (p->left) walk(p->left);
        if (p->right) walk(p->right);
      };
      walk(c->path);
      collect_names(c->left, concepts, relations);
      break;
    }
    case ConceptKind::SomeRel:
    case ConceptKind::AtMost: collect_names(c->relation, concepts, relations); break;
  }
}

void collect_names(const Relation& r, std::set<std::string>& concepts, std::map<std::string, int>& relations) {
  switch (r->kind) {
    case RelationKind::Top: break;
    case RelationKind::Atomic: relations[r->name] = r->arity; break;
    case RelationKind::Select: collect_names(r->filler, concepts, relations); break;
    case RelationKind::Not: collect_names(r->left, concepts, relations); break;
    case RelationKind::And:
      collect_names(r->left, concepts, relations);
      collect_names(r->right, concepts, relations);
      break;
  }
}

namespace {

int max_count(const Concept& c);
int max_count(const Relation& r) {
  switch (r->kind) {
    case RelationKind::Select: return max_count(r->filler);
    case RelationKind::Not: return max_count(r->left);
    case RelationKind::And: return std::max(max_count(r->left), max_count(r->right));
    default: return 0;
  }
}
int max_count(const Path& p) {
  switch (p->kind) {
    case PathKind::Proj: return max_count(p->relation);
    case PathKind::Comp:
    case PathKind::Union: return std::max(max_count(p->left), max_count(p->right));
    case PathKind::Star: return max_count(p->left);
    default: return 0;
  }
}
int max_count(const Concept& c) {
  switch (c->kind) {
    case ConceptKind::Not: return max_count(c->left);
    case ConceptKind::And: return std::max(max_count(c->left), max_count(c->right));
    case ConceptKind::SomePath: return std::max(max_count(c->path), max_count(c->left));
    case ConceptKind::SomeRel: return max_count(c->relation);
    case ConceptKind::AtMost: return std::max(c->count, max_count(c->relation));
    default: return 0;
  }
}

}  // namespace

int max_count(const Schema& s) {
  int k = 0;
  for (const auto& ci : s.concept_inclusions) k = std::max({k, max_count(ci.lhs), max_count(ci.rhs)});
  for (const auto& ri : s.relation_inclusions) k = std::max({k, max_count(ri.lhs), max_count(ri.rhs)});
  return k;
}

}  // namespace dlrq::dlr
