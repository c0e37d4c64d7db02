#pragma once

// Abstract syntax for DLR_reg schemas, unions of conjunctive queries and
// incomplete databases, together with their s-expression surface syntax.

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dlrq/sexpr.hpp"

namespace dlrq::dlr {

struct ConceptNode;
struct RelationNode;
struct PathNode;
using Concept = std::shared_ptr<const ConceptNode>;
using Relation = std::shared_ptr<const RelationNode>;
using Path = std::shared_ptr<const PathNode>;

enum class ConceptKind { Top, Atomic, Not, And, SomePath, SomeRel, AtMost };
enum class RelationKind { Top, Atomic, Select, Not, And };
enum class PathKind { Epsilon, Proj, Comp, Union, Star };

struct ConceptNode {
  ConceptKind kind;
  std::string name;   // Atomic
  int count = 0;      // AtMost
  int component = 0;  // SomeRel, AtMost (1-based)
  Concept left;       // Not, And, SomePath (filler)
  Concept right;      // And
  Relation relation;  // SomeRel, AtMost
  Path path;          // SomePath
};

struct RelationNode {
  RelationKind kind;
  int arity = 0;
  std::string name;   // Atomic
  int component = 0;  // Select (1-based)
  Concept filler;     // Select
  Relation left;      // Not, And
  Relation right;     // And
};

struct PathNode {
  PathKind kind;
  Relation relation;  // Proj
  int from = 0;       // Proj, 1-based component
  int to = 0;         // Proj
  Path left;          // Comp, Union, Star
  Path right;         // Comp, Union
};

// Constructors. Derived forms are normalized to primitives.
Concept top1();
Concept atomic_concept(std::string name);
Concept negate(Concept c);
Concept conjoin(Concept a, Concept b);
Concept some(Path e, Concept c);
Concept all(Path e, Concept c);  // not (some e (not c))
Concept some_rel(int component, Relation r);
Concept at_most(int count, int component, Relation r);

Relation top_n(int arity);
Relation atomic_relation(std::string name, int arity);
Relation select(int component, int arity, Concept c);
Relation negate(Relation r);
Relation conjoin(Relation a, Relation b);

Path epsilon();
Path proj(Relation r, int from, int to);
Path compose(Path a, Path b);
Path unite(Path a, Path b);
Path star(Path e);

bool equal(const Concept& a, const Concept& b);
bool equal(const Relation& a, const Relation& b);
bool equal(const Path& a, const Path& b);

std::string to_sexpr(const Concept& c);
std::string to_sexpr(const Relation& r);
std::string to_sexpr(const Path& e);

/// Atomic concept names and atomic relation names with their arities.
struct Signature {
  std::set<std::string> concepts;
  std::map<std::string, int> relations;

  /// Largest declared relation arity, never below 2.
  int n_max() const;
  bool has_concept(const std::string& n) const { return concepts.count(n) > 0; }
  bool has_relation(const std::string& n) const { return relations.count(n) > 0; }
};

struct ConceptInclusion {
  Concept lhs;
  Concept rhs;
};

struct RelationInclusion {
  Relation lhs;
  Relation rhs;
};

struct Schema {
  Signature signature;
  std::vector<ConceptInclusion> concept_inclusions;
  std::vector<RelationInclusion> relation_inclusions;

  int n_max() const { return signature.n_max(); }
  std::size_t assertion_count() const { return concept_inclusions.size() + relation_inclusions.size(); }
};

enum class TermKind { Var, Const, Skolem };

struct Term {
  TermKind kind = TermKind::Var;
  std::string name;

  static Term var(std::string n) { return {TermKind::Var, std::move(n)}; }
  static Term constant(std::string n) { return {TermKind::Const, std::move(n)}; }
  static Term skolem(std::string n) { return {TermKind::Skolem, std::move(n)}; }

  bool is_var() const { return kind == TermKind::Var; }
  bool is_const() const { return kind == TermKind::Const; }
  bool is_skolem() const { return kind == TermKind::Skolem; }

  auto operator<=>(const Term&) const = default;
  bool operator==(const Term&) const = default;
};

std::string to_sexpr(const Term& t);
/// Human-readable label: variables as-is, constants quoted with '#', Skolems with '!'.
std::string label(const Term& t);

/// C(t) when `filler` is set (a concept atom), otherwise R(t1..tn).
struct Atom {
  Concept filler;
  Relation relation;
  std::vector<Term> terms;

  bool is_concept() const { return filler != nullptr; }
  static Atom concept_atom(Concept c, Term t) { return {std::move(c), nullptr, {std::move(t)}}; }
  static Atom relation_atom(Relation r, std::vector<Term> ts) { return {nullptr, std::move(r), std::move(ts)}; }
};

bool equal(const Atom& a, const Atom& b);
std::string to_sexpr(const Atom& a);

using Conjunction = std::vector<Atom>;

/// Union of conjunctive queries with distinct head variables.
struct Query {
  std::string name;
  std::vector<std::string> head;
  std::vector<Conjunction> disjuncts;

  std::size_t arity() const { return head.size(); }
  /// Non-head variables of disjunct `j` in order of first occurrence.
  std::vector<std::string> existential_variables(std::size_t j) const;
  /// Constants (Const terms) of disjunct `j` in order of first occurrence.
  std::vector<Term> constants(std::size_t j) const;
  /// Constants over all disjuncts, first-occurrence order, no duplicates.
  std::vector<Term> constants() const;
};

bool equal(const Query& a, const Query& b);
std::string to_sexpr(const Query& q);

/// Membership assertions C(a) and R(a1..an); all terms are constants.
struct IncompleteDatabase {
  std::vector<Atom> facts;

  std::vector<std::string> constants() const;
};

std::string to_sexpr(const IncompleteDatabase& d);
std::string to_sexpr(const Schema& s);

// Parsing. All functions throw ParseError on syntax or typing errors.
Schema parse_schema(std::string_view text);
Query parse_query(std::string_view text, const Signature& sig);
IncompleteDatabase parse_abox(std::string_view text, const Signature& sig);

Concept parse_concept(const SExpr& e, const Signature& sig);
Relation parse_relation(const SExpr& e, const Signature& sig);
Path parse_path(const SExpr& e, const Signature& sig);
Query parse_query(const SExpr& e, const Signature& sig);

// Well-typedness. Never throws; an empty result means well-typed.
using Diagnostics = std::vector<std::string>;
Diagnostics check_well_typed(const Concept& c, const Signature& sig);
Diagnostics check_well_typed(const Relation& r, const Signature& sig);
Diagnostics check_well_typed(const Path& e, const Signature& sig);
Diagnostics check_well_typed(const Schema& s);
Diagnostics check_well_typed(const Query& q, const Signature& sig);
Diagnostics check_well_typed(const IncompleteDatabase& d, const Signature& sig);

/// Names of atomic concepts/relations occurring in an expression, for signature extension.
void collect_names(const Concept& c, std::set<std::string>& concepts, std::map<std::string, int>& relations);
void collect_names(const Relation& r, std::set<std::string>& concepts, std::map<std::string, int>& relations);

/// Largest number restriction appearing anywhere in the schema, 0 if none.
int max_count(const Schema& s);

}  // namespace dlrq::dlr
