#pragma once

// Encoding of DLR_reg query containment into satisfiability of a converse
// PDL formula with graded modalities.
//
// Atom naming used in the emitted formulas:
//   $T1..$Tn      object states and n-ary tuple states
//   A, P          atomic concepts and relations keep their names
//   $N:<label>    name formula of a term, $N:<l1,...,ln> of a term tuple
// Programs: create, f1..fn.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlrq/dlr.hpp"
#include "dlrq/finite_model.hpp"
#include "dlrq/pdl.hpp"

namespace dlrq::red {

pdl::Formula top_atom(int arity);
pdl::Program component(int i);  // f_i
pdl::Program create();
/// (create + f1 + ... + fn + their converses)*
pdl::Program universal(int n_max);

pdl::Formula sigma(const dlr::Concept& c);
pdl::Formula sigma(const dlr::Relation& r);
pdl::Program sigma(const dlr::Path& e);

pdl::Formula build_phi_schema(const dlr::Schema& s);

/// Name formulas of terms and tuples, in registration order.
class NameRegistry {
 public:
  pdl::Formula name(const dlr::Term& t);
  pdl::Formula name(const std::vector<dlr::Term>& tuple);
  /// Lookup without registering.
  std::optional<pdl::Formula> find(const dlr::Term& t) const;
  std::optional<pdl::Formula> find(const std::vector<dlr::Term>& tuple) const;

  const std::vector<std::string>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }

  static std::string atom_name(const dlr::Term& t);
  static std::string atom_name(const std::vector<dlr::Term>& tuple);

 private:
  pdl::Formula add(std::string atom);
  std::vector<std::string> atoms_;
  std::map<std::string, pdl::Formula> index_;
};

/// Both queries with head variables replaced by the shared Skolem constants
/// a1..an and, on the left, existential variables of disjunct j replaced by
/// Skolem constants named "b<j>.<var>".
struct ContainmentProblem {
  dlr::Schema schema;
  dlr::Query lhs;
  dlr::Query rhs;
  int n_max = 2;
  std::vector<dlr::Term> head;
  std::vector<dlr::Conjunction> lhs_disjuncts;
  std::vector<std::vector<dlr::Term>> lhs_skolems;
  std::vector<dlr::Conjunction> rhs_disjuncts;
  /// Terms whose names may replace a cyclic variable: a, every b_j and the
  /// constants of both queries, without repetition.
  std::vector<dlr::Term> candidates;
  NameRegistry names;
};

/// Throws std::invalid_argument on an arity mismatch.
ContainmentProblem skolemize(const dlr::Schema& s, const dlr::Query& q, const dlr::Query& q2);

pdl::Formula build_phi_conj(ContainmentProblem& p, std::size_t j);

/// Bipartite graph of terms and tuples of a conjunction; an edge (tuple,
/// term, i) stands for the program f_i.
struct TupleGraph {
  struct TermNode {
    dlr::Term term;
    std::vector<pdl::Formula> labels;
  };
  struct TupleNode {
    std::vector<dlr::Term> terms;
    std::vector<pdl::Formula> labels;
  };
  struct Edge {
    int tuple;
    int term;
    int index;  // 1-based component
  };
  std::vector<TermNode> terms;
  std::vector<TupleNode> tuples;
  std::vector<Edge> edges;

  int term_node(const dlr::Term& t) const;  // -1 if absent
  /// Term node indices of each connected component, components ordered by
  /// their first term node.
  std::vector<std::vector<int>> components() const;
};

TupleGraph build_tuple_graph(const dlr::Conjunction& conj);
/// Variables incident to an edge that is not a bridge of the undirected multigraph.
std::vector<dlr::Term> cyclic_variables(const TupleGraph& g);

/// Formula with holes standing for term and tuple nodes.
struct Template {
  enum class Kind { TermHole, TupleHole, Fixed, And, Dia };
  Kind kind = Kind::Fixed;
  int node = -1;
  pdl::Formula fixed = nullptr;
  pdl::Program program = nullptr;
  std::vector<Template> children;

  std::string to_string(const TupleGraph& g) const;
};

/// Depth-first visit from a term node; `term_marked` and `tuple_marked` are
/// updated as nodes are entered.
Template visit(const TupleGraph& g, int start_term, std::vector<char>& term_marked,
               std::vector<char>& tuple_marked);
/// Least term node of a component: Skolems, then constants, then variables,
/// each by name.
int start_node(const TupleGraph& g, const std::vector<int>& component);

/// Fills holes: tuple holes by $Tn, term holes by `term_value(node)`.
pdl::Formula instantiate(const Template& t, const TupleGraph& g,
                         const std::vector<pdl::Formula>& term_value);

/// Set partitions of `items`, each as a list of classes in order of first
/// element; restricted growth order.
std::vector<std::vector<std::vector<std::string>>> partitions(const std::vector<std::string>& items);

struct PartitionStats {
  std::size_t cyclic = 0;
  std::size_t instantiations = 0;
};

struct DisjunctStats {
  std::size_t l2 = 0;
  std::vector<PartitionStats> partitions;
};

pdl::Formula build_phi_conj_prime(ContainmentProblem& p, std::size_t j, DisjunctStats* stats = nullptr);

pdl::Formula build_phi_aux(const pdl::Formula& phi_prime, const ContainmentProblem& p);

struct ReductionStats {
  std::size_t formula_size = 0;  // DAG nodes
  std::size_t l1 = 0;
  std::vector<DisjunctStats> disjuncts;
  std::size_t aux_conjuncts = 0;

  std::size_t partitions() const;
  std::size_t instantiations() const;
  std::string to_json() const;
};

struct Reduction {
  ContainmentProblem problem;
  pdl::Formula phi_schema = nullptr;
  std::vector<pdl::Formula> phi_conj;
  std::vector<pdl::Formula> phi_conj_prime;
  pdl::Formula phi_prime = nullptr;  // without the auxiliary part
  pdl::Formula phi_aux = nullptr;
  pdl::Formula phi = nullptr;
  ReductionStats stats;
};

/// Throws std::invalid_argument on an arity mismatch or ill-typed input.
Reduction build_reduction(const dlr::Schema& s, const dlr::Query& q, const dlr::Query& q2);

/// Kripke structure of a finite counterexample: states for the elements and
/// the tuples of every top relation, f_i edges to components, and name atoms
/// fixed by the satisfied lhs disjunct. The root is the state of the first
/// head element and carries create edges to every named state. `answer` must
/// be in q^I and not in q2^I; throws std::invalid_argument otherwise.
struct Reified {
  pdl::Kripke model;
  int root = 0;
};
Reified reify(const fm::Interpretation& I, const ContainmentProblem& p, const fm::Tuple& answer);

}  // namespace dlrq::red
