#pragma once

// Finite interpretations of DLR_reg, exact evaluation of expressions and
// queries, and a bounded exhaustive search for containment counterexamples.

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlrq/dlr.hpp"

namespace dlrq::fm {

using Element = int;
using Tuple = std::vector<Element>;
using ElementSet = std::set<Element>;
using TupleSet = std::set<Tuple>;
using PairSet = std::set<std::pair<Element, Element>>;

/// Domain is {0, ..., domain_size - 1}. `top[n]` is the extension of the
/// n-ary top relation, which may be any subset of domain^n.
struct Interpretation {
  int domain_size = 0;
  std::map<int, TupleSet> top;
  std::map<std::string, ElementSet> concepts;
  std::map<std::string, TupleSet> relations;
  std::map<std::string, Element> constants;

  const TupleSet& top_ext(int arity) const;
  const ElementSet& concept_ext(const std::string& name) const;
  const TupleSet& relation_ext(const std::string& name) const;
};

/// Structural violations: out-of-range elements, relation tuples outside the
/// top relation of their arity, non-injective constant map. Empty means valid.
dlr::Diagnostics validate(const Interpretation& I);
/// Throws std::invalid_argument listing the first violation.
void require_valid(const Interpretation& I);

ElementSet eval_concept(const Interpretation& I, const dlr::Concept& c);
TupleSet eval_relation(const Interpretation& I, const dlr::Relation& r);
PairSet eval_path(const Interpretation& I, const dlr::Path& e);

bool is_model(const Interpretation& I, const dlr::Schema& s);
/// Throws std::invalid_argument when a fact mentions a constant missing from I.
bool satisfies_db(const Interpretation& I, const dlr::IncompleteDatabase& d);

/// Answers of q in I. Variables and Skolem terms range over the domain; real
/// constants denote their image under the constant map (std::invalid_argument
/// if absent). A boolean query yields {()} or {}.
TupleSet eval_query(const Interpretation& I, const dlr::Query& q);

std::string to_sexpr(const Interpretation& I);
/// Reads `(interpretation (domain N) (top A tuple...) (concept NAME e...)
/// (relation NAME tuple...) (const NAME e))`; tuples are lists of elements.
Interpretation parse_interpretation(std::string_view text);

struct OracleOptions {
  int bound = 3;
  std::uint64_t max_structures = 50'000'000;
  std::chrono::milliseconds time_limit{0};  // zero means unlimited
};

/// Raised when the search exceeds its budget; reports how far it got.
class OracleResourceError : public std::runtime_error {
 public:
  OracleResourceError(const std::string& what, int domain_size, std::uint64_t structures)
      : std::runtime_error(what), domain_size_(domain_size), structures_(structures) {}
  int domain_size() const { return domain_size_; }
  std::uint64_t structures_checked() const { return structures_; }

 private:
  int domain_size_;
  std::uint64_t structures_;
};

struct OracleResult {
  enum class Outcome { NoneUpTo, Counterexample };
  Outcome outcome = Outcome::NoneUpTo;
  int bound = 0;
  std::optional<Interpretation> model;
  Tuple tuple;
  std::uint64_t structures_checked = 0;
  std::uint64_t models_seen = 0;

  bool found() const { return outcome == Outcome::Counterexample; }
};

/// Searches interpretations of domain size at most `bound`, in increasing
/// domain size and then increasing top-relation size, for a model of `s` and a
/// tuple in q^I but not in q2^I. Isomorphic copies are skipped; constants of
/// the queries are pinned to the first elements. A returned counterexample is
/// re-checked with is_model and eval_query.
OracleResult find_containment_counterexample(const dlr::Schema& s, const dlr::Query& q, const dlr::Query& q2,
                                             const OracleOptions& options = {});

}  // namespace dlrq::fm
