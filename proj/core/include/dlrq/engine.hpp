#pragma once

// End-user operations: query containment, query satisfiability, certain
// answers and database satisfiability, all decided through the reduction to
// PDL satisfiability, plus a seeded differential suite that compares the
// pipeline with the bounded finite-model oracle.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dlrq/dlr.hpp"
#include "dlrq/microgen.hpp"
#include "dlrq/pdl_sat.hpp"
#include "dlrq/reduction.hpp"

namespace dlrq::engine {

struct Options {
  /// Solver limits; time_limit zero means unlimited.
  pdl::Budget solver;
  /// When positive, the finite-model oracle is run up to this domain size as
  /// a cross-check. It never decides the verdict.
  int oracle_bound = 0;
};

enum class Verdict { Contained, NotContained, Inconclusive };
std::string to_string(Verdict v);

struct OracleRecord {
  bool used = false;
  int bound = 0;
  std::string outcome = "skipped";  // "countermodel", "none-up-to-bound", "limit", "skipped"
};

struct ContainmentVerdict {
  Verdict verdict = Verdict::Inconclusive;
  std::string diagnostic;  // set for Inconclusive
  red::ReductionStats stats;
  OracleRecord oracle;
  /// Witness of satisfiability of the encoding for NotContained.
  std::optional<pdl::Kripke> witness;
  pdl::Formula phi = nullptr;
  double time_ms = 0;
};

/// Throws std::invalid_argument on an arity mismatch or ill-typed input.
ContainmentVerdict check_containment(const dlr::Schema& s, const dlr::Query& q, const dlr::Query& q2,
                                     const Options& options = {});

enum class Satisfiability { Satisfiable, Unsatisfiable, Inconclusive };
std::string to_string(Satisfiability v);

struct SatisfiabilityVerdict {
  Satisfiability verdict = Satisfiability::Inconclusive;
  ContainmentVerdict containment;
};

/// The query with head x1..xn and body P(x) and (not P)(x) over a relation
/// (or, for arity one, a concept) name outside every user signature. Arity
/// zero uses an existential variable.
dlr::Query empty_query(std::size_t arity);
/// The schema's signature extended with the name used by empty_query.
dlr::Schema with_empty_query_name(const dlr::Schema& s, std::size_t arity);

SatisfiabilityVerdict check_query_satisfiability(const dlr::Schema& s, const dlr::Query& q,
                                                 const Options& options = {});

/// Boolean query whose body is the conjunction of all facts of d.
/// Throws std::invalid_argument when d is empty.
dlr::Query build_QD(const dlr::IncompleteDatabase& d);
/// q with its head variables replaced by the constants of `tuple`.
/// Throws std::invalid_argument on an arity mismatch.
dlr::Query build_Qqc(const dlr::Query& q, const std::vector<std::string>& tuple);

enum class Membership { Member, NotMember, Inconclusive };
std::string to_string(Membership m);

struct MemberVerdict {
  std::vector<std::string> tuple;
  Membership membership = Membership::Inconclusive;
  ContainmentVerdict containment;
};

/// Throws std::invalid_argument when a constant of the tuple is not in d.
MemberVerdict certain_member(const dlr::Schema& s, const dlr::IncompleteDatabase& d, const dlr::Query& q,
                             const std::vector<std::string>& tuple, const Options& options = {});

struct CertainAnswerSet {
  std::string query;
  std::vector<std::vector<std::string>> answers;  // members, in candidate order
  std::vector<MemberVerdict> candidates;          // every tuple checked
};

/// Candidates are all arity(q)-tuples over the constants of d, in
/// lexicographic order of constant positions.
CertainAnswerSet certain_answers(const dlr::Schema& s, const dlr::IncompleteDatabase& d, const dlr::Query& q,
                                 const Options& options = {});

SatisfiabilityVerdict check_db_satisfiability(const dlr::Schema& s, const dlr::IncompleteDatabase& d,
                                              const Options& options = {});

struct DiffConfig {
  std::uint64_t seed = 1;
  int count = 200;
  int oracle_bound = 3;
  gen::MicroConfig micro;
  pdl::Budget solver;
};

struct DiffCase {
  std::uint64_t seed = 0;
  Verdict verdict = Verdict::Inconclusive;
  std::string oracle;  // "countermodel", "none-up-to-bound", "limit"
  /// Set when the oracle found a countermodel: whether its reification
  /// satisfies the encoding at the root.
  std::optional<bool> reify_holds;
  bool contradiction = false;
  std::string note;
  double time_ms = 0;
};

struct DiffReport {
  std::vector<DiffCase> cases;
  int contained = 0;
  int not_contained = 0;
  int inconclusive = 0;
  int countermodels = 0;
  int reify_checked = 0;
  int reify_failures = 0;
  int contradictions = 0;
  double time_ms = 0;

  std::string to_json() const;
};

/// Instance i uses generator seed config.seed + i. The verdicts do not depend
/// on the oracle; the oracle only audits them.
DiffReport run_differential_suite(const DiffConfig& config);

}  // namespace dlrq::engine
