#pragma once

// Satisfiability of converse PDL formulas with graded modalities.
//
// Two engines cooperate. A symbolic type-elimination refuter over a relaxed
// form of the input proves unsatisfiability; a SAT-based bounded model
// finder searches finite Kripke structures for a witness. Satisfiable is
// only returned together with a witness that passed model_check, and
// Unsatisfiable only from the refuter, so running out of budget yields
// ResourceLimit rather than a guess.

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlrq/pdl.hpp"

namespace dlrq::pdl {

struct Budget {
  /// Wall-clock limit for the whole call; zero means unlimited.
  std::chrono::milliseconds time_limit{0};
  /// Largest number of states tried by the model finder.
  int max_states = 10;
  /// Live BDD nodes allowed to the refuter before it gives up.
  std::size_t max_bdd_nodes = 40'000'000;
  /// Conflicts allowed per SAT call of the model finder; negative means unlimited.
  std::int64_t sat_conflicts = 200'000;
  /// Upper bound on graded counts accepted at all.
  int graded_cap = 64;
};

/// A graded count above Budget::graded_cap. Distinct from running out of budget.
class GradedCapError : public std::invalid_argument {
 public:
  GradedCapError(const std::string& what, int count) : std::invalid_argument(what), count_(count) {}
  int count() const { return count_; }

 private:
  int count_;
};

struct SatResult {
  enum class Status { Satisfiable, Unsatisfiable, ResourceLimit };
  Status status = Status::ResourceLimit;
  /// Present for Satisfiable; the formula holds at `witness_state`.
  std::optional<Kripke> witness;
  int witness_state = 0;
  std::string diagnostic;

  bool sat() const { return status == Status::Satisfiable; }
  bool unsat() const { return status == Status::Unsatisfiable; }
};

std::string to_string(SatResult::Status s);

struct SolverOptions {
  Budget budget;
  /// Formulas whose closure is added to the refuter's closure.
  std::vector<Formula> extra_closure;
  /// Skip the model finder (refutation only).
  bool refute_only = false;
  /// Skip the refuter (model search only).
  bool search_only = false;
};

struct EliminationTrace {
  std::size_t branch = 0;
  bool exact = false;           // no relaxation was applied to this branch
  std::size_t primitives = 0;   // BDD variables per type
  std::size_t closure = 0;
  std::size_t axioms = 0;
  std::size_t rounds = 0;
  double initial_types = 0;
  double surviving_types = 0;
  /// Types removed per round, in round order; never increases the survivors.
  std::vector<double> eliminated;
  double by_demand = 0;
  double by_counting = 0;
  double by_eventuality = 0;
  std::string outcome;  // "refuted", "open", "limit"
};

struct SearchTrace {
  int states = 0;
  std::size_t variables = 0;
  std::size_t clauses = 0;
  std::uint64_t conflicts = 0;
  std::string outcome;  // "sat", "unsat", "limit", "rejected"
};

struct Trace {
  std::vector<EliminationTrace> elimination;
  std::vector<SearchTrace> search;
  std::size_t relaxed_subformulas = 0;  // universal modalities replaced
  std::size_t peak_bdd_nodes = 0;
  std::size_t peak_memory_bytes = 0;  // estimate
  std::string decided_by;             // "elimination", "type-model", "search", ""
  double time_ms = 0;

  std::string to_json() const;
};

/// Throws GradedCapError when a graded count exceeds the cap.
SatResult decide(Formula f, const SolverOptions& options = {});
SatResult decide_with_trace(Formula f, Trace& trace, const SolverOptions& options = {});

}  // namespace dlrq::pdl
