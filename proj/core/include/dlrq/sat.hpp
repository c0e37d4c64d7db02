#pragma once

// Incremental CDCL SAT solver: two watched literals, VSIDS with phase
// saving, first-UIP learning with clause minimization, Luby restarts and
// LBD-based learnt clause reduction. Deterministic for a fixed input order.

#include <cstdint>
#include <vector>

namespace dlrq::sat {

/// Literal encoding: 2 * var for the positive literal, 2 * var + 1 for the
/// negative one.
using Lit = int;
inline Lit pos(int v) { return 2 * v; }
inline Lit neg(int v) { return 2 * v + 1; }
inline Lit flip(Lit l) { return l ^ 1; }
inline int var_of(Lit l) { return l >> 1; }
inline bool is_neg(Lit l) { return (l & 1) != 0; }

enum class Status { Sat, Unsat, Unknown };

struct Stats {
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t restarts = 0;
  std::uint64_t learnt = 0;
};

class Solver {
 public:
  Solver();
  ~Solver();
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  int new_var();
  int num_vars() const;
  /// Returns false once the clause set is known to be unsatisfiable.
  bool add_clause(std::vector<Lit> clause);
  bool add_clause(std::initializer_list<Lit> clause) { return add_clause(std::vector<Lit>(clause)); }

  /// Solves under assumptions. `conflict_budget` < 0 means unlimited;
  /// Unknown is returned when it runs out or `interrupt` is set.
  Status solve(const std::vector<Lit>& assumptions = {}, std::int64_t conflict_budget = -1);
  /// Value of a variable in the last satisfying assignment.
  bool value(int v) const;
  bool value_lit(Lit l) const { return value(var_of(l)) != is_neg(l); }

  void set_interrupt(const volatile bool* flag);
  const Stats& stats() const;

 private:
  struct Impl;
  Impl* impl_;
};

}  // namespace dlrq::sat
