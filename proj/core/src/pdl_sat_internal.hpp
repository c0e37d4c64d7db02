#pragma once

// Shared pieces of the satisfiability procedure: preprocessing into
// branches, the elimination refuter and the bounded model finder.

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dlrq/pdl.hpp"
#include "dlrq/pdl_sat.hpp"

namespace dlrq::pdl::detail {

class Deadline {
 public:
  explicit Deadline(std::chrono::milliseconds limit)
      : unlimited_(limit.count() <= 0), end_(std::chrono::steady_clock::now() + limit) {}
  bool expired() const { return !unlimited_ && std::chrono::steady_clock::now() >= end_; }
  bool unlimited() const { return unlimited_; }
  std::chrono::milliseconds remaining() const {
    if (unlimited_) return std::chrono::milliseconds::max();
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(end_ - std::chrono::steady_clock::now());
    return std::max(left, std::chrono::milliseconds(0));
  }

 private:
  bool unlimited_;
  std::chrono::steady_clock::time_point end_;
};

using Basic = std::pair<std::string, bool>;  // atomic name, converse

/// Atomic program names of f and of every program inside it.
std::set<std::string> program_names(Formula f);

/// (p1 + p1- + ... + pk + pk-)* covering every atomic program of the input.
bool is_universal(Program r, const std::set<std::string>& names);

/// One case of the input: at the root, `root` holds; `axioms` hold at every
/// state of the connected model; each formula in `somewhere` holds at some
/// state. `exact` is false when universal modalities below the top level
/// were replaced, in which case the branch is only a relaxation.
struct Branch {
  std::vector<Formula> axioms;
  std::vector<Formula> root;
  std::vector<Formula> somewhere;
  bool exact = true;
};

struct Prepared {
  std::vector<Branch> branches;  // the input is equivalent to (or implies) their disjunction
  std::size_t relaxed = 0;
};

Prepared prepare(Formula f);

enum class Verdict { Refuted, Open, Limit };

struct Elimination {
  Verdict verdict = Verdict::Limit;
  /// When the surviving types are few, the structure over all of them with
  /// every compatible edge; not yet checked against the input.
  std::optional<Kripke> type_model;
};

Elimination eliminate(const Branch& b, const std::vector<Formula>& extra, const Budget& budget,
                      const Deadline& deadline, EliminationTrace& trace, std::size_t& peak_nodes);

/// Searches connected structures with exactly `states` states whose state 0
/// satisfies f.
std::optional<Kripke> search_model(Formula f, int states, const Budget& budget, const Deadline& deadline,
                                   SearchTrace& trace);

}  // namespace dlrq::pdl::detail
