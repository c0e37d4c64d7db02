#include "dlrq/pdl_sat.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>

#include "json.hpp"
#include "pdl_sat_internal.hpp"

namespace dlrq::pdl {

namespace detail {

namespace {

void walk_programs(Program r, std::set<std::string>& out, std::set<const void*>& seen);

void walk_formula(Formula f, std::set<std::string>& out, std::set<const void*>& seen) {
  std::vector<Formula> stack{f};
  while (!stack.empty()) {
    Formula g = stack.back();
    stack.pop_back();
    if (!seen.insert(g).second) continue;
    if (g->program) walk_programs(g->program, out, seen);
    if (g->left) stack.push_back(g->left);
    if (g->right) stack.push_back(g->right);
  }
}

void walk_programs(Program r, std::set<std::string>& out, std::set<const void*>& seen) {
  if (!seen.insert(r).second) return;
  switch (r->kind) {
    case ProgramKind::Atomic: out.insert(r->name); break;
    case ProgramKind::Test: walk_formula(r->test, out, seen); break;
    default:
      if (r->left) walk_programs(r->left, out, seen);
      if (r->right) walk_programs(r->right, out, seen);
  }
}

void union_members(Program r, std::vector<Program>& out) {
  if (r->kind == ProgramKind::Union) {
    union_members(r->left, out);
    union_members(r->right, out);
  } else {
    out.push_back(r);
  }
}

bool is_box(Formula f) { return f->kind == FormulaKind::Not && f->left->kind == FormulaKind::Dia; }

class Preparer {
 public:
  explicit Preparer(Formula f) : names_(program_names(f)) {}

  bool universal(Program r) {
    auto it = universal_.find(r);
    if (it != universal_.end()) return it->second;
    return universal_[r] = is_universal(r, names_);
  }

  bool universal_dia(Formula f) { return f->kind == FormulaKind::Dia && universal(f->program); }

  // True when a universal modality occurs under And/Not only.
  bool boolean_u(Formula f) {
    if (universal_dia(f)) return true;
    if (f->kind == FormulaKind::Not) return boolean_u(f->left);
    if (f->kind == FormulaKind::And) return boolean_u(f->left) || boolean_u(f->right);
    return false;
  }

  struct Case {
    std::vector<Formula> axioms, root, somewhere;
  };

  // Disjunctive normal form over the Boolean structure above universal
  // modalities. Returns false when the expansion exceeds `cap` cases.
  bool split(Formula f, std::vector<Case>& out, std::size_t cap) {
    if (!boolean_u(f)) {
      out = {Case{{}, {f}, {}}};
      return true;
    }
    if (universal_dia(f)) {
      out = {Case{{}, {}, {f->left}}};
      return true;
    }
    if (is_box(f) && universal(f->left->program)) {
      out = {Case{{neg(f->left->left)}, {}, {}}};
      return true;
    }
    if (f->kind == FormulaKind::And) {
      std::vector<Case> a, b;
      if (!split(f->left, a, cap) || !split(f->right, b, cap)) return false;
      if (a.size() * b.size() > cap) return false;
      out.clear();
      for (const auto& x : a)
        for (const auto& y : b) {
          Case c = x;
          c.axioms.insert(c.axioms.end(), y.axioms.begin(), y.axioms.end());
          c.root.insert(c.root.end(), y.root.begin(), y.root.end());
          c.somewhere.insert(c.somewhere.end(), y.somewhere.begin(), y.somewhere.end());
          out.push_back(std::move(c));
        }
      return true;
    }
    // f = not (a and b): either not a or not b.
    if (f->kind == FormulaKind::Not && f->left->kind == FormulaKind::And) {
      std::vector<Case> a, b;
      if (!split(neg(f->left->left), a, cap) || !split(neg(f->left->right), b, cap)) return false;
      if (a.size() + b.size() > cap) return false;
      out = a;
      out.insert(out.end(), b.begin(), b.end());
      return true;
    }
    out = {Case{{}, {f}, {}}};
    return true;
  }

  // Polarity of each universal diamond occurrence: bit 1 positive, bit 2 negative.
  void mark(Formula f, bool positive) {
    std::vector<std::pair<Formula, bool>> stack{{f, positive}};
    while (!stack.empty()) {
      auto [g, pos] = stack.back();
      stack.pop_back();
      const int bit = pos ? 1 : 2;
      auto& seen = visited_[g];
      if (seen & bit) continue;
      seen |= bit;
      switch (g->kind) {
        case FormulaKind::True:
        case FormulaKind::Atom: break;
        case FormulaKind::Not: stack.push_back({g->left, !pos}); break;
        case FormulaKind::And:
          stack.push_back({g->left, pos});
          stack.push_back({g->right, pos});
          break;
        case FormulaKind::Dia:
          if (universal(g->program)) {
            polarity_[g] |= bit;
            break;
          }
          mark_tests(g->program, pos, stack);
          stack.push_back({g->left, pos});
          break;
        case FormulaKind::AtMost: stack.push_back({g->left, !pos}); break;
      }
    }
  }

  Formula rewrite(Formula f) {
    if (auto it = rewritten_.find(f); it != rewritten_.end()) return it->second;
    Formula out = f;
    switch (f->kind) {
      case FormulaKind::True:
      case FormulaKind::Atom: break;
      case FormulaKind::Not: out = neg(rewrite(f->left)); break;
      case FormulaKind::And: {
        Formula a = rewrite(f->left), b = rewrite(f->right);
        if (a == bottom() || b == bottom())
          out = bottom();
        else if (a == top())
          out = b;
        else if (b == top())
          out = a;
        else
          out = conj(a, b);
        break;
      }
      case FormulaKind::Dia:
        if (universal(f->program)) {
          ++relaxed_;
          const int p = polarity_[f];
          if (p == 1)
            out = top();
          else if (p == 2)
            out = bottom();
          else
            out = atom("$U" + std::to_string(fresh_++));
          break;
        } else {
          Formula body = rewrite(f->left);
          out = body == bottom() ? bottom() : dia(rewrite_program(f->program), body);
        }
        break;
      case FormulaKind::AtMost: {
        Formula body = rewrite(f->left);
        out = body == bottom() ? top() : at_most(f->count, f->program, body);
        break;
      }
    }
    rewritten_.emplace(f, out);
    return out;
  }

  std::size_t relaxed() const { return relaxed_; }

 private:
  void mark_tests(Program r, bool pos, std::vector<std::pair<Formula, bool>>& stack) {
    switch (r->kind) {
      case ProgramKind::Atomic: break;
      case ProgramKind::Test: stack.push_back({r->test, pos}); break;
      default:
        if (r->left) mark_tests(r->left, pos, stack);
        if (r->right) mark_tests(r->right, pos, stack);
    }
  }

  Program rewrite_program(Program r) {
    switch (r->kind) {
      case ProgramKind::Atomic: return r;
      case ProgramKind::Test: return test(rewrite(r->test));
      case ProgramKind::Seq: return seq(rewrite_program(r->left), rewrite_program(r->right));
      case ProgramKind::Union: return alt(rewrite_program(r->left), rewrite_program(r->right));
      case ProgramKind::Star: return star(rewrite_program(r->left));
    }
    return r;
  }

  std::set<std::string> names_;
  std::unordered_map<Program, bool> universal_;
  std::unordered_map<Formula, int> visited_;
  std::unordered_map<Formula, int> polarity_;
  std::unordered_map<Formula, Formula> rewritten_;
  std::size_t relaxed_ = 0;
  int fresh_ = 0;
};

}  // namespace

std::set<std::string> program_names(Formula f) {
  std::set<std::string> out;
  std::set<const void*> seen;
  walk_formula(f, out, seen);
  return out;
}

bool is_universal(Program r, const std::set<std::string>& names) {
  if (r->kind != ProgramKind::Star) return false;
  std::vector<Program> members;
  union_members(r->left, members);
  std::set<Basic> covered;
  for (Program m : members) {
    if (m->kind != ProgramKind::Atomic) return false;
    covered.insert({m->name, m->converse});
  }
  for (const auto& n : names)
    if (!covered.count({n, false}) || !covered.count({n, true})) return false;
  return true;
}

Prepared prepare(Formula f) {
  Preparer prep(f);
  std::vector<Formula> top_level;
  std::vector<Formula> stack{f};
  while (!stack.empty()) {
    Formula g = stack.back();
    stack.pop_back();
    if (g->kind == FormulaKind::And) {
      stack.push_back(g->right);
      stack.push_back(g->left);
    } else {
      top_level.push_back(g);
    }
  }

  constexpr std::size_t kMaxCases = 64;
  std::vector<Preparer::Case> cases{Preparer::Case{}};
  bool split_capped = false;
  for (Formula g : top_level) {
    std::vector<Preparer::Case> parts;
    if (!prep.split(g, parts, kMaxCases) || parts.size() * cases.size() > kMaxCases) {
      parts = {{{}, {g}, {}}};
      split_capped = true;
    }
    std::vector<Preparer::Case> next;
    for (const auto& c : cases)
      for (const auto& p : parts) {
        auto merged = c;
        merged.axioms.insert(merged.axioms.end(), p.axioms.begin(), p.axioms.end());
        merged.root.insert(merged.root.end(), p.root.begin(), p.root.end());
        merged.somewhere.insert(merged.somewhere.end(), p.somewhere.begin(), p.somewhere.end());
        next.push_back(std::move(merged));
      }
    cases = std::move(next);
  }

  for (const auto& c : cases) {
    for (Formula g : c.axioms) prep.mark(g, true);
    for (Formula g : c.root) prep.mark(g, true);
    for (Formula g : c.somewhere) prep.mark(g, true);
  }
  Prepared out;
  for (const auto& c : cases) {
    Branch b;
    auto keep = [](std::vector<Formula>& v, Formula g) {
      if (g != top() && std::find(v.begin(), v.end(), g) == v.end()) v.push_back(g);
    };
    for (Formula g : c.axioms) keep(b.axioms, prep.rewrite(g));
    for (Formula g : c.root) keep(b.root, prep.rewrite(g));
    for (Formula g : c.somewhere) keep(b.somewhere, prep.rewrite(g));
    out.branches.push_back(std::move(b));
  }
  out.relaxed = prep.relaxed();
  // Rewriting is memoized across branches, so any replacement at all marks
  // every branch as a relaxation.
  const bool exact = out.relaxed == 0 && !split_capped;
  for (auto& b : out.branches) b.exact = exact;
  return out;
}

}  // namespace detail

std::string to_string(SatResult::Status s) {
  switch (s) {
    case SatResult::Status::Satisfiable: return "Satisfiable";
    case SatResult::Status::Unsatisfiable: return "Unsatisfiable";
    case SatResult::Status::ResourceLimit: return "ResourceLimit";
  }
  return "?";
}

std::string Trace::to_json() const {
  nlohmann::ordered_json j;
  j["decided_by"] = decided_by;
  j["time_ms"] = time_ms;
  j["relaxed_subformulas"] = relaxed_subformulas;
  j["peak_bdd_nodes"] = peak_bdd_nodes;
  j["peak_memory_bytes"] = peak_memory_bytes;
  j["elimination"] = nlohmann::ordered_json::array();
  for (const auto& e : elimination) {
    nlohmann::ordered_json x;
    x["branch"] = e.branch;
    x["exact"] = e.exact;
    x["primitives"] = e.primitives;
    x["closure"] = e.closure;
    x["axioms"] = e.axioms;
    x["rounds"] = e.rounds;
    x["initial_types"] = e.initial_types;
    x["surviving_types"] = e.surviving_types;
    x["eliminated"] = e.eliminated;
    x["by_demand"] = e.by_demand;
    x["by_counting"] = e.by_counting;
    x["by_eventuality"] = e.by_eventuality;
    x["outcome"] = e.outcome;
    j["elimination"].push_back(x);
  }
  j["search"] = nlohmann::ordered_json::array();
  for (const auto& s : search)
    j["search"].push_back({{"states", s.states},
                           {"variables", s.variables},
                           {"clauses", s.clauses},
                           {"conflicts", s.conflicts},
                           {"outcome", s.outcome}});
  return j.dump();
}

namespace {

void check_graded_cap(Formula f, int cap) {
  std::vector<Formula> stack{f};
  std::set<Formula> seen;
  while (!stack.empty()) {
    Formula g = stack.back();
    stack.pop_back();
    if (!seen.insert(g).second) continue;
    if (g->kind == FormulaKind::AtMost && g->count > cap)
      throw GradedCapError("graded count " + std::to_string(g->count) + " exceeds cap " + std::to_string(cap),
                           g->count);
    if (g->left) stack.push_back(g->left);
    if (g->right) stack.push_back(g->right);
    if (g->program) {
      std::vector<Program> ps{g->program};
      while (!ps.empty()) {
        Program r = ps.back();
        ps.pop_back();
        if (r->kind == ProgramKind::Test) stack.push_back(r->test);
        if (r->left) ps.push_back(r->left);
        if (r->right) ps.push_back(r->right);
      }
    }
  }
}

int satisfying_state(const Kripke& m, Formula f) {
  ModelChecker mc(m);
  const auto& e = mc.extension(f);
  for (int s = 0; s < m.size(); ++s)
    if (e[s]) return s;
  return -1;
}

}  // namespace

SatResult decide_with_trace(Formula f, Trace& trace, const SolverOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_graded_cap(f, options.budget.graded_cap);
  for (Formula g : options.extra_closure) check_graded_cap(g, options.budget.graded_cap);
  detail::Deadline deadline(options.budget.time_limit);
  trace = Trace{};
  SatResult result;
  auto finish = [&](SatResult r) {
    trace.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    trace.peak_memory_bytes = trace.peak_bdd_nodes * 16;
    return r;
  };
  auto accept = [&](Kripke m, const std::string& by) -> bool {
    const int s = satisfying_state(m, f);
    if (s < 0) return false;
    result.status = SatResult::Status::Satisfiable;
    result.witness = std::move(m);
    result.witness_state = s;
    trace.decided_by = by;
    return true;
  };

  std::vector<std::string> limits;
  if (!options.search_only) {
    auto prepared = detail::prepare(f);
    trace.relaxed_subformulas = prepared.relaxed;
    bool all_refuted = true;
    for (std::size_t i = 0; i < prepared.branches.size(); ++i) {
      EliminationTrace et;
      et.branch = i;
      auto e = detail::eliminate(prepared.branches[i], options.extra_closure, options.budget, deadline, et,
                                 trace.peak_bdd_nodes);
      trace.elimination.push_back(et);
      if (e.verdict == detail::Verdict::Refuted) continue;
      all_refuted = false;
      if (e.verdict == detail::Verdict::Limit) limits.push_back("elimination budget exhausted on branch " + std::to_string(i));
      if (e.type_model && accept(std::move(*e.type_model), "type-model")) return finish(result);
      if (e.verdict == detail::Verdict::Limit) break;
    }
    if (all_refuted) {
      result.status = SatResult::Status::Unsatisfiable;
      trace.decided_by = "elimination";
      return finish(result);
    }
  }
  if (!options.refute_only) {
    for (int n = 1; n <= options.budget.max_states && !deadline.expired(); ++n) {
      SearchTrace st;
      auto m = detail::search_model(f, n, options.budget, deadline, st);
      if (m && !accept(std::move(*m), "search")) st.outcome = "rejected";
      trace.search.push_back(st);
      if (result.sat()) return finish(result);
      if (st.outcome == "limit") limits.push_back("model search budget exhausted at " + std::to_string(n) + " states");
    }
    if (deadline.expired()) limits.push_back("time limit reached");
    else limits.push_back("no model with at most " + std::to_string(options.budget.max_states) + " states");
  }
  result.status = SatResult::Status::ResourceLimit;
  for (std::size_t i = 0; i < limits.size(); ++i) result.diagnostic += (i ? "; " : "") + limits[i];
  if (result.diagnostic.empty()) result.diagnostic = "undecided";
  return finish(result);
}

SatResult decide(Formula f, const SolverOptions& options) {
  Trace trace;
  return decide_with_trace(f, trace, options);
}

}  // namespace dlrq::pdl
