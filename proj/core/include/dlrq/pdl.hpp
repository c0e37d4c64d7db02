#pragma once

// Converse PDL with graded modalities over atomic and converse-atomic
// programs: hash-consed syntax, Kripke structures, model checking, and the
// closure operations used when building auxiliary formulas.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dlrq/sexpr.hpp"

namespace dlrq::pdl {

struct FormulaNode;
struct ProgramNode;
/// Formulas and programs are interned: structurally equal terms share one
/// node, so pointer equality is structural equality. Nodes live for the
/// lifetime of the process.
using Formula = const FormulaNode*;
using Program = const ProgramNode*;

enum class FormulaKind { True, Atom, Not, And, Dia, AtMost };
enum class ProgramKind { Atomic, Seq, Union, Star, Test };

struct FormulaNode {
  FormulaKind kind;
  std::string name;          // Atom
  int count = 0;             // AtMost
  Formula left = nullptr;    // Not, And, Dia (body), AtMost (body)
  Formula right = nullptr;   // And
  Program program = nullptr; // Dia, AtMost (atomic or converse atomic)
  std::uint64_t id = 0;      // creation order
  std::size_t hash = 0;
};

struct ProgramNode {
  ProgramKind kind;
  std::string name;          // Atomic
  bool converse = false;     // Atomic
  Program left = nullptr;    // Seq, Union, Star
  Program right = nullptr;   // Seq, Union
  Formula test = nullptr;    // Test
  std::uint64_t id = 0;
  std::size_t hash = 0;
};

// Formula constructors. neg removes a double negation.
Formula top();
Formula bottom();
Formula atom(std::string_view name);
Formula neg(Formula f);
Formula conj(Formula a, Formula b);
/// Left-nested conjunction; top() when empty.
Formula conj(const std::vector<Formula>& fs);
Formula disj(Formula a, Formula b);
/// Left-nested disjunction; bottom() when empty.
Formula disj(const std::vector<Formula>& fs);
Formula implies(Formula a, Formula b);
/// (a => b) and (b => a).
Formula iff(Formula a, Formula b);
Formula dia(Program r, Formula f);
Formula box(Program r, Formula f);
/// Graded box: at most k p-successors satisfy f. Throws std::invalid_argument
/// unless p is atomic or converse atomic.
Formula at_most(int k, Program p, Formula f);

// Program constructors. inverse() pushes converse down to atomic programs.
Program prog(std::string_view name);
Program converse(std::string_view name);
Program seq(Program a, Program b);
Program seq(const std::vector<Program>& rs);
Program alt(Program a, Program b);
Program alt(const std::vector<Program>& rs);
Program star(Program r);
Program test(Formula f);
Program inverse(Program r);
/// The empty program, represented as the test for true.
Program skip();

bool is_basic(Program p);  // atomic or converse atomic

/// Number of distinct formula and program nodes reachable from f.
std::size_t dag_size(Formula f);
/// Size of f written out as a tree.
std::size_t tree_size(Formula f);

std::string to_sexpr(Formula f);
std::string to_sexpr(Program r);
Formula parse_formula(std::string_view text);
Program parse_program(std::string_view text);

/// Atomic formula names and atomic program names occurring in f.
void collect_names(Formula f, std::set<std::string>& atoms, std::set<std::string>& programs);

/// Finite Kripke structure with named states 0..size()-1.
struct Kripke {
  std::vector<std::string> states;
  std::map<std::string, std::set<int>> valuation;
  std::map<std::string, std::set<std::pair<int, int>>> edges;

  int size() const { return static_cast<int>(states.size()); }
  int add_state(std::string name);
  /// Index of a named state; throws std::out_of_range if absent.
  int state(const std::string& name) const;
  void label(int s, const std::string& atom) { valuation[atom].insert(s); }
  void edge(const std::string& p, int from, int to) { edges[p].insert({from, to}); }
};

std::string to_sexpr(const Kripke& m);
/// Reads `(kripke (states s...) (label s atom...) (edge p s t) ...)`.
Kripke parse_kripke(std::string_view text);
/// Throws std::invalid_argument if an edge or label refers to a missing state.
void require_valid(const Kripke& m);

/// States satisfying f. Missing atoms and programs have empty extension.
std::set<int> model_check(const Kripke& m, Formula f);
bool holds(const Kripke& m, int state, Formula f);
std::set<std::pair<int, int>> eval_program(const Kripke& m, Program r);

/// Evaluates many formulas against one structure, sharing work across calls.
class ModelChecker {
 public:
  explicit ModelChecker(const Kripke& m);
  ~ModelChecker();
  ModelChecker(const ModelChecker&) = delete;
  ModelChecker& operator=(const ModelChecker&) = delete;

  const std::vector<char>& extension(Formula f);
  const std::vector<char>& relation(Program r);  // row-major size x size
  bool holds(int state, Formula f) { return extension(f)[state] != 0; }

 private:
  struct Impl;
  Impl* impl_;
};

/// Fisher-Ladner closure in discovery order.
std::vector<Formula> fl_closure(Formula f);
/// Closure of a set of formulas, merged in order.
std::vector<Formula> fl_closure(const std::vector<Formula>& fs);

/// Program prefixes, with the empty prefix represented by skip().
std::vector<Program> prefixes(Program r);

/// Every basic program p becomes p ; (not N1 and ... and not Nk)? over the
/// given atom names; the rest of the program is preserved.
Program bar(Program r, const std::vector<std::string>& names);

}  // namespace dlrq::pdl
