// Symbolic type elimination. A type assigns truth values to the primitive
// formulas (atoms, diamonds over basic programs, graded boxes and diamonds
// over starred programs); every other formula is a Boolean function of them.
// Types that no model can realize are removed until a fixpoint is reached.
// Removal is sound for arbitrary models, so an empty root set refutes the
// branch. Graded boxes with counts of two or more only constrain locally,
// which keeps the procedure a sound refuter but not a complete one.

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "dlrq/bdd.hpp"
#include "pdl_sat_internal.hpp"

namespace dlrq::pdl::detail {

namespace {

using bdd::Bdd;

constexpr std::size_t kTypeModelLimit = 512;

struct LimitReached {};

struct Primitive {
  Formula f;
  int index;  // unprimed variable 2 * index, primed 2 * index + 1
};

class Eliminator {
 public:
  Eliminator(const Budget& budget, const Deadline& deadline) : budget_(budget), deadline_(deadline) {}

  Elimination run(const Branch& b, const std::vector<Formula>& extra, EliminationTrace& trace,
                  std::size_t& peak_nodes) {
    Elimination out;
    trace.exact = b.exact;
    trace.axioms = b.axioms.size();
    try {
      Bdd axioms = m_.one();
      for (Formula a : b.axioms) axioms &= expr(a);
      std::vector<Bdd> root, somewhere;
      for (Formula r : b.root) root.push_back(expr(r));
      for (Formula s : b.somewhere) somewhere.push_back(expr(s));
      for (Formula g : extra) expr(g);
      // Unfolding constraints may create further primitives; loop until stable.
      std::size_t done = 0;
      Bdd local = axioms;
      while (done < stars_.size()) {
        const auto [star_var, unfold] = stars_[done++];
        local &= !(m_.var(2 * star_var) ^ expr(unfold));
        check();
      }
      trace.primitives = prims_.size();
      trace.closure = memo_.size();
      build_edges();

      Bdd t = local;
      trace.initial_types = count(t);
      auto root_alive = [&](const Bdd& types) {
        Bdd r = types;
        for (const auto& f : root) r &= f;
        if (r.is_zero()) return false;
        for (const auto& f : somewhere)
          if ((types & f).is_zero()) return false;
        return true;
      };
      while (root_alive(t)) {
        check();
        Bdd bad_count = counting(t);
        Bdd bad_demand = demands(t) | grouping(t);
        Bdd bad_ev = eventualities(t);
        const double before = count(t);
        const double c = count(t & bad_count);
        const double d = count(t & bad_demand & !bad_count);
        Bdd next = t & !(bad_count | bad_demand | bad_ev);
        const double after = count(next);
        ++trace.rounds;
        trace.eliminated.push_back(before - after);
        trace.by_counting += c;
        trace.by_demand += d;
        trace.by_eventuality += before - after - c - d;
        if (next == t) break;
        t = next;
      }
      trace.surviving_types = count(t);
      if (!root_alive(t)) {
        trace.outcome = "refuted";
        out.verdict = Verdict::Refuted;
      } else {
        trace.outcome = "open";
        out.verdict = Verdict::Open;
        if (trace.surviving_types <= static_cast<double>(kTypeModelLimit)) out.type_model = type_model(t);
      }
    } catch (const LimitReached&) {
      trace.outcome = "limit";
      out.verdict = Verdict::Limit;
    }
    peak_nodes = std::max(peak_nodes, m_.stats().peak_nodes);
    return out;
  }

 private:
  void check() {
    if (deadline_.expired() || m_.live_nodes() > budget_.max_bdd_nodes) throw LimitReached{};
  }

  int primitive(Formula f) {
    auto it = index_.find(f);
    if (it != index_.end()) return it->second;
    const int i = static_cast<int>(prims_.size());
    prims_.push_back({f, i});
    index_.emplace(f, i);
    while (m_.num_vars() < 2 * (i + 1)) m_.new_var();
    return i;
  }

  // Boolean function of the primitives equivalent to f over unprimed variables.
  Bdd expr(Formula f) {
    if (auto it = memo_.find(f); it != memo_.end()) return it->second;
    // Iterative post-order: long conjunction chains are common.
    std::vector<std::pair<Formula, bool>> stack{{f, false}};
    while (!stack.empty()) {
      auto [g, ready] = stack.back();
      stack.pop_back();
      if (memo_.count(g)) continue;
      if (!ready) {
        stack.push_back({g, true});
        for (Formula d : deps(g))
          if (!memo_.count(d)) stack.push_back({d, false});
        continue;
      }
      memo_.emplace(g, compute(g));
    }
    check();
    return memo_.at(f);
  }

  // Formulas whose functions are needed to compute g.
  std::vector<Formula> deps(Formula g) {
    switch (g->kind) {
      case FormulaKind::True:
      case FormulaKind::Atom: return {};
      case FormulaKind::Not: return {g->left};
      case FormulaKind::And: return {g->left, g->right};
      case FormulaKind::AtMost: return {g->left};
      case FormulaKind::Dia: break;
    }
    Program r = g->program;
    switch (r->kind) {
      case ProgramKind::Atomic: return {g->left};
      case ProgramKind::Seq: return {dia(r->left, dia(r->right, g->left))};
      case ProgramKind::Union: return {dia(r->left, g->left), dia(r->right, g->left)};
      case ProgramKind::Test: return {r->test, g->left};
      case ProgramKind::Star: return {g->left};
    }
    return {};
  }

  Bdd compute(Formula g) {
    switch (g->kind) {
      case FormulaKind::True: return m_.one();
      case FormulaKind::Atom: return m_.var(2 * primitive(g));
      case FormulaKind::Not: return !memo_.at(g->left);
      case FormulaKind::And: return memo_.at(g->left) & memo_.at(g->right);
      case FormulaKind::AtMost: {
        const int i = primitive(g);
        graded_.push_back(i);
        return m_.var(2 * i);
      }
      case FormulaKind::Dia: break;
    }
    Program r = g->program;
    switch (r->kind) {
      case ProgramKind::Atomic: {
        if (memo_.at(g->left).is_zero()) return m_.zero();
        const int i = primitive(g);
        basic_.push_back(i);
        return m_.var(2 * i);
      }
      case ProgramKind::Seq: return memo_.at(dia(r->left, dia(r->right, g->left)));
      case ProgramKind::Union: return memo_.at(dia(r->left, g->left)) | memo_.at(dia(r->right, g->left));
      case ProgramKind::Test: return memo_.at(r->test) & memo_.at(g->left);
      case ProgramKind::Star: {
        const int i = primitive(g);
        eventual_.push_back(i);
        // <r*>psi <-> psi or <r><r*>psi; the second disjunct is expanded later.
        stars_.push_back({i, disj(g->left, dia(r->left, g))});
        return m_.var(2 * i);
      }
    }
    return m_.zero();
  }

  Bdd primed(const Bdd& f) { return m_.rename(f, to_primed()); }

  const std::vector<int>& to_primed() {
    if (static_cast<int>(prime_map_.size()) != m_.num_vars()) {
      prime_map_.assign(m_.num_vars(), 0);
      for (int v = 0; v < m_.num_vars(); ++v) prime_map_[v] = v % 2 == 0 ? v + 1 : v;
    }
    return prime_map_;
  }

  const std::vector<int>& swap_map() {
    if (static_cast<int>(swap_map_.size()) != m_.num_vars()) {
      swap_map_.assign(m_.num_vars(), 0);
      for (int v = 0; v < m_.num_vars(); ++v) swap_map_[v] = v ^ 1;
    }
    return swap_map_;
  }

  Basic basic_of(Program p) const { return {p->name, p->converse}; }

  // E_b(x, x'): a b-edge from a state of type x to one of type x' is
  // consistent with the diamonds and empty graded boxes of both ends.
  void build_edges() {
    std::vector<int> primed_vars;
    for (int i = 0; i < static_cast<int>(prims_.size()); ++i) primed_vars.push_back(2 * i + 1);
    primed_cube_ = m_.cube(primed_vars);
    std::set<std::string> names;
    for (const auto& p : prims_)
      if (p.f->program && p.f->program->kind == ProgramKind::Atomic) names.insert(p.f->program->name);
    for (const auto& name : names) {
      Bdd e = m_.one();
      for (const auto& p : prims_) {
        const FormulaKind k = p.f->kind;
        if ((k != FormulaKind::Dia && k != FormulaKind::AtMost) || p.f->program->kind != ProgramKind::Atomic ||
            p.f->program->name != name)
          continue;
        if (k == FormulaKind::AtMost && p.f->count != 0) continue;
        const bool conv = p.f->program->converse;
        Bdd body = memo_.at(p.f->left);
        Bdd here = m_.var(2 * p.index), there = m_.var(2 * p.index + 1);
        if (k == FormulaKind::Dia)
          e &= conv ? (there | (!body)) : (here | (!primed(body)));
        else
          e &= conv ? ((!there) | (!body)) : ((!here) | (!primed(body)));
        check();
      }
      edges_[{name, false}] = e;
      edges_[{name, true}] = m_.rename(e, swap_map());
    }
  }

  const Bdd& edge(const Basic& b) {
    auto it = edges_.find(b);
    if (it == edges_.end()) it = edges_.emplace(b, m_.one()).first;
    return it->second;
  }

  // Types with a b-successor in z.
  Bdd pre_basic(const Basic& b, const Bdd& z) {
    Bdd r = m_.and_exists(edge(b), primed(z), primed_cube_);
    check();
    return r;
  }

  Bdd pre(Program r, const Bdd& z, const Bdd& t) {
    switch (r->kind) {
      case ProgramKind::Atomic: return pre_basic(basic_of(r), z & t);
      case ProgramKind::Seq: return pre(r->left, pre(r->right, z, t), t);
      case ProgramKind::Union: return pre(r->left, z, t) | pre(r->right, z, t);
      case ProgramKind::Test: return expr(r->test) & z;
      case ProgramKind::Star: {
        Bdd y = z;
        for (;;) {
          Bdd next = y | (t & pre(r->left, y, t));
          if (next == y) return y;
          y = next;
        }
      }
    }
    return z;
  }

  Bdd demands(const Bdd& t) {
    Bdd bad = m_.zero();
    for (int i : basic_) {
      Formula f = prims_[i].f;
      bad |= m_.var(2 * i) & !pre_basic(basic_of(f->program), t & memo_.at(f->left));
    }
    // A violated graded box needs at least one successor in its body.
    for (int i : graded_) {
      Formula f = prims_[i].f;
      bad |= m_.nvar(2 * i) & !pre_basic(basic_of(f->program), t & memo_.at(f->left));
    }
    return bad;
  }

  // Demand indicator and body for one successor requirement over basic b.
  struct Need {
    Bdd indicator;
    Bdd body;
    int count;  // -1 for a diamond, else the graded count of a violated box
  };

  std::vector<Need> needs(const Basic& b) {
    std::vector<Need> out;
    for (int i : basic_)
      if (basic_of(prims_[i].f->program) == b) out.push_back({m_.var(2 * i), memo_.at(prims_[i].f->left), -1});
    for (int i : graded_)
      if (basic_of(prims_[i].f->program) == b)
        out.push_back({m_.nvar(2 * i), memo_.at(prims_[i].f->left), prims_[i].f->count});
    return out;
  }

  // An empty graded box against a successor requirement inside its body.
  Bdd counting(const Bdd& t) {
    Bdd bad = m_.zero();
    for (int i : graded_) {
      Formula f = prims_[i].f;
      if (f->count != 0) continue;
      Bdd chi = memo_.at(f->left);
      Bdd any = m_.zero();
      for (const auto& n : needs(basic_of(f->program)))
        if ((t & n.body & !chi).is_zero()) any |= n.indicator;
      bad |= m_.var(2 * i) & any;
    }
    check();
    return bad;
  }

  // A box allowing one successor in chi: every requirement entailing chi
  // has to be met by the same successor.
  Bdd grouping(const Bdd& t) {
    Bdd bad = m_.zero();
    Bdd tp = primed(t);
    for (int i : graded_) {
      Formula f = prims_[i].f;
      if (f->count != 1) continue;
      const Basic b = basic_of(f->program);
      Bdd chi = memo_.at(f->left);
      Bdd some = m_.zero(), joint = m_.one(), kill = m_.zero();
      for (const auto& n : needs(b)) {
        if (!(t & n.body & !chi).is_zero()) continue;
        if (n.count >= 1) {
          kill |= n.indicator;
          continue;
        }
        some |= n.indicator;
        joint &= (!n.indicator) | primed(n.body);
      }
      Bdd ok = m_.and_exists(edge(b), joint & tp, primed_cube_);
      bad |= m_.var(2 * i) & (kill | (some & !ok));
      check();
    }
    return bad;
  }

  Bdd eventualities(const Bdd& t) {
    Bdd bad = m_.zero();
    for (int i : eventual_) {
      Formula f = prims_[i].f;
      Bdd good = t & pre(f->program, t & memo_.at(f->left), t);
      bad |= m_.var(2 * i) & !good;
    }
    return bad;
  }

  double count(const Bdd& f) {
    const int n = static_cast<int>(prims_.size());
    return m_.sat_count(f, m_.num_vars()) / std::ldexp(1.0, m_.num_vars() - n);
  }

  // One state per surviving type, with every edge the types allow.
  std::optional<Kripke> type_model(Bdd t) {
    std::vector<std::vector<char>> types;
    const int n = static_cast<int>(prims_.size());
    while (!t.is_zero()) {
      auto a = m_.pick(t);
      Bdd cube = m_.one();
      std::vector<char> type(n);
      for (int i = 0; i < n; ++i) {
        type[i] = a[2 * i];
        cube &= type[i] ? m_.var(2 * i) : m_.nvar(2 * i);
      }
      types.push_back(type);
      t &= !cube;
      check();
    }
    Kripke k;
    for (std::size_t s = 0; s < types.size(); ++s) {
      k.add_state("t" + std::to_string(s));
      for (int i = 0; i < n; ++i)
        if (types[s][i] && prims_[i].f->kind == FormulaKind::Atom && prims_[i].f->name.rfind("$U", 0) != 0)
          k.label(static_cast<int>(s), prims_[i].f->name);
    }
    std::vector<char> a(m_.num_vars());
    for (const auto& [b, e] : edges_) {
      if (b.second) continue;
      auto& set = k.edges[b.first];
      for (std::size_t s = 0; s < types.size(); ++s)
        for (std::size_t u = 0; u < types.size(); ++u) {
          for (int i = 0; i < n; ++i) {
            a[2 * i] = types[s][i];
            a[2 * i + 1] = types[u][i];
          }
          if (m_.eval(e, a)) set.insert({static_cast<int>(s), static_cast<int>(u)});
        }
      if (deadline_.expired()) return std::nullopt;
    }
    return k;
  }

  const Budget& budget_;
  const Deadline& deadline_;
  bdd::Manager m_{0, 20};
  std::vector<Primitive> prims_;
  std::unordered_map<Formula, int> index_;
  std::unordered_map<Formula, Bdd> memo_;
  std::vector<int> basic_, graded_, eventual_;
  std::vector<std::pair<int, Formula>> stars_;
  std::map<Basic, Bdd> edges_;
  std::vector<int> prime_map_, swap_map_;
  Bdd primed_cube_;
};

}  // namespace

Elimination eliminate(const Branch& b, const std::vector<Formula>& extra, const Budget& budget,
                      const Deadline& deadline, EliminationTrace& trace, std::size_t& peak_nodes) {
  Eliminator e(budget, deadline);
  return e.run(b, extra, trace, peak_nodes);
}

}  // namespace dlrq::pdl::detail
