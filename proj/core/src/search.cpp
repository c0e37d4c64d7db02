// Bounded model finding: the existence of a connected structure with a fixed
// number of states whose first state satisfies the input is encoded as a
// propositional problem. Every subformula gets one variable per state and
// every starred program a reachability matrix built by repeated squaring.

#include <condition_variable>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "dlrq/sat.hpp"
#include "pdl_sat_internal.hpp"

namespace dlrq::pdl::detail {

namespace {

using sat::Lit;

struct SearchLimit {};

// Sets a flag when the deadline passes, so a running solve can stop.
class Alarm {
 public:
  explicit Alarm(const Deadline& d) {
    if (d.unlimited()) return;
    thread_ = std::thread([this, left = d.remaining()] {
      std::unique_lock lock(mu_);
      if (!cv_.wait_for(lock, left, [this] { return done_; })) fired_ = true;
    });
  }
  ~Alarm() {
    if (!thread_.joinable()) return;
    {
      std::lock_guard lock(mu_);
      done_ = true;
    }
    cv_.notify_all();
    thread_.join();
  }
  const volatile bool* flag() const { return &fired_; }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  bool done_ = false;
  volatile bool fired_ = false;
  std::thread thread_;
};

class Encoder {
 public:
  Encoder(Formula f, int n, const Deadline& deadline)
      : n_(n), deadline_(deadline), names_(program_names(f)) {
    true_ = sat::pos(s_.new_var());
    add({true_});
    for (const auto& p : names_) {
      auto& e = edges_[p];
      for (int i = 0; i < n_ * n_; ++i) e.push_back(sat::pos(s_.new_var()));
    }
    // Connectivity: each later state touches an earlier one.
    for (int s = 1; s < n_; ++s) {
      std::vector<Lit> c;
      for (const auto& p : names_)
        for (int t = 0; t < s; ++t) {
          c.push_back(edge(p, false, s, t));
          c.push_back(edge(p, false, t, s));
        }
      add(c);
    }
    add({lits(f)[0]});
  }

  sat::Solver& solver() { return s_; }
  std::size_t clauses() const { return clauses_; }

  Kripke decode() {
    Kripke k;
    for (int s = 0; s < n_; ++s) k.add_state("s" + std::to_string(s));
    for (const auto& [name, ls] : atoms_)
      for (int s = 0; s < n_; ++s)
        if (s_.value_lit(ls[s])) k.label(s, name);
    for (const auto& p : names_) {
      auto& set = k.edges[p];
      for (int s = 0; s < n_; ++s)
        for (int t = 0; t < n_; ++t)
          if (s_.value_lit(edge(p, false, s, t))) set.insert({s, t});
    }
    return k;
  }

 private:
  using Row = std::vector<Lit>;  // one literal per state
  using Matrix = std::vector<Lit>;  // row-major n x n

  void add(std::vector<Lit> c) {
    ++clauses_;
    s_.add_clause(std::move(c));
  }

  Lit fresh() { return sat::pos(s_.new_var()); }
  Lit false_lit() const { return sat::flip(true_); }

  Lit edge(const std::string& p, bool conv, int s, int t) {
    const auto& e = edges_.at(p);
    return conv ? e[t * n_ + s] : e[s * n_ + t];
  }

  // x <-> a and b, with constants folded.
  Lit and2(Lit a, Lit b) {
    if (a == false_lit() || b == false_lit()) return false_lit();
    if (a == true_) return b;
    if (b == true_) return a;
    if (a == b) return a;
    if (a == sat::flip(b)) return false_lit();
    Lit x = fresh();
    add({sat::flip(x), a});
    add({sat::flip(x), b});
    add({x, sat::flip(a), sat::flip(b)});
    return x;
  }

  // x <-> or of ls.
  Lit or_n(const std::vector<Lit>& ls) {
    std::vector<Lit> keep;
    for (Lit l : ls) {
      if (l == true_) return true_;
      if (l != false_lit()) keep.push_back(l);
    }
    if (keep.empty()) return false_lit();
    if (keep.size() == 1) return keep[0];
    Lit x = fresh();
    std::vector<Lit> big{sat::flip(x)};
    for (Lit l : keep) {
      add({x, sat::flip(l)});
      big.push_back(l);
    }
    add(big);
    return x;
  }

  const Row& lits(Formula f) {
    if (auto it = memo_.find(f); it != memo_.end()) return it->second;
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
      Row r = compute(g);
      memo_.emplace(g, std::move(r));
      if (deadline_.expired()) throw SearchLimit{};
    }
    return memo_.at(f);
  }

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
      case ProgramKind::Atomic:
      case ProgramKind::Star: return {g->left};
      case ProgramKind::Seq: return {dia(r->left, dia(r->right, g->left))};
      case ProgramKind::Union: return {dia(r->left, g->left), dia(r->right, g->left)};
      case ProgramKind::Test: return {r->test, g->left};
    }
    return {};
  }

  Row compute(Formula g) {
    Row out(n_);
    switch (g->kind) {
      case FormulaKind::True: std::fill(out.begin(), out.end(), true_); return out;
      case FormulaKind::Atom: {
        for (auto& l : out) l = fresh();
        atoms_[g->name] = out;
        return out;
      }
      case FormulaKind::Not: {
        const Row& a = memo_.at(g->left);
        for (int s = 0; s < n_; ++s) out[s] = sat::flip(a[s]);
        return out;
      }
      case FormulaKind::And: {
        const Row& a = memo_.at(g->left);
        const Row& b = memo_.at(g->right);
        for (int s = 0; s < n_; ++s) out[s] = and2(a[s], b[s]);
        return out;
      }
      case FormulaKind::AtMost: {
        const Row& body = memo_.at(g->left);
        for (int s = 0; s < n_; ++s) {
          std::vector<Lit> z;
          for (int t = 0; t < n_; ++t)
            z.push_back(and2(edge_lit(g->program, s, t), body[t]));
          out[s] = sat::flip(at_least(z, g->count + 1));
        }
        return out;
      }
      case FormulaKind::Dia: break;
    }
    Program r = g->program;
    switch (r->kind) {
      case ProgramKind::Seq: return memo_.at(dia(r->left, dia(r->right, g->left)));
      case ProgramKind::Union: {
        const Row& a = memo_.at(dia(r->left, g->left));
        const Row& b = memo_.at(dia(r->right, g->left));
        for (int s = 0; s < n_; ++s) out[s] = or_n({a[s], b[s]});
        return out;
      }
      case ProgramKind::Test: {
        const Row& a = memo_.at(r->test);
        const Row& b = memo_.at(g->left);
        for (int s = 0; s < n_; ++s) out[s] = and2(a[s], b[s]);
        return out;
      }
      case ProgramKind::Atomic: {
        const Row& body = memo_.at(g->left);
        for (int s = 0; s < n_; ++s) {
          std::vector<Lit> ys;
          for (int t = 0; t < n_; ++t) ys.push_back(and2(edge_lit(r, s, t), body[t]));
          out[s] = or_n(ys);
        }
        return out;
      }
      case ProgramKind::Star: {
        const Row& body = memo_.at(g->left);
        if (is_universal(r, names_)) {
          // The structure is connected, so this holds everywhere or nowhere.
          Lit any = or_n(body);
          std::fill(out.begin(), out.end(), any);
          return out;
        }
        const Matrix& m = relation(r);
        for (int s = 0; s < n_; ++s) {
          std::vector<Lit> ys;
          for (int t = 0; t < n_; ++t) ys.push_back(and2(m[s * n_ + t], body[t]));
          out[s] = or_n(ys);
        }
        return out;
      }
    }
    return out;
  }

  Lit edge_lit(Program p, int s, int t) {
    if (!edges_.count(p->name)) return false_lit();
    return edge(p->name, p->converse, s, t);
  }

  // Sequential counter; the result is equivalent to "at least k of xs".
  Lit at_least(const std::vector<Lit>& xs, int k) {
    if (k <= 0) return true_;
    if (k > static_cast<int>(xs.size())) return false_lit();
    // c[j]: at least j of the inputs seen so far (j = 1..k).
    std::vector<Lit> c(k + 1, false_lit());
    c[0] = true_;
    for (Lit x : xs) {
      for (int j = k; j >= 1; --j) c[j] = or_n({c[j], and2(c[j - 1], x)});
    }
    return c[k];
  }

  const Matrix& relation(Program r) {
    if (auto it = relations_.find(r); it != relations_.end()) return it->second;
    Matrix m(n_ * n_, false_lit());
    switch (r->kind) {
      case ProgramKind::Atomic:
        for (int s = 0; s < n_; ++s)
          for (int t = 0; t < n_; ++t) m[s * n_ + t] = edge_lit(r, s, t);
        break;
      case ProgramKind::Test: {
        const Row& a = lits(r->test);
        for (int s = 0; s < n_; ++s) m[s * n_ + s] = a[s];
        break;
      }
      case ProgramKind::Union: {
        const Matrix a = relation(r->left);
        const Matrix& b = relation(r->right);
        for (int i = 0; i < n_ * n_; ++i) m[i] = or_n({a[i], b[i]});
        break;
      }
      case ProgramKind::Seq: m = compose(relation(r->left), relation(r->right)); break;
      case ProgramKind::Star: {
        m = relation(r->left);
        for (int s = 0; s < n_; ++s) m[s * n_ + s] = true_;
        for (int len = 1; len < n_ - 1; len *= 2) m = compose(m, m);
        break;
      }
    }
    return relations_.emplace(r, std::move(m)).first->second;
  }

  Matrix compose(const Matrix& a, const Matrix& b) {
    Matrix m(n_ * n_);
    for (int s = 0; s < n_; ++s)
      for (int t = 0; t < n_; ++t) {
        std::vector<Lit> ys;
        for (int u = 0; u < n_; ++u) ys.push_back(and2(a[s * n_ + u], b[u * n_ + t]));
        m[s * n_ + t] = or_n(ys);
      }
    return m;
  }

  int n_;
  const Deadline& deadline_;
  std::set<std::string> names_;
  sat::Solver s_;
  Lit true_ = 0;
  std::size_t clauses_ = 0;
  std::map<std::string, Row> edges_;
  std::map<std::string, Row> atoms_;
  std::unordered_map<Formula, Row> memo_;
  std::unordered_map<Program, Matrix> relations_;
};

}  // namespace

std::optional<Kripke> search_model(Formula f, int states, const Budget& budget, const Deadline& deadline,
                                   SearchTrace& trace) {
  trace.states = states;
  try {
    Encoder enc(f, states, deadline);
    trace.variables = static_cast<std::size_t>(enc.solver().num_vars());
    trace.clauses = enc.clauses();
    Alarm alarm(deadline);
    enc.solver().set_interrupt(alarm.flag());
    const auto status = enc.solver().solve({}, budget.sat_conflicts);
    trace.conflicts = enc.solver().stats().conflicts;
    if (status == sat::Status::Sat) {
      trace.outcome = "sat";
      return enc.decode();
    }
    trace.outcome = status == sat::Status::Unsat ? "unsat" : "limit";
  } catch (const SearchLimit&) {
    trace.outcome = "limit";
  }
  return std::nullopt;
}

}  // namespace dlrq::pdl::detail
