#include "dlrq/sat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dlrq::sat {

namespace {

constexpr int kNoReason = -1;

struct Clause {
  std::vector<Lit> lits;
  bool learnt = false;
  bool deleted = false;
  int lbd = 0;
  double activity = 0;
};

struct Watcher {
  int cref;
  Lit blocker;
};

double luby(double y, int x) {
  int size = 1, seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return std::pow(y, seq);
}

}  // namespace

struct Solver::Impl {
  bool ok = true;
  std::vector<Clause> clauses;
  std::vector<int> free_slots;
  std::vector<std::vector<Watcher>> watches;  // by literal
  std::vector<signed char> val;               // 1 true, -1 false, 0 unassigned
  std::vector<int> level;
  std::vector<int> reason;
  std::vector<char> polarity;  // saved phase: 1 means negative
  std::vector<char> seen;
  std::vector<double> activity;
  std::vector<Lit> trail;
  std::vector<int> trail_lim;
  std::size_t qhead = 0;
  std::vector<char> model;

  // Binary max-heap of variables by activity.
  std::vector<int> heap;
  std::vector<int> heap_pos;  // -1 if absent

  double var_inc = 1.0;
  double cla_inc = 1.0;
  std::size_t learnt_count = 0;
  double max_learnts = 0;
  const volatile bool* interrupt = nullptr;
  Stats stats;

  int nvars() const { return static_cast<int>(val.size()); }
  int decision_level() const { return static_cast<int>(trail_lim.size()); }
  signed char value(Lit l) const {
    signed char v = val[var_of(l)];
    return is_neg(l) ? static_cast<signed char>(-v) : v;
  }

  // Heap -----------------------------------------------------------------
  bool before(int a, int b) const { return activity[a] > activity[b] || (activity[a] == activity[b] && a < b); }
  void heap_up(int i) {
    int v = heap[i];
    while (i > 0) {
      int parent = (i - 1) / 2;
      if (!before(v, heap[parent])) break;
      heap[i] = heap[parent];
      heap_pos[heap[i]] = i;
      i = parent;
    }
    heap[i] = v;
    heap_pos[v] = i;
  }
  void heap_down(int i) {
    int v = heap[i];
    const int n = static_cast<int>(heap.size());
    while (true) {
      int child = 2 * i + 1;
      if (child >= n) break;
      if (child + 1 < n && before(heap[child + 1], heap[child])) ++child;
      if (!before(heap[child], v)) break;
      heap[i] = heap[child];
      heap_pos[heap[i]] = i;
      i = child;
    }
    heap[i] = v;
    heap_pos[v] = i;
  }
  void heap_insert(int v) {
    if (heap_pos[v] >= 0) return;
    heap.push_back(v);
    heap_pos[v] = static_cast<int>(heap.size()) - 1;
    heap_up(heap_pos[v]);
  }
  int heap_pop() {
    int top = heap.front();
    heap_pos[top] = -1;
    int last = heap.back();
    heap.pop_back();
    if (!heap.empty()) {
      heap[0] = last;
      heap_pos[last] = 0;
      heap_down(0);
    }
    return top;
  }

  void bump_var(int v) {
    activity[v] += var_inc;
    if (activity[v] > 1e100) {
      for (double& a : activity) a *= 1e-100;
      var_inc *= 1e-100;
    }
    if (heap_pos[v] >= 0) heap_up(heap_pos[v]);
  }
  void bump_clause(Clause& c) {
    c.activity += cla_inc;
    if (c.activity > 1e20) {
      for (auto& d : clauses)
        if (d.learnt) d.activity *= 1e-20;
      cla_inc *= 1e-20;
    }
  }

  // Assignment ------------------------------------------------------------
  void enqueue(Lit l, int from) {
    const int v = var_of(l);
    val[v] = is_neg(l) ? -1 : 1;
    level[v] = decision_level();
    reason[v] = from;
    trail.push_back(l);
  }

  void cancel_until(int lvl) {
    if (decision_level() <= lvl) return;
    for (std::size_t i = trail.size(); i-- > static_cast<std::size_t>(trail_lim[lvl]);) {
      const int v = var_of(trail[i]);
      polarity[v] = is_neg(trail[i]) ? 1 : 0;
      val[v] = 0;
      reason[v] = kNoReason;
      heap_insert(v);
    }
    trail.resize(trail_lim[lvl]);
    trail_lim.resize(lvl);
    qhead = trail.size();
  }

  int alloc(Clause c) {
    if (!free_slots.empty()) {
      int slot = free_slots.back();
      free_slots.pop_back();
      clauses[slot] = std::move(c);
      return slot;
    }
    clauses.push_back(std::move(c));
    return static_cast<int>(clauses.size()) - 1;
  }

  void attach(int cref) {
    const auto& c = clauses[cref];
    watches[c.lits[0]].push_back({cref, c.lits[1]});
    watches[c.lits[1]].push_back({cref, c.lits[0]});
  }

  // Returns the conflicting clause or kNoReason.
  int propagate() {
    int conflict = kNoReason;
    while (qhead < trail.size()) {
      const Lit p = trail[qhead++];
      const Lit false_lit = flip(p);
      auto& ws = watches[false_lit];
      ++stats.propagations;
      std::size_t i = 0, j = 0;
      while (i < ws.size()) {
        Watcher w = ws[i++];
        if (value(w.blocker) == 1) {
          ws[j++] = w;
          continue;
        }
        Clause& c = clauses[w.cref];
        if (c.deleted) continue;
        auto& lits = c.lits;
        if (lits[0] == false_lit) std::swap(lits[0], lits[1]);
        const Lit first = lits[0];
        if (first != w.blocker && value(first) == 1) {
          ws[j++] = {w.cref, first};
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < lits.size(); ++k)
          if (value(lits[k]) != -1) {
            std::swap(lits[1], lits[k]);
            watches[lits[1]].push_back({w.cref, first});
            moved = true;
            break;
          }
        if (moved) continue;
        ws[j++] = {w.cref, first};
        if (value(first) == -1) {
          conflict = w.cref;
          while (i < ws.size()) ws[j++] = ws[i++];
          qhead = trail.size();
        } else {
          enqueue(first, w.cref);
        }
      }
      ws.resize(j);
      if (conflict != kNoReason) break;
    }
    return conflict;
  }

  // First-UIP analysis; returns the learnt clause with the asserting literal
  // first and a literal of the backjump level second.
  std::vector<Lit> analyze(int conflict, int& backjump, int& lbd) {
    std::vector<Lit> learnt{0};
    int pending = 0;
    Lit p = -1;
    std::size_t index = trail.size();
    int cref = conflict;
    do {
      Clause& c = clauses[cref];
      if (c.learnt) bump_clause(c);
      for (std::size_t k = (p == -1 ? 0 : 1); k < c.lits.size(); ++k) {
        const Lit q = c.lits[k];
        const int v = var_of(q);
        if (seen[v] || level[v] == 0) continue;
        bump_var(v);
        seen[v] = 1;
        if (level[v] >= decision_level())
          ++pending;
        else
          learnt.push_back(q);
      }
      while (!seen[var_of(trail[--index])]) {
      }
      p = trail[index];
      cref = reason[var_of(p)];
      seen[var_of(p)] = 0;
      --pending;
    } while (pending > 0);
    learnt[0] = flip(p);

    // Local minimization: drop literals implied by other literals of the clause.
    std::vector<Lit> removed;
    std::size_t keep = 1;
    for (std::size_t k = 1; k < learnt.size(); ++k) {
      const int v = var_of(learnt[k]);
      bool redundant = reason[v] != kNoReason;
      if (redundant)
        for (std::size_t r = 1; r < clauses[reason[v]].lits.size(); ++r) {
          const int u = var_of(clauses[reason[v]].lits[r]);
          if (!seen[u] && level[u] > 0) {
            redundant = false;
            break;
          }
        }
      if (redundant)
        removed.push_back(learnt[k]);
      else
        learnt[keep++] = learnt[k];
    }
    learnt.resize(keep);
    for (Lit l : learnt) seen[var_of(l)] = 0;
    for (Lit l : removed) seen[var_of(l)] = 0;

    backjump = 0;
    if (learnt.size() > 1) {
      std::size_t max_k = 1;
      for (std::size_t k = 2; k < learnt.size(); ++k)
        if (level[var_of(learnt[k])] > level[var_of(learnt[max_k])]) max_k = k;
      std::swap(learnt[1], learnt[max_k]);
      backjump = level[var_of(learnt[1])];
    }
    std::vector<int> levels;
    for (Lit l : learnt) levels.push_back(level[var_of(l)]);
    std::sort(levels.begin(), levels.end());
    lbd = static_cast<int>(std::unique(levels.begin(), levels.end()) - levels.begin());
    return learnt;
  }

  bool locked(int cref) const {
    const auto& c = clauses[cref];
    const int v = var_of(c.lits[0]);
    return reason[v] == cref && value(c.lits[0]) == 1;
  }

  void reduce_db() {
    std::vector<int> learnts;
    for (std::size_t i = 0; i < clauses.size(); ++i)
      if (clauses[i].learnt && !clauses[i].deleted) learnts.push_back(static_cast<int>(i));
    std::sort(learnts.begin(), learnts.end(), [&](int a, int b) {
      const auto& x = clauses[a];
      const auto& y = clauses[b];
      if (x.lbd != y.lbd) return x.lbd > y.lbd;
      if (x.activity != y.activity) return x.activity < y.activity;
      return a < b;
    });
    std::size_t target = learnts.size() / 2;
    for (std::size_t k = 0; k < target; ++k) {
      const int cref = learnts[k];
      if (clauses[cref].lbd <= 2 || locked(cref)) continue;
      clauses[cref].deleted = true;
      clauses[cref].lits.clear();
      --learnt_count;
      free_slots.push_back(cref);
    }
    // Drop watchers of deleted clauses before their slots are reused.
    for (auto& ws : watches)
      ws.erase(std::remove_if(ws.begin(), ws.end(), [&](const Watcher& w) { return clauses[w.cref].deleted; }),
               ws.end());
  }

  Lit pick_branch() {
    while (!heap.empty()) {
      int v = heap_pop();
      if (val[v] == 0) return polarity[v] ? neg(v) : pos(v);
    }
    return -1;
  }

  Status search(std::int64_t conflicts_allowed, const std::vector<Lit>& assumptions, std::int64_t& budget) {
    std::int64_t local = 0;
    while (true) {
      int conflict = propagate();
      if (conflict != kNoReason) {
        ++stats.conflicts;
        ++local;
        if (budget > 0) --budget;
        if (decision_level() == 0) {
          ok = false;
          return Status::Unsat;
        }
        int backjump = 0, lbd = 0;
        auto learnt = analyze(conflict, backjump, lbd);
        cancel_until(backjump);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else {
          Clause c;
          c.lits = std::move(learnt);
          c.learnt = true;
          c.lbd = lbd;
          int cref = alloc(std::move(c));
          attach(cref);
          bump_clause(clauses[cref]);
          ++learnt_count;
          ++stats.learnt;
          enqueue(clauses[cref].lits[0], cref);
        }
        var_inc /= 0.95;
        cla_inc /= 0.999;
        continue;
      }
      if (interrupt && *interrupt) return Status::Unknown;
      if (budget == 0) return Status::Unknown;
      if (local >= conflicts_allowed) {
        cancel_until(0);
        return Status::Unknown;
      }
      if (static_cast<double>(learnt_count) >= max_learnts + static_cast<double>(trail.size())) {
        reduce_db();
        max_learnts *= 1.1;
      }
      Lit next = -1;
      while (decision_level() < static_cast<int>(assumptions.size())) {
        const Lit a = assumptions[decision_level()];
        if (value(a) == 1) {
          trail_lim.push_back(static_cast<int>(trail.size()));
        } else if (value(a) == -1) {
          return Status::Unsat;
        } else {
          next = a;
          break;
        }
      }
      if (next == -1) {
        next = pick_branch();
        if (next == -1) return Status::Sat;
      }
      ++stats.decisions;
      trail_lim.push_back(static_cast<int>(trail.size()));
      enqueue(next, kNoReason);
    }
  }
};

Solver::Solver() : impl_(new Impl) {}
Solver::~Solver() { delete impl_; }

int Solver::new_var() {
  auto& s = *impl_;
  const int v = s.nvars();
  s.val.push_back(0);
  s.level.push_back(0);
  s.reason.push_back(kNoReason);
  s.polarity.push_back(1);
  s.seen.push_back(0);
  s.activity.push_back(0);
  s.heap_pos.push_back(-1);
  s.watches.emplace_back();
  s.watches.emplace_back();
  s.heap_insert(v);
  return v;
}

int Solver::num_vars() const { return impl_->nvars(); }

bool Solver::add_clause(std::vector<Lit> clause) {
  auto& s = *impl_;
  if (!s.ok) return false;
  if (s.decision_level() != 0) throw std::logic_error("add_clause above decision level 0");
  for (Lit l : clause)
    if (l < 0 || var_of(l) >= s.nvars()) throw std::out_of_range("literal of unknown variable");
  std::sort(clause.begin(), clause.end());
  clause.erase(std::unique(clause.begin(), clause.end()), clause.end());
  std::vector<Lit> kept;
  for (std::size_t i = 0; i < clause.size(); ++i) {
    if (i + 1 < clause.size() && clause[i + 1] == flip(clause[i])) return true;
    const auto v = s.value(clause[i]);
    if (v == 1) return true;
    if (v == 0) kept.push_back(clause[i]);
  }
  if (kept.empty()) return s.ok = false;
  if (kept.size() == 1) {
    s.enqueue(kept[0], kNoReason);
    if (s.propagate() != kNoReason) s.ok = false;
    return s.ok;
  }
  Clause c;
  c.lits = std::move(kept);
  s.attach(s.alloc(std::move(c)));
  return true;
}

Status Solver::solve(const std::vector<Lit>& assumptions, std::int64_t conflict_budget) {
  auto& s = *impl_;
  if (!s.ok) return Status::Unsat;
  for (Lit l : assumptions)
    if (l < 0 || var_of(l) >= s.nvars()) throw std::out_of_range("assumption of unknown variable");
  std::size_t originals = 0;
  for (const auto& c : s.clauses)
    if (!c.learnt && !c.deleted) ++originals;
  s.max_learnts = std::max(2000.0, static_cast<double>(originals) / 3.0);
  std::int64_t budget = conflict_budget < 0 ? -1 : std::max<std::int64_t>(conflict_budget, 1);
  Status result = Status::Unknown;
  for (int round = 0; result == Status::Unknown; ++round) {
    if (s.interrupt && *s.interrupt) break;
    if (budget == 0) break;
    const auto allowed = static_cast<std::int64_t>(luby(2, round) * 100);
    result = s.search(allowed, assumptions, budget);
    if (result == Status::Unknown) ++s.stats.restarts;
  }
  if (result == Status::Sat) {
    s.model.assign(s.nvars(), 0);
    for (int v = 0; v < s.nvars(); ++v) s.model[v] = s.val[v] == 1;
  }
  s.cancel_until(0);
  return result;
}

bool Solver::value(int v) const { return impl_->model.at(v) != 0; }
void Solver::set_interrupt(const volatile bool* flag) { impl_->interrupt = flag; }
const Stats& Solver::stats() const { return impl_->stats; }

}  // namespace dlrq::sat
