#include "dlrq/pdl.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "dlrq/sexpr.hpp"

namespace dlrq::pdl {

namespace {

std::size_t mix(std::size_t h, std::size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

struct FormulaHash {
  std::size_t operator()(const FormulaNode* n) const { return n->hash; }
};
struct FormulaEq {
  bool operator()(const FormulaNode* a, const FormulaNode* b) const {
    return a->kind == b->kind && a->count == b->count && a->left == b->left && a->right == b->right &&
           a->program == b->program && a->name == b->name;
  }
};
struct ProgramHash {
  std::size_t operator()(const ProgramNode* n) const { return n->hash; }
};
struct ProgramEq {
  bool operator()(const ProgramNode* a, const ProgramNode* b) const {
    return a->kind == b->kind && a->converse == b->converse && a->left == b->left && a->right == b->right &&
           a->test == b->test && a->name == b->name;
  }
};

class Store {
 public:
  Formula intern(FormulaNode n) {
    std::size_t h = std::hash<std::string>{}(n.name);
    h = mix(h, static_cast<std::size_t>(n.kind));
    h = mix(h, static_cast<std::size_t>(n.count));
    h = mix(h, n.left ? n.left->hash : 1);
    h = mix(h, n.right ? n.right->hash : 2);
    h = mix(h, n.program ? n.program->hash : 3);
    n.hash = h;
    std::lock_guard lock(mutex_);
    if (auto it = formulas_.find(&n); it != formulas_.end()) return *it;
    n.id = next_id_++;
    formula_nodes_.push_back(std::move(n));
    const FormulaNode* p = &formula_nodes_.back();
    formulas_.insert(p);
    return p;
  }

  Program intern(ProgramNode n) {
    std::size_t h = std::hash<std::string>{}(n.name);
    h = mix(h, 100 + static_cast<std::size_t>(n.kind));
    h = mix(h, n.converse ? 7 : 8);
    h = mix(h, n.left ? n.left->hash : 1);
    h = mix(h, n.right ? n.right->hash : 2);
    h = mix(h, n.test ? n.test->hash : 3);
    n.hash = h;
    std::lock_guard lock(mutex_);
    if (auto it = programs_.find(&n); it != programs_.end()) return *it;
    n.id = next_id_++;
    program_nodes_.push_back(std::move(n));
    const ProgramNode* p = &program_nodes_.back();
    programs_.insert(p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::deque<FormulaNode> formula_nodes_;
  std::deque<ProgramNode> program_nodes_;
  std::unordered_set<const FormulaNode*, FormulaHash, FormulaEq> formulas_;
  std::unordered_set<const ProgramNode*, ProgramHash, ProgramEq> programs_;
  std::uint64_t next_id_ = 1;
};

Store& store() {
  static Store* s = new Store;
  return *s;
}

}  // namespace

Formula top() { return store().intern(FormulaNode{FormulaKind::True}); }
Formula bottom() { return neg(top()); }

Formula atom(std::string_view name) {
  FormulaNode n{FormulaKind::Atom};
  n.name = name;
  return store().intern(std::move(n));
}

Formula neg(Formula f) {
  if (f->kind == FormulaKind::Not) return f->left;
  FormulaNode n{FormulaKind::Not};
  n.left = f;
  return store().intern(std::move(n));
}

Formula conj(Formula a, Formula b) {
  FormulaNode n{FormulaKind::And};
  n.left = a;
  n.right = b;
  return store().intern(std::move(n));
}

Formula conj(const std::vector<Formula>& fs) {
  if (fs.empty()) return top();
  Formula out = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) out = conj(out, fs[i]);
  return out;
}

Formula disj(Formula a, Formula b) { return neg(conj(neg(a), neg(b))); }

Formula disj(const std::vector<Formula>& fs) {
  if (fs.empty()) return bottom();
  Formula out = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) out = disj(out, fs[i]);
  return out;
}

Formula implies(Formula a, Formula b) { return neg(conj(a, neg(b))); }
Formula iff(Formula a, Formula b) { return conj(implies(a, b), implies(b, a)); }

Formula dia(Program r, Formula f) {
  FormulaNode n{FormulaKind::Dia};
  n.program = r;
  n.left = f;
  return store().intern(std::move(n));
}

Formula box(Program r, Formula f) { return neg(dia(r, neg(f))); }

Formula at_most(int k, Program p, Formula f) {
  if (!is_basic(p)) throw std::invalid_argument("graded modality over a non-atomic program");
  if (k < 0) throw std::invalid_argument("negative grade");
  FormulaNode n{FormulaKind::AtMost};
  n.count = k;
  n.program = p;
  n.left = f;
  return store().intern(std::move(n));
}

Program prog(std::string_view name) {
  ProgramNode n{ProgramKind::Atomic};
  n.name = name;
  return store().intern(std::move(n));
}

Program converse(std::string_view name) {
  ProgramNode n{ProgramKind::Atomic};
  n.name = name;
  n.converse = true;
  return store().intern(std::move(n));
}

Program seq(Program a, Program b) {
  ProgramNode n{ProgramKind::Seq};
  n.left = a;
  n.right = b;
  return store().intern(std::move(n));
}

Program seq(const std::vector<Program>& rs) {
  if (rs.empty()) return skip();
  Program out = rs.front();
  for (std::size_t i = 1; i < rs.size(); ++i) out = seq(out, rs[i]);
  return out;
}

Program alt(Program a, Program b) {
  ProgramNode n{ProgramKind::Union};
  n.left = a;
  n.right = b;
  return store().intern(std::move(n));
}

Program alt(const std::vector<Program>& rs) {
  if (rs.empty()) return test(bottom());
  Program out = rs.front();
  for (std::size_t i = 1; i < rs.size(); ++i) out = alt(out, rs[i]);
  return out;
}

Program star(Program r) {
  ProgramNode n{ProgramKind::Star};
  n.left = r;
  return store().intern(std::move(n));
}

Program test(Formula f) {
  ProgramNode n{ProgramKind::Test};
  n.test = f;
  return store().intern(std::move(n));
}

Program skip() { return test(top()); }

Program inverse(Program r) {
  switch (r->kind) {
    case ProgramKind::Atomic: return r->converse ? prog(r->name) : converse(r->name);
    case ProgramKind::Seq: return seq(inverse(r->right), inverse(r->left));
    case ProgramKind::Union: return alt(inverse(r->left), inverse(r->right));
    case ProgramKind::Star: return star(inverse(r->left));
    case ProgramKind::Test: return r;
  }
  return r;
}

bool is_basic(Program p) { return p->kind == ProgramKind::Atomic; }

// ---------------------------------------------------------------------------

namespace {

template <class OnFormula, class OnProgram>
void walk(Formula root, OnFormula on_formula, OnProgram on_program) {
  std::unordered_set<const void*> seen;
  std::vector<Formula> fs{root};
  std::vector<Program> ps;
  while (!fs.empty() || !ps.empty()) {
    if (!fs.empty()) {
      Formula f = fs.back();
      fs.pop_back();
      if (!seen.insert(f).second) continue;
      on_formula(f);
      if (f->left) fs.push_back(f->left);
      if (f->right) fs.push_back(f->right);
      if (f->program) ps.push_back(f->program);
    } else {
      Program p = ps.back();
      ps.pop_back();
      if (!seen.insert(p).second) continue;
      on_program(p);
      if (p->left) ps.push_back(p->left);
      if (p->right) ps.push_back(p->right);
      if (p->test) fs.push_back(p->test);
    }
  }
}

}  // namespace

std::size_t dag_size(Formula f) {
  std::size_t n = 0;
  walk(f, [&](Formula) { ++n; }, [&](Program) { ++n; });
  return n;
}

std::size_t tree_size(Formula f) {
  std::unordered_map<const void*, std::size_t> memo;
  std::function<std::size_t(Formula)> fsize;
  std::function<std::size_t(Program)> psize;
  fsize = [&](Formula x) -> std::size_t {
    if (auto it = memo.find(x); it != memo.end()) return it->second;
    std::size_t s = 1;
    if (x->left) s += fsize(x->left);
    if (x->right) s += fsize(x->right);
    if (x->program) s += psize(x->program);
    return memo[x] = s;
  };
  psize = [&](Program x) -> std::size_t {
    if (auto it = memo.find(x); it != memo.end()) return it->second;
    std::size_t s = 1;
    if (x->left) s += psize(x->left);
    if (x->right) s += psize(x->right);
    if (x->test) s += fsize(x->test);
    return memo[x] = s;
  };
  return fsize(f);
}

void collect_names(Formula f, std::set<std::string>& atoms, std::set<std::string>& programs) {
  walk(
      f, [&](Formula x) { if (x->kind == FormulaKind::Atom) atoms.insert(x->name); },
      [&](Program p) { if (p->kind == ProgramKind::Atomic) programs.insert(p->name); });
}

// ---------------------------------------------------------------------------
// Printing and parsing

namespace {

void print(Formula f, std::string& out);

void print(Program r, std::string& out) {
  switch (r->kind) {
    case ProgramKind::Atomic:
      out += r->converse ? "(inv (prog " + r->name + "))" : "(prog " + r->name + ")";
      return;
    case ProgramKind::Seq:
    case ProgramKind::Union:
      out += r->kind == ProgramKind::Seq ? "(seq " : "(union ";
      print(r->left, out);
      out += ' ';
      print(r->right, out);
      out += ')';
      return;
    case ProgramKind::Star:
      out += "(star ";
      print(r->left, out);
      out += ')';
      return;
    case ProgramKind::Test:
      out += "(test ";
      print(r->test, out);
      out += ')';
      return;
  }
}

void print(Formula f, std::string& out) {
  switch (f->kind) {
    case FormulaKind::True: out += "(true)"; return;
    case FormulaKind::Atom: out += "(atom " + f->name + ")"; return;
    case FormulaKind::Not:
      out += "(not ";
      print(f->left, out);
      out += ')';
      return;
    case FormulaKind::And:
      out += "(and ";
      print(f->left, out);
      out += ' ';
      print(f->right, out);
      out += ')';
      return;
    case FormulaKind::Dia:
      out += "(dia ";
      print(f->program, out);
      out += ' ';
      print(f->left, out);
      out += ')';
      return;
    case FormulaKind::AtMost:
      out += "(atmost " + std::to_string(f->count) + " ";
      print(f->program, out);
      out += ' ';
      print(f->left, out);
      out += ')';
      return;
  }
}

Program read_program(const SExpr& e);

Formula read_formula(const SExpr& e) {
  if (!e.is_list || e.items.empty() || !e[0].is_symbol()) e.fail("malformed formula");
  const auto& h = e[0].symbol;
  auto args = [&](std::size_t n) {
    if (e.size() != n + 1) e.fail("'" + h + "' expects " + std::to_string(n) + " arguments");
  };
  auto fold = [&](auto combine) {
    if (e.size() < 3) e.fail("'" + h + "' expects at least 2 arguments");
    Formula f = read_formula(e[1]);
    for (std::size_t i = 2; i < e.size(); ++i) f = combine(f, read_formula(e[i]));
    return f;
  };
  if (h == "true") return args(0), top();
  if (h == "false") return args(0), bottom();
  if (h == "atom") return args(1), atom(e[1].as_symbol());
  if (h == "not") return args(1), neg(read_formula(e[1]));
  if (h == "and") return fold([](Formula a, Formula b) { return conj(a, b); });
  if (h == "or") return fold([](Formula a, Formula b) { return disj(a, b); });
  if (h == "implies") return args(2), implies(read_formula(e[1]), read_formula(e[2]));
  if (h == "dia") return args(2), dia(read_program(e[1]), read_formula(e[2]));
  if (h == "box") return args(2), box(read_program(e[1]), read_formula(e[2]));
  if (h == "atmost") {
    args(3);
    Program p = read_program(e[2]);
    if (!is_basic(p)) e[2].fail("graded modality needs an atomic or converse atomic program");
    int k = e[1].as_int();
    if (k < 0) e[1].fail("negative grade");
    return at_most(k, p, read_formula(e[3]));
  }
  e.fail("unknown formula constructor '" + h + "'");
}

Program read_program(const SExpr& e) {
  if (!e.is_list || e.items.empty() || !e[0].is_symbol()) e.fail("malformed program");
  const auto& h = e[0].symbol;
  auto args = [&](std::size_t n) {
    if (e.size() != n + 1) e.fail("'" + h + "' expects " + std::to_string(n) + " arguments");
  };
  auto fold = [&](auto combine) {
    if (e.size() < 3) e.fail("'" + h + "' expects at least 2 arguments");
    Program r = read_program(e[1]);
    for (std::size_t i = 2; i < e.size(); ++i) r = combine(r, read_program(e[i]));
    return r;
  };
  if (h == "prog") return args(1), prog(e[1].as_symbol());
  if (h == "seq") return fold([](Program a, Program b) { return seq(a, b); });
  if (h == "union") return fold([](Program a, Program b) { return alt(a, b); });
  if (h == "star") return args(1), star(read_program(e[1]));
  if (h == "test") return args(1), test(read_formula(e[1]));
  if (h == "inv") return args(1), inverse(read_program(e[1]));
  e.fail("unknown program constructor '" + h + "'");
}

}  // namespace

std::string to_sexpr(Formula f) {
  std::string out;
  print(f, out);
  return out;
}

std::string to_sexpr(Program r) {
  std::string out;
  print(r, out);
  return out;
}

Formula parse_formula(std::string_view text) { return read_formula(parse_sexpr(text)); }
Program parse_program(std::string_view text) { return read_program(parse_sexpr(text)); }

// ---------------------------------------------------------------------------
// Kripke structures

int Kripke::add_state(std::string name) {
  states.push_back(std::move(name));
  return size() - 1;
}

int Kripke::state(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (states[i] == name) return i;
  throw std::out_of_range("unknown state '" + name + "'");
}

void require_valid(const Kripke& m) {
  auto ok = [&](int s) { return s >= 0 && s < m.size(); };
  for (const auto& [a, ss] : m.valuation)
    for (int s : ss)
      if (!ok(s)) throw std::invalid_argument("atom '" + a + "' labels a missing state");
  for (const auto& [p, es] : m.edges)
    for (auto [s, t] : es)
      if (!ok(s) || !ok(t)) throw std::invalid_argument("edge of '" + p + "' touches a missing state");
}

std::string to_sexpr(const Kripke& m) {
  std::string out = "(kripke\n  (states";
  for (const auto& s : m.states) out += " " + s;
  out += ")";
  for (int s = 0; s < m.size(); ++s) {
    std::string atoms;
    for (const auto& [a, ss] : m.valuation)
      if (ss.count(s)) atoms += " " + a;
    if (!atoms.empty()) out += "\n  (label " + m.states[s] + atoms + ")";
  }
  for (const auto& [p, es] : m.edges)
    for (auto [s, t] : es) out += "\n  (edge " + p + " " + m.states[s] + " " + m.states[t] + ")";
  return out + ")\n";
}

Kripke parse_kripke(std::string_view text) {
  SExpr doc = parse_sexpr(text);
  if (!doc.has_head("kripke")) doc.fail("expected (kripke ...)");
  Kripke m;
  auto state = [&](const SExpr& e) {
    try {
      return m.state(e.as_symbol());
    } catch (const std::out_of_range&) {
      e.fail("unknown state '" + e.symbol + "'");
    }
  };
  for (std::size_t i = 1; i < doc.size(); ++i) {
    const auto& f = doc[i];
    if (f.has_head("states")) {
      for (std::size_t k = 1; k < f.size(); ++k) m.add_state(f[k].as_symbol());
    } else if (f.has_head("label") && f.size() >= 2) {
      int s = state(f[1]);
      for (std::size_t k = 2; k < f.size(); ++k) m.label(s, f[k].as_symbol());
    } else if (f.has_head("edge") && f.size() == 4) {
      m.edge(f[1].as_symbol(), state(f[2]), state(f[3]));
    } else {
      f.fail("unknown kripke form");
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Model checking

struct ModelChecker::Impl {
  const Kripke& m;
  int n;
  std::unordered_map<Formula, std::vector<char>> formulas;
  std::unordered_map<Program, std::vector<char>> programs;

  explicit Impl(const Kripke& k) : m(k), n(k.size()) {}

  // Children are evaluated with an explicit stack: emitted formulas contain
  // conjunction chains far deeper than the call stack allows.
  const std::vector<char>& ext(Formula f) {
    if (auto it = formulas.find(f); it != formulas.end()) return it->second;
    std::vector<std::pair<Formula, bool>> stack{{f, false}};
    while (!stack.empty()) {
      auto [g, ready] = stack.back();
      stack.pop_back();
      if (formulas.count(g)) continue;
      if (ready) {
        formulas.emplace(g, compute(g));
        continue;
      }
      stack.push_back({g, true});
      if (g->left && !formulas.count(g->left)) stack.push_back({g->left, false});
      if (g->right && !formulas.count(g->right)) stack.push_back({g->right, false});
    }
    return formulas.at(f);
  }

  std::vector<char> compute(Formula f) {
    std::vector<char> out(n, 0);
    switch (f->kind) {
      case FormulaKind::True: out.assign(n, 1); break;
      case FormulaKind::Atom:
        if (auto it = m.valuation.find(f->name); it != m.valuation.end())
          for (int s : it->second) out[s] = 1;
        break;
      case FormulaKind::Not: {
        const auto& a = formulas.at(f->left);
        for (int s = 0; s < n; ++s) out[s] = !a[s];
        break;
      }
      case FormulaKind::And: {
        const auto& a = formulas.at(f->left);
        const auto& b = formulas.at(f->right);
        for (int s = 0; s < n; ++s) out[s] = a[s] && b[s];
        break;
      }
      case FormulaKind::Dia: {
        const auto& r = rel(f->program);
        const auto& body = formulas.at(f->left);
        for (int s = 0; s < n; ++s)
          for (int t = 0; t < n && !out[s]; ++t)
            if (r[s * n + t] && body[t]) out[s] = 1;
        break;
      }
      case FormulaKind::AtMost: {
        const auto& r = rel(f->program);
        const auto& body = formulas.at(f->left);
        for (int s = 0; s < n; ++s) {
          int count = 0;
          for (int t = 0; t < n; ++t) count += r[s * n + t] && body[t];
          out[s] = count <= f->count;
        }
        break;
      }
    }
    return out;
  }

  const std::vector<char>& rel(Program r) {
    if (auto it = programs.find(r); it != programs.end()) return it->second;
    std::vector<char> out(static_cast<std::size_t>(n) * n, 0);
    switch (r->kind) {
      case ProgramKind::Atomic:
        if (auto it = m.edges.find(r->name); it != m.edges.end())
          for (auto [s, t] : it->second) (r->converse ? out[t * n + s] : out[s * n + t]) = 1;
        break;
      case ProgramKind::Seq: {
        std::vector<char> a = rel(r->left);
        const auto& b = rel(r->right);
        for (int s = 0; s < n; ++s)
          for (int u = 0; u < n; ++u)
            if (a[s * n + u])
              for (int t = 0; t < n; ++t)
                if (b[u * n + t]) out[s * n + t] = 1;
        break;
      }
      case ProgramKind::Union: {
        out = rel(r->left);
        const auto& b = rel(r->right);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] || b[i];
        break;
      }
      case ProgramKind::Star: {
        out = rel(r->left);
        for (int s = 0; s < n; ++s) out[s * n + s] = 1;
        for (int k = 0; k < n; ++k)
          for (int s = 0; s < n; ++s)
            if (out[s * n + k])
              for (int t = 0; t < n; ++t)
                if (out[k * n + t]) out[s * n + t] = 1;
        break;
      }
      case ProgramKind::Test: {
        const auto& a = ext(r->test);
        for (int s = 0; s < n; ++s) out[s * n + s] = a[s];
        break;
      }
    }
    return programs[r] = std::move(out);
  }
};

ModelChecker::ModelChecker(const Kripke& m) : impl_(new Impl(m)) {}
ModelChecker::~ModelChecker() { delete impl_; }
const std::vector<char>& ModelChecker::extension(Formula f) { return impl_->ext(f); }
const std::vector<char>& ModelChecker::relation(Program r) { return impl_->rel(r); }

std::set<int> model_check(const Kripke& m, Formula f) {
  ModelChecker mc(m);
  const auto& e = mc.extension(f);
  std::set<int> out;
  for (int s = 0; s < m.size(); ++s)
    if (e[s]) out.insert(s);
  return out;
}

bool holds(const Kripke& m, int state, Formula f) {
  ModelChecker mc(m);
  return mc.holds(state, f);
}

std::set<std::pair<int, int>> eval_program(const Kripke& m, Program r) {
  ModelChecker mc(m);
  const auto& e = mc.relation(r);
  std::set<std::pair<int, int>> out;
  const int n = m.size();
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t)
      if (e[s * n + t]) out.insert({s, t});
  return out;
}

// ---------------------------------------------------------------------------
// Closure operations

std::vector<Formula> fl_closure(const std::vector<Formula>& roots) {
  std::vector<Formula> order;
  std::unordered_set<Formula> seen;
  std::size_t next = 0;
  auto add = [&](Formula f) {
    if (seen.insert(f).second) order.push_back(f);
    Formula g = neg(f);
    if (seen.insert(g).second) order.push_back(g);
  };
  for (Formula r : roots) add(r);
  while (next < order.size()) {
    Formula f = order[next++];
    switch (f->kind) {
      case FormulaKind::True:
      case FormulaKind::Atom: break;
      case FormulaKind::Not: add(f->left); break;
      case FormulaKind::And:
        add(f->left);
        add(f->right);
        break;
      case FormulaKind::AtMost: add(f->left); break;
      case FormulaKind::Dia: {
        Program r = f->program;
        Formula body = f->left;
        switch (r->kind) {
          case ProgramKind::Atomic: add(body); break;
          case ProgramKind::Seq: add(dia(r->left, dia(r->right, body))); break;
          case ProgramKind::Union:
            add(dia(r->left, body));
            add(dia(r->right, body));
            break;
          case ProgramKind::Star:
            add(body);
            add(dia(r->left, f));
            break;
          case ProgramKind::Test:
            add(r->test);
            add(body);
            break;
        }
        break;
      }
    }
  }
  return order;
}

std::vector<Formula> fl_closure(Formula f) { return fl_closure(std::vector<Formula>{f}); }

std::vector<Program> prefixes(Program r) {
  std::vector<Program> out;
  auto add = [&](Program p) {
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  };
  switch (r->kind) {
    case ProgramKind::Atomic: add(skip()); break;
    case ProgramKind::Seq:
      for (Program p : prefixes(r->left)) add(p);
      for (Program p : prefixes(r->right)) add(seq(r->left, p));
      break;
    case ProgramKind::Union:
      for (Program p : prefixes(r->left)) add(p);
      for (Program p : prefixes(r->right)) add(p);
      break;
    case ProgramKind::Star:
      add(skip());
      for (Program p : prefixes(r->left)) add(seq(r, p));
      break;
    case ProgramKind::Test:
      add(skip());
      add(r);
      break;
  }
  return out;
}

Program bar(Program r, const std::vector<std::string>& names) {
  switch (r->kind) {
    case ProgramKind::Atomic: {
      std::vector<Formula> none;
      for (const auto& n : names) none.push_back(neg(atom(n)));
      return seq(r, test(conj(none)));
    }
    case ProgramKind::Seq: return seq(bar(r->left, names), bar(r->right, names));
    case ProgramKind::Union: return alt(bar(r->left, names), bar(r->right, names));
    case ProgramKind::Star: return star(bar(r->left, names));
    case ProgramKind::Test: return r;
  }
  return r;
}

}  // namespace dlrq::pdl
