#include "dlrq/finite_model.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <unordered_map>

namespace dlrq::fm {

using namespace dlr;

const TupleSet& Interpretation::top_ext(int arity) const {
  static const TupleSet empty;
  auto it = top.find(arity);
  return it == top.end() ? empty : it->second;
}

const ElementSet& Interpretation::concept_ext(const std::string& name) const {
  static const ElementSet empty;
  auto it = concepts.find(name);
  return it == concepts.end() ? empty : it->second;
}

const TupleSet& Interpretation::relation_ext(const std::string& name) const {
  static const TupleSet empty;
  auto it = relations.find(name);
  return it == relations.end() ? empty : it->second;
}

Diagnostics validate(const Interpretation& I) {
  Diagnostics d;
  auto in_range = [&](Element e) { return e >= 0 && e < I.domain_size; };
  if (I.domain_size < 0) d.push_back("negative domain size");
  for (const auto& [arity, ts] : I.top)
    for (const auto& t : ts) {
      if (static_cast<int>(t.size()) != arity) d.push_back("top tuple of wrong length for arity " + std::to_string(arity));
      if (!std::all_of(t.begin(), t.end(), in_range)) d.push_back("top tuple outside the domain");
    }
  for (const auto& [name, es] : I.concepts)
    for (auto e : es)
      if (!in_range(e)) d.push_back("element " + std::to_string(e) + " of concept '" + name + "' outside the domain");
  for (const auto& [name, ts] : I.relations) {
    std::size_t len = ts.empty() ? 0 : ts.begin()->size();
    for (const auto& t : ts) {
      if (t.size() != len) d.push_back("relation '" + name + "' has tuples of different lengths");
      if (!I.top_ext(static_cast<int>(t.size())).count(t))
        d.push_back("tuple of relation '" + name + "' not in the top relation of its arity");
    }
  }
  std::set<Element> images;
  for (const auto& [name, e] : I.constants) {
    if (!in_range(e)) d.push_back("constant '" + name + "' mapped outside the domain");
    if (!images.insert(e).second) d.push_back("constant map is not injective at '" + name + "'");
  }
  return d;
}

void require_valid(const Interpretation& I) {
  auto d = validate(I);
  if (!d.empty()) throw std::invalid_argument("invalid interpretation: " + d.front());
}

namespace {

using Bits = std::vector<char>;

// Dense form: element sets as flags over the domain, n-ary tuple sets as flags
// over domain^n indexed by base-|domain| code.
struct Dense {
  int n = 0;
  std::map<int, Bits> top;
  std::unordered_map<std::string, Bits> concepts;
  std::unordered_map<std::string, Bits> relations;
  std::map<std::string, Element> constants;

  std::size_t size(int arity) const {
    std::size_t s = 1;
    for (int i = 0; i < arity; ++i) s *= static_cast<std::size_t>(n);
    return s;
  }
  std::size_t encode(const Tuple& t) const {
    std::size_t c = 0;
    for (auto e : t) c = c * n + static_cast<std::size_t>(e);
    return c;
  }
  Tuple decode(std::size_t code, int arity) const {
    Tuple t(arity);
    for (int i = arity - 1; i >= 0; --i) {
      t[i] = static_cast<Element>(code % n);
      code /= n;
    }
    return t;
  }
  // 1-based component i of a tuple code of the given arity.
  Element component(std::size_t code, int arity, int i) const {
    for (int k = arity; k > i; --k) code /= n;
    return static_cast<Element>(code % n);
  }
  Bits top_bits(int arity) const {
    auto it = top.find(arity);
    return it == top.end() ? Bits(size(arity), 0) : it->second;
  }
};

Dense densify(const Interpretation& I) {
  Dense D;
  D.n = I.domain_size;
  for (const auto& [arity, ts] : I.top) {
    Bits b(D.size(arity), 0);
    for (const auto& t : ts) b[D.encode(t)] = 1;
    D.top[arity] = std::move(b);
  }
  for (const auto& [name, es] : I.concepts) {
    Bits b(D.n, 0);
    for (auto e : es) b[e] = 1;
    D.concepts[name] = std::move(b);
  }
  for (const auto& [name, ts] : I.relations) {
    if (ts.empty()) continue;
    int arity = static_cast<int>(ts.begin()->size());
    Bits b(D.size(arity), 0);
    for (const auto& t : ts) b[D.encode(t)] = 1;
    D.relations[name] = std::move(b);
  }
  D.constants = I.constants;
  return D;
}

class Evaluator {
 public:
  explicit Evaluator(const Dense& d) : D(d) {}

  Bits concept_bits(const Concept& c) const {
    const int n = D.n;
    switch (c->kind) {
      case ConceptKind::Top: return Bits(n, 1);
      case ConceptKind::Atomic: {
        auto it = D.concepts.find(c->name);
        return it == D.concepts.end() ? Bits(n, 0) : it->second;
      }
      case ConceptKind::Not: {
        Bits b = concept_bits(c->left);
        for (auto& x : b) x = !x;
        return b;
      }
      case ConceptKind::And: {
        Bits a = concept_bits(c->left), b = concept_bits(c->right);
        for (int i = 0; i < n; ++i) a[i] = a[i] && b[i];
        return a;
      }
      case ConceptKind::SomePath: {
        Bits m = path(c->path), f = concept_bits(c->left), out(n, 0);
        for (int x = 0; x < n; ++x)
          for (int y = 0; y < n && !out[x]; ++y)
            if (m[x * n + y] && f[y]) out[x] = 1;
        return out;
      }
      case ConceptKind::SomeRel:
      case ConceptKind::AtMost: {
        const int arity = c->relation->arity;
        Bits r = relation(c->relation);
        std::vector<int> count(n, 0);
        for (std::size_t code = 0; code < r.size(); ++code)
          if (r[code]) ++count[D.component(code, arity, c->component)];
        Bits out(n, 0);
        for (int x = 0; x < n; ++x)
          out[x] = c->kind == ConceptKind::SomeRel ? count[x] > 0 : count[x] <= c->count;
        return out;
      }
    }
    return Bits(n, 0);
  }

  Bits relation(const Relation& r) const {
    const int arity = r->arity;
    switch (r->kind) {
      case RelationKind::Top: return D.top_bits(arity);
      case RelationKind::Atomic: {
        auto it = D.relations.find(r->name);
        if (it == D.relations.end() || it->second.size() != D.size(arity)) return Bits(D.size(arity), 0);
        return it->second;
      }
      case RelationKind::Select: {
        Bits t = D.top_bits(arity), f = concept_bits(r->filler);
        for (std::size_t code = 0; code < t.size(); ++code)
          if (t[code] && !f[D.component(code, arity, r->component)]) t[code] = 0;
        return t;
      }
      case RelationKind::Not: {
        Bits t = D.top_bits(arity), b = relation(r->left);
        for (std::size_t code = 0; code < t.size(); ++code) t[code] = t[code] && !b[code];
        return t;
      }
      case RelationKind::And: {
        Bits a = relation(r->left), b = relation(r->right);
        for (std::size_t code = 0; code < a.size(); ++code) a[code] = a[code] && b[code];
        return a;
      }
    }
    return Bits(D.size(arity), 0);
  }

  // Row-major n x n adjacency matrix.
  Bits path(const Path& e) const {
    const int n = D.n;
    switch (e->kind) {
      case PathKind::Epsilon: {
        Bits m(n * n, 0);
        for (int x = 0; x < n; ++x) m[x * n + x] = 1;
        return m;
      }
      case PathKind::Proj: {
        const int arity = e->relation->arity;
        Bits r = relation(e->relation), m(n * n, 0);
        for (std::size_t code = 0; code < r.size(); ++code)
          if (r[code]) m[D.component(code, arity, e->from) * n + D.component(code, arity, e->to)] = 1;
        return m;
      }
      case PathKind::Comp: {
        Bits a = path(e->left), b = path(e->right), m(n * n, 0);
        for (int x = 0; x < n; ++x)
          for (int y = 0; y < n; ++y)
            if (a[x * n + y])
              for (int z = 0; z < n; ++z)
                if (b[y * n + z]) m[x * n + z] = 1;
        return m;
      }
      case PathKind::Union: {
        Bits a = path(e->left), b = path(e->right);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] || b[i];
        return a;
      }
      case PathKind::Star: {
        Bits m = path(e->left);
        for (int x = 0; x < n; ++x) m[x * n + x] = 1;
        for (int k = 0; k < n; ++k)
          for (int x = 0; x < n; ++x)
            if (m[x * n + k])
              for (int y = 0; y < n; ++y)
                if (m[k * n + y]) m[x * n + y] = 1;
        return m;
      }
    }
    return Bits(n * n, 0);
  }

  bool subsumed(const Bits& a, const Bits& b) const {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] && !b[i]) return false;
    return true;
  }

  bool model_of(const Schema& s) const {
    for (const auto& ci : s.concept_inclusions)
      if (!subsumed(concept_bits(ci.lhs), concept_bits(ci.rhs))) return false;
    for (const auto& ri : s.relation_inclusions)
      if (!subsumed(relation(ri.lhs), relation(ri.rhs))) return false;
    return true;
  }

  Element constant(const std::string& name) const {
    auto it = D.constants.find(name);
    if (it == D.constants.end()) throw std::invalid_argument("constant '" + name + "' has no denotation");
    return it->second;
  }

  TupleSet query(const Query& q) const {
    TupleSet out;
    for (const auto& conj : q.disjuncts) join(q, conj, out);
    return out;
  }

 private:
  struct Prepared {
    const Atom* atom;
    Bits concept_ext;
    std::vector<Tuple> tuples;
  };

  void join(const Query& q, const Conjunction& conj, TupleSet& out) const {
    std::vector<Prepared> atoms;
    for (const auto& a : conj) {
      Prepared p{&a, {}, {}};
      if (a.is_concept()) {
        p.concept_ext = concept_bits(a.filler);
      } else {
        Bits r = relation(a.relation);
        for (std::size_t code = 0; code < r.size(); ++code)
          if (r[code]) p.tuples.push_back(D.decode(code, a.relation->arity));
      }
      atoms.push_back(std::move(p));
    }
    std::map<std::string, Element> binding;
    std::function<void(std::size_t)> step = [&](std::size_t i) {
      if (i == atoms.size()) {
        Tuple t;
        for (const auto& h : q.head) t.push_back(binding.at(h));
        out.insert(std::move(t));
        return;
      }
      const auto& p = atoms[i];
      const auto& terms = p.atom->terms;
      auto value = [&](const Term& t, Element& v) {
        if (t.is_const()) {
          v = constant(t.name);
          return true;
        }
        auto it = binding.find(label(t));
        if (it == binding.end()) return false;
        v = it->second;
        return true;
      };
      if (p.atom->is_concept()) {
        Element v;
        if (value(terms[0], v)) {
          if (p.concept_ext[v]) step(i + 1);
          return;
        }
        const auto key = label(terms[0]);
        for (Element e = 0; e < D.n; ++e)
          if (p.concept_ext[e]) {
            binding[key] = e;
            step(i + 1);
          }
        binding.erase(key);
        return;
      }
      for (const auto& tup : p.tuples) {
        std::vector<std::string> bound_here;
        bool ok = true;
        for (std::size_t k = 0; k < terms.size() && ok; ++k) {
          Element v;
          if (value(terms[k], v)) {
            ok = v == tup[k];
          } else {
            auto key = label(terms[k]);
            binding[key] = tup[k];
            bound_here.push_back(key);
          }
        }
        if (ok) step(i + 1);
        for (const auto& key : bound_here) binding.erase(key);
      }
    };
    step(0);
  }

  const Dense& D;
};

ElementSet to_elements(const Bits& b) {
  ElementSet s;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i]) s.insert(static_cast<Element>(i));
  return s;
}

TupleSet to_tuples(const Dense& D, const Bits& b, int arity) {
  TupleSet s;
  for (std::size_t code = 0; code < b.size(); ++code)
    if (b[code]) s.insert(D.decode(code, arity));
  return s;
}

}  // namespace

ElementSet eval_concept(const Interpretation& I, const Concept& c) {
  Dense D = densify(I);
  return to_elements(Evaluator(D).concept_bits(c));
}

TupleSet eval_relation(const Interpretation& I, const Relation& r) {
  Dense D = densify(I);
  return to_tuples(D, Evaluator(D).relation(r), r->arity);
}

PairSet eval_path(const Interpretation& I, const Path& e) {
  Dense D = densify(I);
  Bits m = Evaluator(D).path(e);
  PairSet out;
  for (int x = 0; x < D.n; ++x)
    for (int y = 0; y < D.n; ++y)
      if (m[x * D.n + y]) out.emplace(x, y);
  return out;
}

bool is_model(const Interpretation& I, const Schema& s) {
  Dense D = densify(I);
  return Evaluator(D).model_of(s);
}

bool satisfies_db(const Interpretation& I, const IncompleteDatabase& db) {
  Dense D = densify(I);
  Evaluator ev(D);
  for (const auto& f : db.facts) {
    Tuple t;
    for (const auto& term : f.terms) t.push_back(ev.constant(term.name));
    if (f.is_concept()) {
      if (!ev.concept_bits(f.filler)[t[0]]) return false;
    } else if (!ev.relation(f.relation)[D.encode(t)]) {
      return false;
    }
  }
  return true;
}

TupleSet eval_query(const Interpretation& I, const Query& q) {
  Dense D = densify(I);
  return Evaluator(D).query(q);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string tuple_sexpr(const Tuple& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? " " : "") + std::to_string(t[i]);
  return s + ")";
}

}  // namespace

std::string to_sexpr(const Interpretation& I) {
  std::string out = "(interpretation\n  (domain " + std::to_string(I.domain_size) + ")";
  for (const auto& [arity, ts] : I.top) {
    out += "\n  (top " + std::to_string(arity);
    for (const auto& t : ts) out += " " + tuple_sexpr(t);
    out += ")";
  }
  for (const auto& [name, es] : I.concepts) {
    out += "\n  (concept " + name;
    for (auto e : es) out += " " + std::to_string(e);
    out += ")";
  }
  for (const auto& [name, ts] : I.relations) {
    out += "\n  (relation " + name;
    for (const auto& t : ts) out += " " + tuple_sexpr(t);
    out += ")";
  }
  for (const auto& [name, e] : I.constants) out += "\n  (const " + name + " " + std::to_string(e) + ")";
  return out + ")\n";
}

Interpretation parse_interpretation(std::string_view text) {
  SExpr doc = parse_sexpr(text);
  if (!doc.has_head("interpretation")) doc.fail("expected (interpretation ...)");
  Interpretation I;
  auto tuple = [](const SExpr& e) {
    if (!e.is_list) e.fail("expected a tuple");
    Tuple t;
    for (const auto& x : e.items) t.push_back(x.as_int());
    return t;
  };
  for (std::size_t i = 1; i < doc.size(); ++i) {
    const auto& f = doc[i];
    if (f.has_head("domain") && f.size() == 2) {
      I.domain_size = f[1].as_int();
    } else if (f.has_head("top") && f.size() >= 2) {
      auto& ts = I.top[f[1].as_int()];
      for (std::size_t k = 2; k < f.size(); ++k) ts.insert(tuple(f[k]));
    } else if (f.has_head("concept") && f.size() >= 2) {
      auto& es = I.concepts[f[1].as_symbol()];
      for (std::size_t k = 2; k < f.size(); ++k) es.insert(f[k].as_int());
    } else if (f.has_head("relation") && f.size() >= 2) {
      auto& ts = I.relations[f[1].as_symbol()];
      for (std::size_t k = 2; k < f.size(); ++k) ts.insert(tuple(f[k]));
    } else if (f.has_head("const") && f.size() == 3) {
      I.constants[f[1].as_symbol()] = f[2].as_int();
    } else {
      f.fail("unknown interpretation form");
    }
  }
  auto d = validate(I);
  if (!d.empty()) doc.fail(d.front());
  return I;
}

// ---------------------------------------------------------------------------
// Bounded counterexample search

namespace {

void collect_arities(const Concept& c, std::set<int>& out);
void collect_arities(const Relation& r, std::set<int>& out) {
  out.insert(r->arity);
  if (r->filler) collect_arities(r->filler, out);
  if (r->left) collect_arities(r->left, out);
  if (r->right) collect_arities(r->right, out);
}
void collect_arities(const Path& p, std::set<int>& out) {
  if (p->relation) collect_arities(p->relation, out);
  if (p->left) collect_arities(p->left, out);
  if (p->right) collect_arities(p->right, out);
}
void collect_arities(const Concept& c, std::set<int>& out) {
  if (c->relation) collect_arities(c->relation, out);
  if (c->path) collect_arities(c->path, out);
  if (c->left) collect_arities(c->left, out);
  if (c->right) collect_arities(c->right, out);
}

struct Vocabulary {
  std::vector<std::string> concepts;
  std::map<int, std::vector<std::string>> relations;  // by arity
  std::set<int> arities;
  std::vector<std::string> constants;
};

Vocabulary vocabulary(const Schema& s, const Query& q, const Query& q2) {
  std::set<std::string> concepts = s.signature.concepts;
  std::map<std::string, int> relations = s.signature.relations;
  std::set<int> arities;
  std::set<std::string> constants;
  for (const auto& ci : s.concept_inclusions) {
    collect_arities(ci.lhs, arities);
    collect_arities(ci.rhs, arities);
  }
  for (const auto& ri : s.relation_inclusions) {
    collect_arities(ri.lhs, arities);
    collect_arities(ri.rhs, arities);
  }
  for (const Query* query : {&q, &q2})
    for (const auto& conj : query->disjuncts)
      for (const auto& a : conj) {
        if (a.is_concept()) {
          collect_names(a.filler, concepts, relations);
          collect_arities(a.filler, arities);
        } else {
          collect_names(a.relation, concepts, relations);
          collect_arities(a.relation, arities);
        }
        for (const auto& t : a.terms)
          if (t.is_const()) constants.insert(t.name);
      }
  Vocabulary v;
  v.concepts.assign(concepts.begin(), concepts.end());
  for (const auto& [name, arity] : relations) {
    v.relations[arity].push_back(name);
    arities.insert(arity);
  }
  v.arities = arities;
  v.constants.assign(constants.begin(), constants.end());
  return v;
}

// Iterates over the structures of one domain size. A structure is a code
// vector: one concept mask per element followed by one label per candidate
// tuple (0 = outside the top relation, 1 + m = inside with relation mask m).
class StructureSearch {
 public:
  StructureSearch(const Vocabulary& v, int n) : voc_(v), n_(n) {
    dense_.n = n;
    for (int arity : v.arities) {
      std::size_t count = dense_.size(arity);
      for (std::size_t code = 0; code < count; ++code) universe_.push_back({arity, code});
      auto it = v.relations.find(arity);
      rel_count_[arity] = it == v.relations.end() ? 0 : static_cast<int>(it->second.size());
    }
    for (std::size_t i = 0; i < v.constants.size(); ++i) dense_.constants[v.constants[i]] = static_cast<Element>(i);
    build_permutations();
  }

  // Calls visit(dense) for every canonical structure, in order of top size.
  // visit returns false to stop; returns false if stopped.
  template <class Visit>
  bool run(Visit&& visit) {
    const std::size_t u = universe_.size();
    const int concept_masks = 1 << voc_.concepts.size();
    for (std::size_t s = 0; s <= u; ++s) {
      std::vector<std::size_t> chosen(s);
      std::iota(chosen.begin(), chosen.end(), 0);
      for (;;) {
        std::vector<int> limits;
        for (int e = 0; e < n_; ++e) limits.push_back(concept_masks);
        for (auto idx : chosen) limits.push_back(1 << rel_count_[universe_[idx].arity]);
        std::vector<int> digits(limits.size(), 0);
        for (;;) {
          fill_code(chosen, digits);
          if (canonical()) {
            materialize();
            if (!visit(dense_)) return false;
          }
          std::size_t k = 0;
          while (k < digits.size() && ++digits[k] == limits[k]) digits[k++] = 0;
          if (k == digits.size()) break;
        }
        if (!next_combination(chosen, u)) break;
      }
    }
    return true;
  }

  Interpretation snapshot() const {
    Interpretation I;
    I.domain_size = n_;
    for (int arity : voc_.arities) I.top[arity];
    for (const auto& c : voc_.concepts) I.concepts[c];
    for (const auto& [arity, names] : voc_.relations)
      for (const auto& r : names) I.relations[r];
    for (int e = 0; e < n_; ++e)
      for (std::size_t c = 0; c < voc_.concepts.size(); ++c)
        if (code_[e] >> c & 1) I.concepts[voc_.concepts[c]].insert(e);
    for (std::size_t i = 0; i < universe_.size(); ++i) {
      int label = code_[n_ + i];
      if (!label) continue;
      auto [arity, tcode] = universe_[i];
      Tuple t = dense_.decode(tcode, arity);
      I.top[arity].insert(t);
      auto it = voc_.relations.find(arity);
      if (it != voc_.relations.end())
        for (std::size_t r = 0; r < it->second.size(); ++r)
          if ((label - 1) >> r & 1) I.relations[it->second[r]].insert(t);
    }
    I.constants = dense_.constants;
    return I;
  }

 private:
  struct Candidate {
    int arity;
    std::size_t code;
  };

  static bool next_combination(std::vector<std::size_t>& c, std::size_t u) {
    const std::size_t s = c.size();
    for (std::size_t i = s; i-- > 0;) {
      if (c[i] < u - s + i) {
        ++c[i];
        for (std::size_t j = i + 1; j < s; ++j) c[j] = c[j - 1] + 1;
        return true;
      }
    }
    return false;
  }

  void fill_code(const std::vector<std::size_t>& chosen, const std::vector<int>& digits) {
    code_.assign(n_ + universe_.size(), 0);
    for (int e = 0; e < n_; ++e) code_[e] = digits[e];
    for (std::size_t k = 0; k < chosen.size(); ++k) code_[n_ + chosen[k]] = 1 + digits[n_ + k];
  }

  // Position maps for every non-identity permutation of the free elements:
  // the permuted code at position p equals code[map[p]].
  void build_permutations() {
    const int pinned = static_cast<int>(voc_.constants.size());
    std::vector<int> perm(n_);
    std::iota(perm.begin(), perm.end(), 0);
    std::map<int, std::size_t> offset;
    std::size_t off = n_;
    for (int arity : voc_.arities) {
      offset[arity] = off;
      off += dense_.size(arity);
    }
    while (std::next_permutation(perm.begin() + std::min(pinned, n_), perm.end())) {
      std::vector<int> inv(n_);
      for (int e = 0; e < n_; ++e) inv[perm[e]] = e;
      std::vector<std::size_t> map(off);
      for (int e = 0; e < n_; ++e) map[e] = inv[e];
      for (std::size_t i = 0; i < universe_.size(); ++i) {
        auto [arity, tcode] = universe_[i];
        Tuple t = dense_.decode(tcode, arity);
        for (auto& x : t) x = inv[x];
        map[n_ + i] = offset[arity] + dense_.encode(t);
      }
      perms_.push_back(std::move(map));
    }
  }

  bool canonical() const {
    for (const auto& map : perms_)
      for (std::size_t p = 0; p < code_.size(); ++p) {
        int v = code_[map[p]];
        if (v < code_[p]) return false;
        if (v > code_[p]) break;
      }
    return true;
  }

  void materialize() {
    for (int arity : voc_.arities) dense_.top[arity].assign(dense_.size(arity), 0);
    for (const auto& [arity, names] : voc_.relations)
      for (const auto& r : names) dense_.relations[r].assign(dense_.size(arity), 0);
    for (std::size_t c = 0; c < voc_.concepts.size(); ++c) {
      auto& b = dense_.concepts[voc_.concepts[c]];
      b.assign(n_, 0);
      for (int e = 0; e < n_; ++e) b[e] = code_[e] >> c & 1;
    }
    for (std::size_t i = 0; i < universe_.size(); ++i) {
      int label = code_[n_ + i];
      if (!label) continue;
      auto [arity, tcode] = universe_[i];
      dense_.top[arity][tcode] = 1;
      auto it = voc_.relations.find(arity);
      if (it != voc_.relations.end())
        for (std::size_t r = 0; r < it->second.size(); ++r)
          if ((label - 1) >> r & 1) dense_.relations[it->second[r]][tcode] = 1;
    }
  }

  const Vocabulary& voc_;
  int n_;
  Dense dense_;
  std::vector<Candidate> universe_;
  std::map<int, int> rel_count_;
  std::vector<std::vector<std::size_t>> perms_;
  std::vector<int> code_;
};

}  // namespace

OracleResult find_containment_counterexample(const Schema& s, const Query& q, const Query& q2,
                                             const OracleOptions& options) {
  if (q.arity() != q2.arity()) throw std::invalid_argument("queries of different arity");
  if (options.bound < 1) throw std::invalid_argument("oracle bound must be at least 1");
  const auto start = std::chrono::steady_clock::now();
  Vocabulary voc = vocabulary(s, q, q2);
  OracleResult result;
  result.bound = options.bound;
  const int first = std::max<int>(1, static_cast<int>(voc.constants.size()));
  for (int n = first; n <= options.bound; ++n) {
    StructureSearch search(voc, n);
    bool found = false;
    search.run([&](const Dense& D) {
      ++result.structures_checked;
      if ((result.structures_checked & 0xfff) == 0) {
        if (result.structures_checked > options.max_structures)
          throw OracleResourceError("oracle structure budget exhausted at domain size " + std::to_string(n), n,
                                    result.structures_checked);
        if (options.time_limit.count() > 0 && std::chrono::steady_clock::now() - start > options.time_limit)
          throw OracleResourceError("oracle time budget exhausted at domain size " + std::to_string(n), n,
                                    result.structures_checked);
      }
      Evaluator ev(D);
      if (!ev.model_of(s)) return true;
      ++result.models_seen;
      TupleSet lhs = ev.query(q);
      if (lhs.empty()) return true;
      TupleSet rhs = ev.query(q2);
      for (const auto& t : lhs)
        if (!rhs.count(t)) {
          result.tuple = t;
          found = true;
          return false;
        }
      return true;
    });
    if (found) {
      Interpretation I = search.snapshot();
      require_valid(I);
      if (!is_model(I, s) || !eval_query(I, q).count(result.tuple) || eval_query(I, q2).count(result.tuple))
        throw std::logic_error("oracle counterexample failed re-verification");
      result.outcome = OracleResult::Outcome::Counterexample;
      result.model = std::move(I);
      return result;
    }
  }
  return result;
}

}  // namespace dlrq::fm
