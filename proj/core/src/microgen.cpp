#include "dlrq/microgen.hpp"

#include <algorithm>
#include <random>

namespace dlrq::gen {

namespace {

class Draw {
 public:
  Draw(std::uint64_t seed, const MicroConfig& c) : rng_(seed), c_(c) {
    for (int i = 0; i < c.concepts; ++i) concepts_.push_back(std::string(1, static_cast<char>('A' + i)));
    const char* rel[] = {"P", "R", "S", "T"};
    for (int i = 0; i < std::min(c.relations, 4); ++i) relations_.push_back(rel[i]);
  }

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(int percent) { return pick(1, 100) <= percent; }

  dlr::Signature signature() const {
    dlr::Signature s;
    for (const auto& c : concepts_) s.concepts.insert(c);
    for (const auto& r : relations_) s.relations[r] = 2;
    return s;
  }

  dlr::Concept atomic() { return dlr::atomic_concept(concepts_[pick(0, static_cast<int>(concepts_.size()) - 1)]); }
  dlr::Concept literal() { return chance(30) ? dlr::negate(atomic()) : atomic(); }
  dlr::Relation relation() {
    return dlr::atomic_relation(relations_[pick(0, static_cast<int>(relations_.size()) - 1)], 2);
  }

  dlr::ConceptInclusion concept_assertion() {
    dlr::Concept lhs = chance(15) ? dlr::top1() : atomic();
    dlr::Concept rhs;
    switch (pick(0, 7)) {
      case 0: rhs = atomic(); break;
      case 1: rhs = dlr::negate(atomic()); break;
      case 2: rhs = dlr::some_rel(pick(1, 2), relation()); break;
      case 3: rhs = dlr::at_most(pick(0, 1), pick(1, 2), relation()); break;
      case 4: rhs = dlr::all(dlr::proj(relation(), pick(1, 2), pick(1, 2)), literal()); break;
      case 5: rhs = dlr::some(dlr::star(dlr::proj(relation(), 1, 2)), literal()); break;
      case 6: rhs = dlr::some(dlr::proj(relation(), 1, 2), literal()); break;
      default: rhs = dlr::conjoin(literal(), literal()); break;
    }
    return {lhs, rhs};
  }

  dlr::RelationInclusion relation_assertion() {
    dlr::Relation lhs = relation();
    dlr::Relation rhs = chance(50) ? dlr::select(pick(1, 2), 2, literal()) : relation();
    return {lhs, rhs};
  }

  dlr::Conjunction body(const std::vector<std::string>& vars) {
    dlr::Conjunction out;
    const int atoms = pick(1, c_.max_atoms);
    for (int i = 0; i < atoms; ++i) {
      auto term = [&] { return dlr::Term::var(vars[pick(0, static_cast<int>(vars.size()) - 1)]); };
      if (chance(40))
        out.push_back(dlr::Atom::concept_atom(chance(20) ? dlr::negate(atomic()) : atomic(), term()));
      else
        out.push_back(dlr::Atom::relation_atom(relation(), {term(), term()}));
    }
    // Safety: the head variable must occur.
    bool has_head = false;
    for (const auto& a : out)
      for (const auto& t : a.terms) has_head = has_head || t.name == "x";
    if (!has_head) out.front().terms.front() = dlr::Term::var("x");
    return out;
  }

  std::vector<std::string> variables() {
    std::vector<std::string> vars{"x"};
    const int k = pick(0, c_.max_existentials);
    for (int i = 1; i <= k; ++i) vars.push_back("z" + std::to_string(i));
    return vars;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
  MicroConfig c_;
  std::vector<std::string> concepts_;
  std::vector<std::string> relations_;
};

dlr::Query make_query(std::string name, dlr::Conjunction body) {
  dlr::Query q;
  q.name = std::move(name);
  q.head = {"x"};
  q.disjuncts.push_back(std::move(body));
  return q;
}

}  // namespace

std::string MicroInstance::to_sexpr() const {
  return dlr::to_sexpr(schema) + dlr::to_sexpr(lhs) + "\n" + dlr::to_sexpr(rhs) + "\n";
}

MicroInstance generate_micro(std::uint64_t seed, const MicroConfig& config) {
  Draw d(seed, config);
  MicroInstance m;
  m.seed = seed;
  m.schema.signature = d.signature();
  const int assertions = d.pick(0, config.max_assertions);
  for (int i = 0; i < assertions; ++i) {
    if (d.chance(75))
      m.schema.concept_inclusions.push_back(d.concept_assertion());
    else
      m.schema.relation_inclusions.push_back(d.relation_assertion());
  }
  auto lhs_body = d.body(d.variables());
  m.lhs = make_query("q", lhs_body);
  if (d.chance(50)) {
    // Drop some atoms and rename existential variables apart.
    dlr::Conjunction rhs;
    for (const auto& a : lhs_body)
      if (rhs.empty() || d.chance(60)) rhs.push_back(a);
    for (auto& a : rhs)
      for (auto& t : a.terms)
        if (t.name != "x") t.name = "w" + t.name.substr(1);
    bool has_head = false;
    for (const auto& a : rhs)
      for (const auto& t : a.terms) has_head = has_head || t.name == "x";
    if (!has_head) rhs.front().terms.front() = dlr::Term::var("x");
    m.rhs = make_query("q2", rhs);
  } else {
    m.rhs = make_query("q2", d.body(d.variables()));
  }
  return m;
}

}  // namespace dlrq::gen
