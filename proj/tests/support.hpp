#pragma once

// Shared fixtures and random generators for the test suites.

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "dlrq/dlr.hpp"

namespace dlrq::fixtures {

inline std::string read_corpus(const std::string& name) {
  std::ifstream in(std::string(DLRQ_CORPUS_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing corpus file " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Random well-typed expressions over a fixed small signature.
class ExprGen {
 public:
  explicit ExprGen(std::uint32_t seed, dlr::Signature sig) : rng_(seed), sig_(std::move(sig)) {}

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return pick(0, 1) == 1; }
  std::mt19937& rng() { return rng_; }
  const dlr::Signature& signature() const { return sig_; }

  dlr::Concept concept_expr(int depth) {
    int choice = depth <= 0 ? pick(0, 1) : pick(0, 6);
    switch (choice) {
      case 0: return dlr::top1();
      case 1: {
        if (sig_.concepts.empty()) return dlr::top1();
        auto it = sig_.concepts.begin();
        std::advance(it, pick(0, static_cast<int>(sig_.concepts.size()) - 1));
        return dlr::atomic_concept(*it);
      }
      case 2: return dlr::negate(concept_expr(depth - 1));
      case 3: return dlr::conjoin(concept_expr(depth - 1), concept_expr(depth - 1));
      case 4: return dlr::some(path_expr(depth - 1), concept_expr(depth - 1));
      case 5: {
        auto r = relation_expr(depth - 1, pick_arity());
        return dlr::some_rel(pick(1, r->arity), r);
      }
      default: {
        auto r = relation_expr(depth - 1, pick_arity());
        return dlr::at_most(pick(0, 2), pick(1, r->arity), r);
      }
    }
  }

  dlr::Relation relation_expr(int depth, int arity) {
    std::vector<std::string> names;
    for (const auto& [n, a] : sig_.relations)
      if (a == arity) names.push_back(n);
    int choice = depth <= 0 ? pick(0, 1) : pick(0, 4);
    switch (choice) {
      case 0: return dlr::top_n(arity);
      case 1:
        if (names.empty()) return dlr::top_n(arity);
        return dlr::atomic_relation(names[pick(0, static_cast<int>(names.size()) - 1)], arity);
      case 2: return dlr::select(pick(1, arity), arity, concept_expr(depth - 1));
      case 3: return dlr::negate(relation_expr(depth - 1, arity));
      default: return dlr::conjoin(relation_expr(depth - 1, arity), relation_expr(depth - 1, arity));
    }
  }

  dlr::Path path_expr(int depth) {
    int choice = depth <= 0 ? pick(0, 1) : pick(0, 4);
    switch (choice) {
      case 0: return dlr::epsilon();
      case 1: {
        auto r = relation_expr(depth - 1, pick_arity());
        return dlr::proj(r, pick(1, r->arity), pick(1, r->arity));
      }
      case 2: return dlr::compose(path_expr(depth - 1), path_expr(depth - 1));
      case 3: return dlr::unite(path_expr(depth - 1), path_expr(depth - 1));
      default: return dlr::star(path_expr(depth - 1));
    }
  }

  int pick_arity() { return pick(2, sig_.n_max()); }

 private:
  std::mt19937 rng_;
  dlr::Signature sig_;
};

inline dlr::Signature small_signature() {
  dlr::Signature sig;
  sig.concepts = {"A", "B"};
  sig.relations = {{"P", 2}, {"R", 3}};
  return sig;
}

}  // namespace dlrq::fixtures
