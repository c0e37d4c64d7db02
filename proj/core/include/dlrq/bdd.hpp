#pragma once

// Reduced ordered binary decision diagrams with reference-counted handles,
// a shared unique table and a lossy operation cache. Variable order is the
// variable index. Garbage is collected between top-level operations once the
// node count passes a threshold; nodes referenced by live handles survive.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dlrq::bdd {

class Manager;

class Bdd {
 public:
  Bdd() = default;
  Bdd(const Bdd& o);
  Bdd(Bdd&& o) noexcept;
  Bdd& operator=(const Bdd& o);
  Bdd& operator=(Bdd&& o) noexcept;
  ~Bdd();

  bool is_zero() const { return id_ == 0; }
  bool is_one() const { return id_ == 1; }
  bool valid() const { return mgr_ != nullptr; }
  int id() const { return id_; }
  Manager* manager() const { return mgr_; }

  Bdd operator&(const Bdd& o) const;
  Bdd operator|(const Bdd& o) const;
  Bdd operator^(const Bdd& o) const;
  Bdd operator!() const;
  Bdd& operator&=(const Bdd& o) { return *this = *this & o; }
  Bdd& operator|=(const Bdd& o) { return *this = *this | o; }
  bool operator==(const Bdd& o) const { return id_ == o.id_ && mgr_ == o.mgr_; }
  bool operator!=(const Bdd& o) const { return !(*this == o); }
  /// Implication test without building the implication.
  bool implies(const Bdd& o) const;

 private:
  friend class Manager;
  Bdd(Manager* m, int id);
  Manager* mgr_ = nullptr;
  int id_ = 0;
};

struct ManagerStats {
  std::size_t peak_nodes = 0;
  std::size_t gc_runs = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_lookups = 0;
};

class Manager {
 public:
  explicit Manager(int vars = 0, int cache_log2 = 18);
  ~Manager();
  Manager(const Manager&) = delete;
  Manager& operator=(const Manager&) = delete;

  int new_var();
  int num_vars() const { return vars_; }

  Bdd zero();
  Bdd one();
  Bdd var(int v);
  Bdd nvar(int v);
  Bdd ite(const Bdd& f, const Bdd& g, const Bdd& h);
  /// Conjunction of the positive literals of `vars`.
  Bdd cube(const std::vector<int>& vars);
  Bdd exists(const Bdd& f, const Bdd& cube);
  Bdd forall(const Bdd& f, const Bdd& cube);
  /// exists cube. (f and g), without building the conjunction.
  Bdd and_exists(const Bdd& f, const Bdd& g, const Bdd& cube);
  /// Renames variable v to map[v]; the map must be injective on the support
  /// of f. Any order change is allowed.
  Bdd rename(const Bdd& f, const std::vector<int>& map);
  /// Cofactor: fixes variable v to `value`.
  Bdd restrict(const Bdd& f, int v, bool value);

  /// Number of satisfying assignments over variables 0..nvars-1, which must
  /// include the support of f.
  double sat_count(const Bdd& f, int nvars);
  /// One satisfying assignment, smallest in the order 0 < 1 per variable,
  /// as values for 0..num_vars()-1 (unconstrained variables are 0). Empty if
  /// f is false.
  std::vector<char> pick(const Bdd& f);
  std::vector<int> support(const Bdd& f);
  /// Value of f under an assignment to 0..num_vars()-1.
  bool eval(const Bdd& f, const std::vector<char>& assignment) const;
  std::size_t node_count(const Bdd& f);
  std::size_t live_nodes() const;
  const ManagerStats& stats() const { return stats_; }

  /// Collects unreferenced nodes now.
  void gc();

 private:
  friend class Bdd;
  struct Node {
    int var;
    int lo;
    int hi;
    int next;  // unique-table chain or free list
  };
  struct CacheEntry {
    int op = -1;
    int a = 0, b = 0, c = 0;
    int result = 0;
  };

  int make(int v, int lo, int hi);
  int top_var(int f) const { return nodes_[f].var; }
  int apply_and(int f, int g);
  int apply_or(int f, int g);
  int apply_xor(int f, int g);
  int apply_not(int f);
  int apply_ite(int f, int g, int h);
  int apply_exists(int f, int cube);
  int apply_and_exists(int f, int g, int cube);
  int apply_rename(int f, const std::vector<int>& map, int tag);
  int apply_restrict(int f, int v, bool value);
  bool apply_implies(int f, int g);
  bool cache_find(int op, int a, int b, int c, int& result);
  void cache_store(int op, int a, int b, int c, int result);
  void maybe_gc();
  void rehash(std::size_t buckets);
  void ref(int id);
  void deref(int id);
  Bdd wrap(int id) { return Bdd(this, id); }

  int vars_ = 0;
  std::vector<Node> nodes_;
  std::vector<int> refs_;
  std::vector<int> buckets_;
  int free_ = -1;
  std::size_t live_ = 2;
  std::size_t gc_threshold_ = 1 << 20;
  std::vector<CacheEntry> cache_;
  std::vector<std::vector<int>> rename_maps_;
  ManagerStats stats_;
};

}  // namespace dlrq::bdd
