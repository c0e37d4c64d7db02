#include "dlrq/bdd.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace dlrq::bdd {

namespace {

constexpr int kTerminalVar = INT_MAX;

enum Op { kAnd, kOr, kXor, kNot, kIte, kExists, kAndExists, kRename, kRestrict0, kRestrict1, kImplies };

std::size_t mix(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return static_cast<std::size_t>(x);
}

}  // namespace

// Handles -------------------------------------------------------------------

Bdd::Bdd(Manager* m, int id) : mgr_(m), id_(id) { mgr_->ref(id_); }
Bdd::Bdd(const Bdd& o) : mgr_(o.mgr_), id_(o.id_) {
  if (mgr_) mgr_->ref(id_);
}
Bdd::Bdd(Bdd&& o) noexcept : mgr_(o.mgr_), id_(o.id_) {
  o.mgr_ = nullptr;
  o.id_ = 0;
}
Bdd& Bdd::operator=(const Bdd& o) {
  if (this == &o) return *this;
  if (o.mgr_) o.mgr_->ref(o.id_);
  if (mgr_) mgr_->deref(id_);
  mgr_ = o.mgr_;
  id_ = o.id_;
  return *this;
}
Bdd& Bdd::operator=(Bdd&& o) noexcept {
  if (this == &o) return *this;
  if (mgr_) mgr_->deref(id_);
  mgr_ = o.mgr_;
  id_ = o.id_;
  o.mgr_ = nullptr;
  o.id_ = 0;
  return *this;
}
Bdd::~Bdd() {
  if (mgr_) mgr_->deref(id_);
}

Bdd Bdd::operator&(const Bdd& o) const {
  mgr_->maybe_gc();
  return mgr_->wrap(mgr_->apply_and(id_, o.id_));
}
Bdd Bdd::operator|(const Bdd& o) const {
  mgr_->maybe_gc();
  return mgr_->wrap(mgr_->apply_or(id_, o.id_));
}
Bdd Bdd::operator^(const Bdd& o) const {
  mgr_->maybe_gc();
  return mgr_->wrap(mgr_->apply_xor(id_, o.id_));
}
Bdd Bdd::operator!() const {
  mgr_->maybe_gc();
  return mgr_->wrap(mgr_->apply_not(id_));
}
bool Bdd::implies(const Bdd& o) const { return mgr_->apply_implies(id_, o.id_); }

// Manager -------------------------------------------------------------------

Manager::Manager(int vars, int cache_log2) {
  nodes_.push_back({kTerminalVar, 0, 0, -1});
  nodes_.push_back({kTerminalVar, 1, 1, -1});
  refs_.assign(2, 0);
  buckets_.assign(1 << 16, -1);
  cache_.resize(std::size_t{1} << cache_log2);
  for (int i = 0; i < vars; ++i) new_var();
}

Manager::~Manager() = default;

int Manager::new_var() { return vars_++; }

void Manager::ref(int id) {
  if (id > 1) ++refs_[id];
}
void Manager::deref(int id) {
  if (id > 1) --refs_[id];
}

Bdd Manager::zero() { return wrap(0); }
Bdd Manager::one() { return wrap(1); }
Bdd Manager::var(int v) {
  if (v < 0 || v >= vars_) throw std::out_of_range("bdd variable out of range");
  return wrap(make(v, 0, 1));
}
Bdd Manager::nvar(int v) {
  if (v < 0 || v >= vars_) throw std::out_of_range("bdd variable out of range");
  return wrap(make(v, 1, 0));
}

int Manager::make(int v, int lo, int hi) {
  if (lo == hi) return lo;
  const std::size_t h = mix((static_cast<std::uint64_t>(v) << 42) ^ (static_cast<std::uint64_t>(lo) << 21) ^
                            static_cast<std::uint64_t>(hi) ^ (static_cast<std::uint64_t>(hi) << 50)) &
                        (buckets_.size() - 1);
  for (int n = buckets_[h]; n != -1; n = nodes_[n].next)
    if (nodes_[n].var == v && nodes_[n].lo == lo && nodes_[n].hi == hi) return n;
  int id;
  if (free_ != -1) {
    id = free_;
    free_ = nodes_[id].next;
    nodes_[id] = {v, lo, hi, buckets_[h]};
    refs_[id] = 0;
  } else {
    id = static_cast<int>(nodes_.size());
    nodes_.push_back({v, lo, hi, buckets_[h]});
    refs_.push_back(0);
  }
  buckets_[h] = id;
  ++live_;
  stats_.peak_nodes = std::max(stats_.peak_nodes, live_);
  if (live_ > 2 * buckets_.size()) rehash(buckets_.size() * 4);
  return id;
}

void Manager::rehash(std::size_t size) {
  buckets_.assign(size, -1);
  for (std::size_t id = 2; id < nodes_.size(); ++id) {
    auto& n = nodes_[id];
    if (n.var < 0) continue;
    const std::size_t h = mix((static_cast<std::uint64_t>(n.var) << 42) ^ (static_cast<std::uint64_t>(n.lo) << 21) ^
                              static_cast<std::uint64_t>(n.hi) ^ (static_cast<std::uint64_t>(n.hi) << 50)) &
                          (size - 1);
    n.next = buckets_[h];
    buckets_[h] = static_cast<int>(id);
  }
}

bool Manager::cache_find(int op, int a, int b, int c, int& result) {
  ++stats_.cache_lookups;
  const std::size_t h = mix((static_cast<std::uint64_t>(op) << 56) ^ (static_cast<std::uint64_t>(a) << 32) ^
                            (static_cast<std::uint64_t>(b) << 12) ^ static_cast<std::uint64_t>(c) * 0x9e3779b97f4a7c15ULL) &
                        (cache_.size() - 1);
  const auto& e = cache_[h];
  if (e.op == op && e.a == a && e.b == b && e.c == c) {
    ++stats_.cache_hits;
    result = e.result;
    return true;
  }
  return false;
}

void Manager::cache_store(int op, int a, int b, int c, int result) {
  const std::size_t h = mix((static_cast<std::uint64_t>(op) << 56) ^ (static_cast<std::uint64_t>(a) << 32) ^
                            (static_cast<std::uint64_t>(b) << 12) ^ static_cast<std::uint64_t>(c) * 0x9e3779b97f4a7c15ULL) &
                        (cache_.size() - 1);
  cache_[h] = {op, a, b, c, result};
}

void Manager::maybe_gc() {
  if (live_ < gc_threshold_) return;
  gc();
  if (live_ > gc_threshold_ / 2) gc_threshold_ *= 2;
}

void Manager::gc() {
  ++stats_.gc_runs;
  std::vector<char> mark(nodes_.size(), 0);
  mark[0] = mark[1] = 1;
  std::vector<int> stack;
  for (std::size_t id = 2; id < nodes_.size(); ++id)
    if (nodes_[id].var >= 0 && refs_[id] > 0) stack.push_back(static_cast<int>(id));
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    if (mark[n]) continue;
    mark[n] = 1;
    stack.push_back(nodes_[n].lo);
    stack.push_back(nodes_[n].hi);
  }
  free_ = -1;
  live_ = 2;
  for (std::size_t id = nodes_.size(); id-- > 2;) {
    if (mark[id]) {
      ++live_;
      continue;
    }
    nodes_[id] = {-1, 0, 0, free_};
    free_ = static_cast<int>(id);
  }
  rehash(buckets_.size());
  for (auto& e : cache_) e.op = -1;
}

std::size_t Manager::live_nodes() const { return live_; }

int Manager::apply_and(int f, int g) {
  if (f == 0 || g == 0) return 0;
  if (f == 1) return g;
  if (g == 1 || f == g) return f;
  if (f > g) std::swap(f, g);
  int r;
  if (cache_find(kAnd, f, g, 0, r)) return r;
  const int vf = top_var(f), vg = top_var(g), v = std::min(vf, vg);
  const int f0 = vf == v ? nodes_[f].lo : f, f1 = vf == v ? nodes_[f].hi : f;
  const int g0 = vg == v ? nodes_[g].lo : g, g1 = vg == v ? nodes_[g].hi : g;
  const int lo = apply_and(f0, g0);
  const int hi = apply_and(f1, g1);
  r = make(v, lo, hi);
  cache_store(kAnd, f, g, 0, r);
  return r;
}

int Manager::apply_or(int f, int g) {
  if (f == 1 || g == 1) return 1;
  if (f == 0) return g;
  if (g == 0 || f == g) return f;
  if (f > g) std::swap(f, g);
  int r;
  if (cache_find(kOr, f, g, 0, r)) return r;
  const int vf = top_var(f), vg = top_var(g), v = std::min(vf, vg);
  const int f0 = vf == v ? nodes_[f].lo : f, f1 = vf == v ? nodes_[f].hi : f;
  const int g0 = vg == v ? nodes_[g].lo : g, g1 = vg == v ? nodes_[g].hi : g;
  const int lo = apply_or(f0, g0);
  const int hi = apply_or(f1, g1);
  r = make(v, lo, hi);
  cache_store(kOr, f, g, 0, r);
  return r;
}

int Manager::apply_xor(int f, int g) {
  if (f == g) return 0;
  if (f == 0) return g;
  if (g == 0) return f;
  if (f == 1) return apply_not(g);
  if (g == 1) return apply_not(f);
  if (f > g) std::swap(f, g);
  int r;
  if (cache_find(kXor, f, g, 0, r)) return r;
  const int vf = top_var(f), vg = top_var(g), v = std::min(vf, vg);
  const int f0 = vf == v ? nodes_[f].lo : f, f1 = vf == v ? nodes_[f].hi : f;
  const int g0 = vg == v ? nodes_[g].lo : g, g1 = vg == v ? nodes_[g].hi : g;
  const int lo = apply_xor(f0, g0);
  const int hi = apply_xor(f1, g1);
  r = make(v, lo, hi);
  cache_store(kXor, f, g, 0, r);
  return r;
}

int Manager::apply_not(int f) {
  if (f < 2) return 1 - f;
  int r;
  if (cache_find(kNot, f, 0, 0, r)) return r;
  const int v = top_var(f), f0 = nodes_[f].lo, f1 = nodes_[f].hi;
  const int lo = apply_not(f0);
  const int hi = apply_not(f1);
  r = make(v, lo, hi);
  cache_store(kNot, f, 0, 0, r);
  return r;
}

int Manager::apply_ite(int f, int g, int h) {
  if (f == 1) return g;
  if (f == 0) return h;
  if (g == h) return g;
  if (g == 1 && h == 0) return f;
  if (g == 0 && h == 1) return apply_not(f);
  if (g == 1) return apply_or(f, h);
  if (h == 0) return apply_and(f, g);
  int r;
  if (cache_find(kIte, f, g, h, r)) return r;
  const int v = std::min({top_var(f), top_var(g), top_var(h)});
  auto lo_of = [&](int x) { return top_var(x) == v ? nodes_[x].lo : x; };
  auto hi_of = [&](int x) { return top_var(x) == v ? nodes_[x].hi : x; };
  const int f0 = lo_of(f), f1 = hi_of(f), g0 = lo_of(g), g1 = hi_of(g), h0 = lo_of(h), h1 = hi_of(h);
  const int lo = apply_ite(f0, g0, h0);
  const int hi = apply_ite(f1, g1, h1);
  r = make(v, lo, hi);
  cache_store(kIte, f, g, h, r);
  return r;
}

int Manager::apply_exists(int f, int cube) {
  if (f < 2 || cube == 1) return f;
  const int v = top_var(f);
  while (cube > 1 && top_var(cube) < v) cube = nodes_[cube].hi;
  if (cube == 1) return f;
  int r;
  if (cache_find(kExists, f, cube, 0, r)) return r;
  const int f0 = nodes_[f].lo, f1 = nodes_[f].hi;
  if (top_var(cube) == v) {
    const int rest = nodes_[cube].hi;
    const int lo = apply_exists(f0, rest);
    r = lo == 1 ? 1 : apply_or(lo, apply_exists(f1, rest));
  } else {
    const int lo = apply_exists(f0, cube);
    const int hi = apply_exists(f1, cube);
    r = make(v, lo, hi);
  }
  cache_store(kExists, f, cube, 0, r);
  return r;
}

int Manager::apply_and_exists(int f, int g, int cube) {
  if (f == 0 || g == 0) return 0;
  if (f == 1 && g == 1) return 1;
  if (cube == 1) return apply_and(f, g);
  if (f == 1 || f == g) return apply_exists(g, cube);
  if (g == 1) return apply_exists(f, cube);
  if (f > g) std::swap(f, g);
  const int vf = top_var(f), vg = top_var(g), v = std::min(vf, vg);
  while (cube > 1 && top_var(cube) < v) cube = nodes_[cube].hi;
  if (cube == 1) return apply_and(f, g);
  int r;
  if (cache_find(kAndExists, f, g, cube, r)) return r;
  const int f0 = vf == v ? nodes_[f].lo : f, f1 = vf == v ? nodes_[f].hi : f;
  const int g0 = vg == v ? nodes_[g].lo : g, g1 = vg == v ? nodes_[g].hi : g;
  if (top_var(cube) == v) {
    const int rest = nodes_[cube].hi;
    const int lo = apply_and_exists(f0, g0, rest);
    r = lo == 1 ? 1 : apply_or(lo, apply_and_exists(f1, g1, rest));
  } else {
    const int lo = apply_and_exists(f0, g0, cube);
    const int hi = apply_and_exists(f1, g1, cube);
    r = make(v, lo, hi);
  }
  cache_store(kAndExists, f, g, cube, r);
  return r;
}

int Manager::apply_rename(int f, const std::vector<int>& map, int tag) {
  if (f < 2) return f;
  int r;
  if (cache_find(kRename, f, tag, 0, r)) return r;
  const int v = top_var(f), f0 = nodes_[f].lo, f1 = nodes_[f].hi;
  const int lo = apply_rename(f0, map, tag);
  const int hi = apply_rename(f1, map, tag);
  const int target = v < static_cast<int>(map.size()) && map[v] >= 0 ? map[v] : v;
  r = apply_ite(make(target, 0, 1), hi, lo);
  cache_store(kRename, f, tag, 0, r);
  return r;
}

int Manager::apply_restrict(int f, int v, bool value) {
  if (f < 2 || top_var(f) > v) return f;
  if (top_var(f) == v) return value ? nodes_[f].hi : nodes_[f].lo;
  const int op = value ? kRestrict1 : kRestrict0;
  int r;
  if (cache_find(op, f, v, 0, r)) return r;
  const int w = top_var(f), f0 = nodes_[f].lo, f1 = nodes_[f].hi;
  const int lo = apply_restrict(f0, v, value);
  const int hi = apply_restrict(f1, v, value);
  r = make(w, lo, hi);
  cache_store(op, f, v, 0, r);
  return r;
}

bool Manager::apply_implies(int f, int g) {
  if (f == 0 || g == 1 || f == g) return true;
  if (f == 1 || g == 0) return false;
  int r;
  if (cache_find(kImplies, f, g, 0, r)) return r != 0;
  const int vf = top_var(f), vg = top_var(g), v = std::min(vf, vg);
  const int f0 = vf == v ? nodes_[f].lo : f, f1 = vf == v ? nodes_[f].hi : f;
  const int g0 = vg == v ? nodes_[g].lo : g, g1 = vg == v ? nodes_[g].hi : g;
  const bool result = apply_implies(f0, g0) && apply_implies(f1, g1);
  cache_store(kImplies, f, g, 0, result ? 1 : 0);
  return result;
}

Bdd Manager::ite(const Bdd& f, const Bdd& g, const Bdd& h) {
  maybe_gc();
  return wrap(apply_ite(f.id_, g.id_, h.id_));
}

Bdd Manager::cube(const std::vector<int>& vars) {
  maybe_gc();
  std::vector<int> sorted = vars;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  int r = 1;
  for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) r = make(*it, 0, r);
  return wrap(r);
}

Bdd Manager::exists(const Bdd& f, const Bdd& cube) {
  maybe_gc();
  return wrap(apply_exists(f.id_, cube.id_));
}

Bdd Manager::forall(const Bdd& f, const Bdd& cube) {
  maybe_gc();
  return wrap(apply_not(apply_exists(apply_not(f.id_), cube.id_)));
}

Bdd Manager::and_exists(const Bdd& f, const Bdd& g, const Bdd& cube) {
  maybe_gc();
  return wrap(apply_and_exists(f.id_, g.id_, cube.id_));
}

Bdd Manager::rename(const Bdd& f, const std::vector<int>& map) {
  maybe_gc();
  int tag = -1;
  for (std::size_t i = 0; i < rename_maps_.size(); ++i)
    if (rename_maps_[i] == map) tag = static_cast<int>(i);
  if (tag < 0) {
    rename_maps_.push_back(map);
    tag = static_cast<int>(rename_maps_.size()) - 1;
  }
  return wrap(apply_rename(f.id_, rename_maps_[tag], tag));
}

Bdd Manager::restrict(const Bdd& f, int v, bool value) {
  maybe_gc();
  return wrap(apply_restrict(f.id_, v, value));
}

double Manager::sat_count(const Bdd& f, int nvars) {
  std::unordered_map<int, double> memo;
  auto level = [&](int n) { return n < 2 ? nvars : top_var(n); };
  auto count = [&](auto&& self, int n) -> double {
    if (n < 2) return n;
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    const int v = top_var(n), lo = nodes_[n].lo, hi = nodes_[n].hi;
    const double c = std::ldexp(self(self, lo), level(lo) - v - 1) + std::ldexp(self(self, hi), level(hi) - v - 1);
    memo.emplace(n, c);
    return c;
  };
  return std::ldexp(count(count, f.id_), level(f.id_));
}

std::vector<char> Manager::pick(const Bdd& f) {
  if (f.id_ == 0) return {};
  std::vector<char> out(vars_, 0);
  int n = f.id_;
  while (n > 1) {
    if (nodes_[n].lo != 0) {
      n = nodes_[n].lo;
    } else {
      out[top_var(n)] = 1;
      n = nodes_[n].hi;
    }
  }
  return out;
}

bool Manager::eval(const Bdd& f, const std::vector<char>& assignment) const {
  int n = f.id_;
  while (n > 1) n = assignment.at(top_var(n)) ? nodes_[n].hi : nodes_[n].lo;
  return n == 1;
}

std::vector<int> Manager::support(const Bdd& f) {
  std::vector<char> seen(nodes_.size(), 0), vars(vars_, 0);
  std::vector<int> stack{f.id_};
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    if (n < 2 || seen[n]) continue;
    seen[n] = 1;
    vars[top_var(n)] = 1;
    stack.push_back(nodes_[n].lo);
    stack.push_back(nodes_[n].hi);
  }
  std::vector<int> out;
  for (int v = 0; v < vars_; ++v)
    if (vars[v]) out.push_back(v);
  return out;
}

std::size_t Manager::node_count(const Bdd& f) {
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<int> stack{f.id_};
  std::size_t count = 0;
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    if (seen[n]) continue;
    seen[n] = 1;
    ++count;
    if (n > 1) {
      stack.push_back(nodes_[n].lo);
      stack.push_back(nodes_[n].hi);
    }
  }
  return count;
}

}  // namespace dlrq::bdd
