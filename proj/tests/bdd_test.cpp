#include "dlrq/bdd.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <random>

using namespace dlrq::bdd;

namespace {

constexpr int kVars = 6;
using Table = std::uint64_t;  // bit i: value under the assignment encoded by i

Table var_table(int v) {
  Table t = 0;
  for (int i = 0; i < 64; ++i)
    if ((i >> v) & 1) t |= Table{1} << i;
  return t;
}

struct Random {
  Bdd bdd;
  Table table;
};

Random random_function(Manager& m, std::mt19937& rng, int depth) {
  if (depth == 0 || rng() % 4 == 0) {
    int v = static_cast<int>(rng() % kVars);
    switch (rng() % 6) {
      case 0: return {m.zero(), 0};
      case 1: return {m.one(), ~Table{0}};
      case 2: return {m.nvar(v), ~var_table(v)};
      default: return {m.var(v), var_table(v)};
    }
  }
  auto a = random_function(m, rng, depth - 1);
  auto b = random_function(m, rng, depth - 1);
  switch (rng() % 5) {
    case 0: return {a.bdd & b.bdd, a.table & b.table};
    case 1: return {a.bdd | b.bdd, a.table | b.table};
    case 2: return {a.bdd ^ b.bdd, a.table ^ b.table};
    case 3: return {!a.bdd, ~a.table};
    default: {
      auto c = random_function(m, rng, depth - 1);
      return {m.ite(a.bdd, b.bdd, c.bdd), (a.table & b.table) | (~a.table & c.table)};
    }
  }
}

std::vector<char> assignment(int i) {
  std::vector<char> a(kVars);
  for (int v = 0; v < kVars; ++v) a[v] = static_cast<char>((i >> v) & 1);
  return a;
}

Table table_of(Manager& m, const Bdd& f) {
  Table t = 0;
  for (int i = 0; i < 64; ++i)
    if (m.eval(f, assignment(i))) t |= Table{1} << i;
  return t;
}

Table exists_table(Table t, int v) {
  Table out = 0;
  for (int i = 0; i < 64; ++i) {
    const int j = i ^ (1 << v);
    if (((t >> i) & 1) || ((t >> j) & 1)) out |= Table{1} << i;
  }
  return out;
}

Table exists_table_all(Table t, const std::vector<int>& vars) {
  for (int v : vars) t = exists_table(t, v);
  return t;
}

}  // namespace

TEST(Bdd, MatchesTruthTablesAndIsCanonical) {
  Manager m(kVars);
  std::mt19937 rng(21);
  std::map<Table, int> ids;
  for (int round = 0; round < 2000; ++round) {
    auto f = random_function(m, rng, 4);
    ASSERT_EQ(table_of(m, f.bdd), f.table) << round;
    auto [it, fresh] = ids.emplace(f.table, f.bdd.id());
    if (!fresh) EXPECT_EQ(it->second, f.bdd.id()) << round;
    EXPECT_DOUBLE_EQ(m.sat_count(f.bdd, kVars), std::popcount(f.table));
  }
}

TEST(Bdd, QuantificationAndRelationalProduct) {
  Manager m(kVars);
  std::mt19937 rng(22);
  for (int round = 0; round < 1000; ++round) {
    auto f = random_function(m, rng, 4);
    auto g = random_function(m, rng, 4);
    std::vector<int> vars;
    Table ex = f.table, rel = f.table & g.table;
    for (int v = 0; v < kVars; ++v)
      if (rng() % 2) {
        vars.push_back(v);
        ex = exists_table(ex, v);
        rel = exists_table(rel, v);
      }
    Bdd cube = m.cube(vars);
    EXPECT_EQ(table_of(m, m.exists(f.bdd, cube)), ex);
    EXPECT_EQ(table_of(m, m.and_exists(f.bdd, g.bdd, cube)), rel);
    EXPECT_EQ(table_of(m, m.forall(f.bdd, cube)), ~exists_table_all(~f.table, vars));
  }
}

TEST(Bdd, RenameRestrictImpliesPick) {
  Manager m(kVars);
  std::mt19937 rng(23);
  for (int round = 0; round < 1000; ++round) {
    auto f = random_function(m, rng, 4);
    auto g = random_function(m, rng, 3);
    // A random permutation of all variables.
    std::vector<int> perm(kVars);
    for (int v = 0; v < kVars; ++v) perm[v] = v;
    std::shuffle(perm.begin(), perm.end(), rng);
    Bdd r = m.rename(f.bdd, perm);
    for (int i = 0; i < 64; ++i) {
      auto a = assignment(i);
      std::vector<char> b(kVars);
      for (int v = 0; v < kVars; ++v) b[v] = a[perm[v]];
      ASSERT_EQ(m.eval(r, a), m.eval(f.bdd, b));
    }
    const int v = static_cast<int>(rng() % kVars);
    Bdd hi = m.restrict(f.bdd, v, true);
    for (int i = 0; i < 64; ++i) {
      auto a = assignment(i);
      a[v] = 1;
      EXPECT_EQ(m.eval(hi, assignment(i)), m.eval(f.bdd, a));
    }
    EXPECT_EQ(f.bdd.implies(g.bdd), (f.table & ~g.table) == 0);
    auto p = m.pick(f.bdd);
    if (f.table == 0)
      EXPECT_TRUE(p.empty());
    else
      EXPECT_TRUE(m.eval(f.bdd, p));
  }
}

TEST(Bdd, GarbageCollectionKeepsReferencedNodes) {
  Manager m(kVars);
  std::mt19937 rng(24);
  std::vector<Random> kept;
  for (int round = 0; round < 300; ++round) {
    auto f = random_function(m, rng, 5);
    if (round % 3 == 0) kept.push_back(f);
  }
  const auto before = m.live_nodes();
  m.gc();
  EXPECT_LE(m.live_nodes(), before);
  for (const auto& f : kept) EXPECT_EQ(table_of(m, f.bdd), f.table);
  kept.clear();
  m.gc();
  EXPECT_EQ(m.live_nodes(), 2u);
  // Rebuilt functions after collection are still canonical.
  auto x = m.var(0) & m.var(1);
  auto y = !(!m.var(0) | !m.var(1));
  EXPECT_EQ(x, y);
}

TEST(Bdd, ManyVariablesChain) {
  // Parity over 200 variables stays linear in size.
  Manager m(200);
  Bdd parity = m.zero();
  for (int v = 0; v < 200; ++v) parity = parity ^ m.var(v);
  EXPECT_EQ(m.node_count(parity), 2u * 200 - 1 + 2);
  EXPECT_DOUBLE_EQ(m.sat_count(parity, 200), std::ldexp(1.0, 199));
  EXPECT_EQ(m.support(parity).size(), 200u);
}
