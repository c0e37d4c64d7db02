#pragma once

// Seeded generator of small containment instances for differential testing.

#include <cstdint>
#include <string>

#include "dlrq/dlr.hpp"

namespace dlrq::gen {

struct MicroConfig {
  int concepts = 2;        // A, B, ...
  int relations = 1;       // binary P, R, ...
  int max_assertions = 2;
  int max_atoms = 2;       // per query body
  int max_existentials = 2;
};

struct MicroInstance {
  std::uint64_t seed = 0;
  dlr::Schema schema;
  dlr::Query lhs;
  dlr::Query rhs;

  std::string to_sexpr() const;
};

/// Deterministic in (seed, config). Roughly half of the right-hand queries
/// are obtained from the left one by dropping and renaming atoms, so both
/// outcomes of the containment test are well represented.
MicroInstance generate_micro(std::uint64_t seed, const MicroConfig& config = {});

}  // namespace dlrq::gen
