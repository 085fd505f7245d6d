#pragma once

// Exact finite-horizon best response of the cook against the committed
// mechanism. Chance nodes draw the branch (adaptation prices discretized to
// G equal-probability midpoint atoms of [q_n, q_n + 1]); decision nodes pick
// accept/reject to maximize expected undiscounted total surplus.

#include <cstddef>

#include "fishmonger/curves.hpp"

namespace fishmonger {

struct OracleConfig {
  std::size_t horizon = 4;
  std::size_t grid = 3;
  AcceptanceCurve curve = AcceptanceCurve::rational();
  double cook_type = 1.0;
  double node_budget = 5e7;
};

struct OracleResult {
  double optimal = 0.0;
  double naive = 0.0;
  double gap = 0.0;
  double tree_size = 0.0;  // (2 (G + 2))^H
  std::size_t nodes_expanded = 0;
  std::size_t memo_hits = 0;
};

double oracle_tree_size(std::size_t horizon, std::size_t grid);

// Throws ConfigError (with the size estimate) when the tree exceeds the budget.
OracleResult expectimax_oracle(const OracleConfig& config);

}  // namespace fishmonger
