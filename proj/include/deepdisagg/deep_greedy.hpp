#pragma once

#include "deepdisagg/core_model.hpp"
#include "deepdisagg/shallow_sc.hpp"

#include <cstdint>
#include <vector>

namespace deepdisagg {

struct GreedyConfig {
  std::vector<Index> layer_widths;
  // l1 weight, applied to the last layer only.
  double lambda = 1e-3;
  int per_layer_iters = 20;
  bool nonneg_final = true;
  std::uint64_t seed = 0;
  IstaOptions ista;
};

struct GreedyResult {
  DeepDictionary dictionary;
  SparseCode code;
  // Half-steps of every layer; HalfStep::layer is 0-based.
  std::vector<HalfStep> trace;
  // Codes Z_1 ... Z_{N-1} fed forward between layers.
  std::vector<Matrix> intermediate_codes;
};

// Layer-by-layer factorization X = D_1 Z_1, Z_1 = D_2 Z_2, ..., with the l1
// penalty and sign constraint only on the final code. Layer j is trained from
// layer j-1's code alone; nothing flows back up the chain.
GreedyResult train_greedy(const Matrix& X, const GreedyConfig& cfg);

// ||X - D_1 ... D_N Z||_F^2 + lambda ||Z||_1
double deep_objective(const Matrix& X, const std::vector<LayerDictionary>& layers, const Matrix& Z,
                      double lambda);
double deep_objective(const Matrix& X, const std::vector<Matrix>& layers, const Matrix& Z, double lambda);

void validate_config(const GreedyConfig& cfg);

}  // namespace deepdisagg
