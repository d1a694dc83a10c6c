#pragma once

#include "deepdisagg/core_model.hpp"
#include "deepdisagg/sparse_ops.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace deepdisagg {

enum class StepKind { code, dictionary, normalize };

std::string_view to_string(StepKind kind);

// One half-step of an alternating minimization. `objective_*` is the local
// objective (fidelity plus the l1 term where one applies); `fidelity_*` is
// the squared Frobenius residual alone.
struct HalfStep {
  int layer = 0;
  int iteration = 0;
  StepKind kind = StepKind::code;
  double objective_before = 0.0;
  double objective_after = 0.0;
  double fidelity_before = 0.0;
  double fidelity_after = 0.0;
};

struct ShallowConfig {
  Index n_atoms = 8;
  double lambda = 1e-3;
  int outer_iters = 30;
  bool nonneg_codes = true;
  std::uint64_t seed = 0;
  IstaOptions ista;
};

struct ShallowResult {
  LayerDictionary dictionary;
  SparseCode code;
  std::vector<HalfStep> trace;

  // Objective after every code and dictionary half-step, in order.
  std::vector<double> objective_trace() const;
};

// Alternates a sparse-coding step (ISTA, warm started) with a least-squares
// dictionary update followed by atom normalization. `initial_dictionary`
// replaces the seeded random start when given; its columns are normalized.
ShallowResult learn_shallow(const Matrix& X, const ShallowConfig& cfg,
                            const std::optional<Matrix>& initial_dictionary = std::nullopt);

void validate_config(const ShallowConfig& cfg);

}  // namespace deepdisagg
