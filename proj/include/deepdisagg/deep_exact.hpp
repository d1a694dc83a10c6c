#pragma once

#include "deepdisagg/core_model.hpp"
#include "deepdisagg/deep_greedy.hpp"
#include "deepdisagg/sparse_ops.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace deepdisagg {

enum class ExactInit { random, from_greedy };

std::string_view to_string(ExactInit init);
ExactInit parse_exact_init(std::string_view text);

struct ExactConfig {
  std::vector<Index> layer_widths;
  double lambda = 1e-3;
  // Coupling weights mu_1 ... mu_{N-1}; empty means all ones.
  std::vector<double> mu;
  int max_iters = 200;
  // Stop once the relative objective change stays below tol for
  // kConvergenceWindow consecutive iterations.
  double tol = 1e-6;
  bool nonneg_final = true;
  std::uint64_t seed = 0;
  ExactInit init = ExactInit::random;
  // Alternations per layer for the greedy warm start.
  int greedy_iters = 20;
  IstaOptions ista;

  static constexpr int kConvergenceWindow = 5;
};

// Variables of the split problem. With N layers there are N-1 auxiliaries
// Y_j (k_j x s) and Bregman variables B_j of the same shape; Z is k_N x s.
struct ExactState {
  std::vector<Matrix> layers;
  std::vector<Matrix> aux;
  std::vector<Matrix> bregman;
  Matrix code;

  std::size_t n_layers() const { return layers.size(); }
};

struct ExactIteration {
  int iteration = 0;
  double objective = 0.0;
  // ||Y_j - D_{j+1} * next||_F for j = 1 .. N-1.
  std::vector<double> gaps;
};

struct ExactResult {
  DeepDictionary dictionary;
  SparseCode code;
  std::vector<ExactIteration> trace;
  // Objective of the starting point and of the returned (best) iterate.
  double initial_objective = 0.0;
  double best_objective = 0.0;
  // 0 when the starting point was never improved upon.
  int best_iteration = 0;
  bool converged = false;
  // Full split state of the returned iterate (empty aux/bregman for N = 1).
  ExactState state;
};

ExactResult train_exact(const Matrix& X, const ExactConfig& cfg);

void validate_config(const ExactConfig& cfg);
std::vector<double> resolved_mu(const ExactConfig& cfg);

// argmin_Y w1 ||C1 - A1 Y||^2 + w2 ||C2 - A2 Y||^2. The stacked system is
// solved by orthogonal decomposition (minimum norm); a ridge switches to the
// regularized normal equations.
struct WeightedTerm {
  const Matrix& design;
  const Matrix& target;
  double weight;
};
Matrix solve_stacked_lsq(const WeightedTerm& top, const WeightedTerm& bottom,
                         std::optional<double> ridge = std::nullopt);

// Y - D_next * next_code - B, as written.
Matrix bregman_update(const Matrix& Y, const Matrix& D_next, const Matrix& next_code, const Matrix& B);

// Individual sub-problems of one outer iteration (0-based layer indices).
// The data term seen by layer j is X for j = 0 and Y_{j-1} - B_{j-1} after.
Matrix layer_target(const ExactState& state, const Matrix& X, std::size_t j);
const Matrix& layer_output(const ExactState& state, std::size_t j);
void solve_dictionary_step(ExactState& state, const Matrix& X, std::size_t j);
void solve_auxiliary_step(ExactState& state, const Matrix& X, const std::vector<double>& mu, std::size_t j);
void solve_code_step(ExactState& state, const Matrix& X, double lambda, const std::vector<double>& mu,
                     IstaOptions ista);
void bregman_step(ExactState& state);
// Unit-normalizes every layer. Each column scale moves into the matching
// rows of the downstream code, Bregman variable and next layer, so the
// chained product D_1 ... D_N Z and the fidelity term are unchanged.
void normalize_state(ExactState& state, Rng& rng);
std::vector<double> feasibility_gaps(const ExactState& state);

void write_trace_csv(std::ostream& out, const std::vector<ExactIteration>& trace);

}  // namespace deepdisagg
