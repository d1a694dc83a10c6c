#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace deepdisagg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Columns are windows of meter readings; rows are samples within a window.
struct SignalMatrix {
  Matrix data;
  double window_seconds = 0.0;

  Index window_length() const { return data.rows(); }
  Index n_windows() const { return data.cols(); }
};

struct LayerDictionary {
  Matrix matrix;
  bool unit_columns = true;

  Index rows() const { return matrix.rows(); }
  Index atoms() const { return matrix.cols(); }
};

// D_1 D_2 ... D_N for one appliance. layer_widths[j] is the atom count of
// layer j and must agree with layers[j].atoms().
struct DeepDictionary {
  std::vector<LayerDictionary> layers;
  std::vector<Index> layer_widths;

  DeepDictionary() = default;
  explicit DeepDictionary(std::vector<LayerDictionary> layers);

  std::size_t n_layers() const { return layers.size(); }
  Index window_length() const { return layers.empty() ? 0 : layers.front().rows(); }

  // Left-to-right product of all layers (m x k_N). Throws on chain mismatch.
  Matrix chained_product() const;
};

struct SparseCode {
  Matrix matrix;
  bool nonneg = false;
  double lambda = 0.0;
};

// Enough to rerun the training that produced a model.
struct TrainingConfig {
  std::string solver;
  double lambda = 0.0;
  std::vector<double> mu;
  int outer_iters = 0;
  // Greedy warm-start alternations (exact solver only).
  int greedy_iters = 0;
  // Outer convergence tolerance (exact solver only).
  double tol = 0.0;
  int ista_iters = 0;
  double ista_tol = 0.0;
  bool nonneg = true;
  std::uint64_t seed = 0;
  std::string init;
};

struct ApplianceModel {
  std::string appliance_id;
  DeepDictionary dictionary;
  TrainingConfig training_config;
};

struct DisaggregationResult {
  std::map<std::string, SignalMatrix> per_appliance_estimate;
  std::map<std::string, SparseCode> codes;
  // X - sum of estimates; summing the estimates in key order and then adding
  // this matrix reproduces the aggregate.
  Matrix residual_matrix;
  double residual = 0.0;
};

inline constexpr double kUnitNormTolerance = 1e-12;

std::vector<std::string> validate(const LayerDictionary& dict);
std::vector<std::string> validate(const DeepDictionary& dict);
std::vector<std::string> validate(const SparseCode& code);
std::vector<std::string> validate(const SignalMatrix& signal);

// Empty iff every invariant of the model and its dictionary holds.
std::vector<std::string> validate(const ApplianceModel& model);

}  // namespace deepdisagg
