#include "deepdisagg/deep_greedy.hpp"

#include <stdexcept>
#include <string>

namespace deepdisagg {

void validate_config(const GreedyConfig& cfg) {
  if (cfg.layer_widths.empty()) throw std::invalid_argument("greedy: at least one layer required");
  for (Index w : cfg.layer_widths) {
    if (w < 1) throw std::invalid_argument("greedy: layer widths must be >= 1");
  }
  if (cfg.per_layer_iters < 1) throw std::invalid_argument("greedy: per_layer_iters must be >= 1");
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("greedy: lambda must be positive");
}

namespace {

// min ||input - D C||_F^2 by alternating least squares, atoms normalized.
struct DenseLayer {
  Matrix dictionary;
  Matrix code;
};

DenseLayer train_dense_layer(const Matrix& input, Index width, int iters, int layer, std::uint64_t seed,
                             std::vector<HalfStep>& trace) {
  Rng rng = make_rng(seed);
  Matrix D = normalize_columns(random_normal(input.rows(), width, rng), rng).matrix;
  Matrix C = Matrix::Zero(width, input.cols());
  auto fidelity = [&] { return (input - D * C).squaredNorm(); };

  for (int it = 0; it < iters; ++it) {
    HalfStep code_step{layer, it, StepKind::code};
    code_step.fidelity_before = code_step.objective_before = fidelity();
    C = lsq_code(D, input);
    code_step.fidelity_after = code_step.objective_after = fidelity();
    trace.push_back(code_step);

    HalfStep dict_step{layer, it, StepKind::dictionary};
    dict_step.fidelity_before = dict_step.objective_before = code_step.fidelity_after;
    D = lsq_dictionary(input, C);
    require_finite(D, "dictionary update");
    dict_step.fidelity_after = dict_step.objective_after = fidelity();
    trace.push_back(dict_step);

    HalfStep norm_step{layer, it, StepKind::normalize};
    norm_step.fidelity_before = norm_step.objective_before = dict_step.fidelity_after;
    auto normalized = normalize_columns(D, rng);
    D = std::move(normalized.matrix);
    rescale_rows(C, normalized.scales);
    norm_step.fidelity_after = norm_step.objective_after = fidelity();
    trace.push_back(norm_step);
  }
  return {std::move(D), std::move(C)};
}

}  // namespace

GreedyResult train_greedy(const Matrix& X, const GreedyConfig& cfg) {
  validate_config(cfg);
  if (X.rows() < 1 || X.cols() < 1) throw std::invalid_argument("greedy: empty data matrix");
  require_finite(X, "training data");

  const std::size_t n_layers = cfg.layer_widths.size();
  GreedyResult result;
  std::vector<LayerDictionary> layers;
  Matrix input = X;

  for (std::size_t j = 0; j + 1 < n_layers; ++j) {
    auto layer = train_dense_layer(input, cfg.layer_widths[j], cfg.per_layer_iters, static_cast<int>(j),
                                   cfg.seed + j, result.trace);
    layers.push_back(LayerDictionary{std::move(layer.dictionary), true});
    result.intermediate_codes.push_back(layer.code);
    input = std::move(layer.code);
  }

  ShallowConfig last;
  last.n_atoms = cfg.layer_widths.back();
  last.lambda = cfg.lambda;
  last.outer_iters = cfg.per_layer_iters;
  last.nonneg_codes = cfg.nonneg_final;
  last.seed = cfg.seed + (n_layers - 1);
  last.ista = cfg.ista;
  auto shallow = learn_shallow(input, last);
  for (auto step : shallow.trace) {
    step.layer = static_cast<int>(n_layers - 1);
    result.trace.push_back(step);
  }
  layers.push_back(std::move(shallow.dictionary));

  result.dictionary = DeepDictionary(std::move(layers));
  result.code = std::move(shallow.code);
  return result;
}

double deep_objective(const Matrix& X, const std::vector<Matrix>& layers, const Matrix& Z, double lambda) {
  if (layers.empty()) throw std::invalid_argument("deep_objective: no layers");
  if (layers.front().rows() != X.rows()) throw std::invalid_argument("deep_objective: first layer rows != window length");
  // Apply right to left so each product stays as narrow as the data.
  Matrix synth = Z;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    if (it->cols() != synth.rows()) throw std::invalid_argument("deep_objective: chain mismatch");
    synth = *it * synth;
  }
  if (synth.cols() != X.cols()) throw std::invalid_argument("deep_objective: code columns != data columns");
  return (X - synth).squaredNorm() + lambda * Z.cwiseAbs().sum();
}

double deep_objective(const Matrix& X, const std::vector<LayerDictionary>& layers, const Matrix& Z,
                      double lambda) {
  std::vector<Matrix> mats;
  mats.reserve(layers.size());
  for (const auto& l : layers) mats.push_back(l.matrix);
  return deep_objective(X, mats, Z, lambda);
}

}  // namespace deepdisagg
