#include "deepdisagg/shallow_sc.hpp"

#include <stdexcept>
#include <string>

namespace deepdisagg {

std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::code: return "code";
    case StepKind::dictionary: return "dictionary";
    case StepKind::normalize: return "normalize";
  }
  return "unknown";
}

std::vector<double> ShallowResult::objective_trace() const {
  std::vector<double> out;
  for (const auto& step : trace) {
    if (step.kind != StepKind::normalize) out.push_back(step.objective_after);
  }
  return out;
}

void validate_config(const ShallowConfig& cfg) {
  if (cfg.n_atoms < 1) throw std::invalid_argument("shallow: n_atoms must be >= 1");
  if (cfg.outer_iters < 1) throw std::invalid_argument("shallow: outer_iters must be >= 1");
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("shallow: lambda must be positive");
}

ShallowResult learn_shallow(const Matrix& X, const ShallowConfig& cfg,
                            const std::optional<Matrix>& initial_dictionary) {
  validate_config(cfg);
  if (X.rows() < 1 || X.cols() < 1) throw std::invalid_argument("shallow: empty data matrix");
  require_finite(X, "training data");
  if (cfg.n_atoms >= X.rows() * X.cols()) {
    throw std::invalid_argument("shallow: n_atoms must be below the number of data entries");
  }

  Rng rng = make_rng(cfg.seed);
  Matrix D;
  if (initial_dictionary) {
    if (initial_dictionary->rows() != X.rows() || initial_dictionary->cols() != cfg.n_atoms) {
      throw std::invalid_argument("shallow: initial dictionary has wrong shape");
    }
    D = normalize_columns(*initial_dictionary, rng).matrix;
  } else {
    D = normalize_columns(random_normal(X.rows(), cfg.n_atoms, rng), rng).matrix;
  }
  Matrix Z = Matrix::Zero(cfg.n_atoms, X.cols());

  IstaOptions ista = cfg.ista;
  ista.nonneg = cfg.nonneg_codes;

  ShallowResult result;
  auto fidelity = [&] { return (X - D * Z).squaredNorm(); };
  auto penalty = [&] { return cfg.lambda * Z.cwiseAbs().sum(); };

  for (int it = 0; it < cfg.outer_iters; ++it) {
    HalfStep code_step{0, it, StepKind::code};
    code_step.fidelity_before = fidelity();
    code_step.objective_before = code_step.fidelity_before + penalty();
    Z = ista_solve_traced(D, X, cfg.lambda, ista, &Z).code.matrix;
    code_step.fidelity_after = fidelity();
    code_step.objective_after = code_step.fidelity_after + penalty();
    result.trace.push_back(code_step);

    HalfStep dict_step{0, it, StepKind::dictionary};
    dict_step.fidelity_before = code_step.fidelity_after;
    dict_step.objective_before = code_step.objective_after;
    D = lsq_dictionary(X, Z);
    require_finite(D, "dictionary update");
    dict_step.fidelity_after = fidelity();
    dict_step.objective_after = dict_step.fidelity_after + penalty();
    result.trace.push_back(dict_step);

    HalfStep norm_step{0, it, StepKind::normalize};
    norm_step.fidelity_before = dict_step.fidelity_after;
    norm_step.objective_before = dict_step.objective_after;
    auto normalized = normalize_columns(D, rng);
    D = std::move(normalized.matrix);
    rescale_rows(Z, normalized.scales);
    norm_step.fidelity_after = fidelity();
    norm_step.objective_after = norm_step.fidelity_after + penalty();
    result.trace.push_back(norm_step);
  }

  result.dictionary = LayerDictionary{std::move(D), true};
  result.code = SparseCode{std::move(Z), cfg.nonneg_codes, cfg.lambda};
  return result;
}

}  // namespace deepdisagg
