#include "deepdisagg/disaggregator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace deepdisagg {

LayerDictionary effective_dictionary(const ApplianceModel& model, bool renormalize) {
  LayerDictionary out{model.dictionary.chained_product(), false};
  if (!renormalize) return out;
  bool all_unit = true;
  for (Index j = 0; j < out.matrix.cols(); ++j) {
    const double norm = out.matrix.col(j).norm();
    // A zero atom stays zero; it can never contribute to an estimate.
    if (norm > 0.0) {
      out.matrix.col(j) /= norm;
    } else {
      all_unit = false;
    }
  }
  out.unit_columns = all_unit;
  return out;
}

double joint_objective(const Matrix& aggregate, const Matrix& stacked_dictionary, const Matrix& stacked_code,
                       double lambda) {
  return lasso_objective(stacked_dictionary, aggregate, stacked_code, lambda);
}

Matrix exact_residual(const Matrix& total, const Matrix& partial) {
  Matrix residual = total - partial;
  constexpr int kMaxNudges = 8;
  for (Index j = 0; j < total.cols(); ++j) {
    for (Index i = 0; i < total.rows(); ++i) {
      const double t = total(i, j);
      const double s = partial(i, j);
      double& r = residual(i, j);
      if (s + r == t) continue;
      const double direction = (s + r < t) ? std::numeric_limits<double>::infinity()
                                           : -std::numeric_limits<double>::infinity();
      double candidate = r;
      for (int n = 0; n < kMaxNudges; ++n) {
        candidate = std::nextafter(candidate, direction);
        if (s + candidate == t) {
          r = candidate;
          break;
        }
      }
    }
  }
  return residual;
}

Matrix sum_of_estimates(const DisaggregationResult& result) {
  Matrix total = Matrix::Zero(result.residual_matrix.rows(), result.residual_matrix.cols());
  for (const auto& [id, estimate] : result.per_appliance_estimate) total += estimate.data;
  return total;
}

DisaggregationResult disaggregate(const SignalMatrix& aggregate, const std::vector<ApplianceModel>& models,
                                  const DisaggConfig& cfg) {
  if (models.empty()) throw std::invalid_argument("disaggregate: no appliance models");
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("disaggregate: lambda must be positive");
  if (aggregate.data.rows() < 1 || aggregate.data.cols() < 1) {
    throw std::invalid_argument("disaggregate: empty aggregate");
  }
  require_finite(aggregate.data, "aggregate");

  std::vector<const ApplianceModel*> ordered;
  for (const auto& model : models) ordered.push_back(&model);
  std::sort(ordered.begin(), ordered.end(),
            [](const ApplianceModel* a, const ApplianceModel* b) { return a->appliance_id < b->appliance_id; });
  std::set<std::string> seen;
  for (const auto* model : ordered) {
    if (!seen.insert(model->appliance_id).second) {
      throw std::invalid_argument("disaggregate: duplicate appliance '" + model->appliance_id + "'");
    }
    if (model->dictionary.window_length() != aggregate.window_length()) {
      throw std::invalid_argument("disaggregate: model '" + model->appliance_id + "' has window length " +
                                  std::to_string(model->dictionary.window_length()) + ", aggregate has " +
                                  std::to_string(aggregate.window_length()));
    }
  }

  std::vector<Matrix> blocks;
  Index total_atoms = 0;
  for (const auto* model : ordered) {
    blocks.push_back(effective_dictionary(*model, cfg.renormalize_effective).matrix);
    total_atoms += blocks.back().cols();
  }
  Matrix stacked(aggregate.window_length(), total_atoms);
  Index offset = 0;
  for (const auto& block : blocks) {
    stacked.middleCols(offset, block.cols()) = block;
    offset += block.cols();
  }

  IstaOptions ista = cfg.ista;
  ista.nonneg = true;
  const Matrix code = ista_solve(stacked, aggregate.data, cfg.lambda, ista).matrix;

  DisaggregationResult result;
  offset = 0;
  Matrix partial = Matrix::Zero(aggregate.data.rows(), aggregate.data.cols());
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const Index k = blocks[i].cols();
    Matrix block_code = code.middleRows(offset, k);
    offset += k;
    SignalMatrix estimate{blocks[i] * block_code, aggregate.window_seconds};
    partial += estimate.data;
    const auto& id = ordered[i]->appliance_id;
    result.per_appliance_estimate.emplace(id, std::move(estimate));
    result.codes.emplace(id, SparseCode{std::move(block_code), true, cfg.lambda});
  }
  result.residual_matrix = exact_residual(aggregate.data, partial);
  result.residual = result.residual_matrix.norm();
  return result;
}

}  // namespace deepdisagg
