#pragma once

#include "deepdisagg/core_model.hpp"
#include "deepdisagg/sparse_ops.hpp"

#include <vector>

namespace deepdisagg {

struct DisaggConfig {
  // l1 weight of the joint coding problem; independent of training lambda.
  double lambda = 1e-3;
  IstaOptions ista{1000, 1e-9, true, std::nullopt};
  // Unit-normalize the columns of each effective dictionary before stacking.
  bool renormalize_effective = true;
};

// D_1 D_2 ... D_N of one appliance.
LayerDictionary effective_dictionary(const ApplianceModel& model, bool renormalize = true);

// Jointly codes the aggregate over [D^(1) | ... | D^(n)] with a non-negative
// lasso and splits it per appliance. Models are processed in appliance_id
// order, so the result does not depend on the order of `models`.
DisaggregationResult disaggregate(const SignalMatrix& aggregate, const std::vector<ApplianceModel>& models,
                                  const DisaggConfig& cfg = {});

// Objective of the joint problem for a stacked code.
double joint_objective(const Matrix& aggregate, const Matrix& stacked_dictionary, const Matrix& stacked_code,
                       double lambda);

// Sum of the estimates in key order, i.e. the order used for the residual.
Matrix sum_of_estimates(const DisaggregationResult& result);

// R such that (S + R) evaluates to `total` entrywise in floating point,
// where S is `partial`. Plain subtraction except where rounding needs a nudge.
Matrix exact_residual(const Matrix& total, const Matrix& partial);

}  // namespace deepdisagg
