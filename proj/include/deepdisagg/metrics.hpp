#pragma once

#include "deepdisagg/core_model.hpp"

#include <iosfwd>
#include <map>
#include <string>

namespace deepdisagg {

using ApplianceSignals = std::map<std::string, Matrix>;

struct EvalReport {
  double accuracy = 0.0;
  std::map<std::string, double> per_appliance_error;
  Index n_timesteps = 0;
  std::size_t n_appliances = 0;
};

// 1 - sum_t sum_n |est - truth| / (2 sum_t ybar_t), where ybar_t is the true
// aggregate (sum over appliances) at instant t. Every entry of the per
// appliance matrices is one instant.
double disagg_accuracy(const ApplianceSignals& truth, const ApplianceSignals& estimate);

// Relative L1 error: sum_t |est - truth| / sum_t |truth|.
double normalized_error(const Matrix& truth, const Matrix& estimate);

EvalReport evaluate(const ApplianceSignals& truth, const ApplianceSignals& estimate);

void write_report_json(std::ostream& out, const EvalReport& report);
// One row per appliance plus a leading "aggregate" row carrying accuracy.
void write_report_csv(std::ostream& out, const EvalReport& report);

}  // namespace deepdisagg
