#include "deepdisagg/metrics.hpp"

#include "json.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace deepdisagg {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const std::string& id) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("shape mismatch for appliance '" + id + "'");
  }
}

void require_aligned(const ApplianceSignals& truth, const ApplianceSignals& estimate) {
  if (truth.empty()) throw std::invalid_argument("no appliances to evaluate");
  if (truth.size() != estimate.size()) throw std::invalid_argument("truth and estimate appliance sets differ");
  const Matrix* first = &truth.begin()->second;
  for (const auto& [id, t] : truth) {
    auto it = estimate.find(id);
    if (it == estimate.end()) throw std::invalid_argument("no estimate for appliance '" + id + "'");
    require_same_shape(t, it->second, id);
    require_same_shape(*first, t, id);
  }
}

}  // namespace

double disagg_accuracy(const ApplianceSignals& truth, const ApplianceSignals& estimate) {
  require_aligned(truth, estimate);
  double abs_error = 0.0;
  double aggregate = 0.0;
  for (const auto& [id, t] : truth) {
    abs_error += (estimate.at(id) - t).cwiseAbs().sum();
    aggregate += t.sum();
  }
  if (!(aggregate > 0.0)) throw std::domain_error("disagg_accuracy: total true energy must be positive");
  return 1.0 - abs_error / (2.0 * aggregate);
}

double normalized_error(const Matrix& truth, const Matrix& estimate) {
  require_same_shape(truth, estimate, "");
  const double denom = truth.cwiseAbs().sum();
  if (!(denom > 0.0)) throw std::domain_error("normalized_error: truth is identically zero");
  return (estimate - truth).cwiseAbs().sum() / denom;
}

EvalReport evaluate(const ApplianceSignals& truth, const ApplianceSignals& estimate) {
  EvalReport report;
  report.accuracy = disagg_accuracy(truth, estimate);
  for (const auto& [id, t] : truth) report.per_appliance_error[id] = normalized_error(t, estimate.at(id));
  report.n_timesteps = truth.begin()->second.size();
  report.n_appliances = truth.size();
  return report;
}

void write_report_json(std::ostream& out, const EvalReport& report) {
  nlohmann::json doc;
  doc["accuracy"] = report.accuracy;
  doc["per_appliance_error"] = report.per_appliance_error;
  doc["n_timesteps"] = report.n_timesteps;
  doc["n_appliances"] = report.n_appliances;
  out << doc.dump(2) << '\n';
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  const auto old_precision = out.precision(17);
  out << "appliance,metric,value\n";
  out << "aggregate,accuracy," << report.accuracy << '\n';
  for (const auto& [id, err] : report.per_appliance_error) out << id << ",normalized_error," << err << '\n';
  out << "aggregate,n_timesteps," << report.n_timesteps << '\n';
  out << "aggregate,n_appliances," << report.n_appliances << '\n';
  out.precision(old_precision);
}

}  // namespace deepdisagg
