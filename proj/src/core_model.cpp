#include "deepdisagg/core_model.hpp"

#include <cmath>
#include <stdexcept>

namespace deepdisagg {

DeepDictionary::DeepDictionary(std::vector<LayerDictionary> layers_in)
    : layers(std::move(layers_in)) {
  layer_widths.reserve(layers.size());
  for (const auto& layer : layers) layer_widths.push_back(layer.atoms());
}

Matrix DeepDictionary::chained_product() const {
  if (layers.empty()) throw std::invalid_argument("empty deep dictionary");
  Matrix product = layers.front().matrix;
  for (std::size_t j = 1; j < layers.size(); ++j) {
    if (product.cols() != layers[j].rows()) {
      throw std::invalid_argument("chain mismatch at layer " + std::to_string(j + 1));
    }
    product = product * layers[j].matrix;
  }
  return product;
}

std::vector<std::string> validate(const LayerDictionary& dict) {
  std::vector<std::string> out;
  if (dict.rows() < 1 || dict.atoms() < 1) {
    out.emplace_back("empty dictionary");
    return out;
  }
  if (!dict.matrix.allFinite()) {
    out.emplace_back("non-finite dictionary entry");
    return out;
  }
  if (!dict.unit_columns) return out;

  bool zero = false;
  bool off_unit = false;
  for (Index j = 0; j < dict.atoms(); ++j) {
    const double norm = dict.matrix.col(j).norm();
    if (norm == 0.0) {
      zero = true;
    } else if (std::abs(norm - 1.0) > kUnitNormTolerance) {
      off_unit = true;
    }
  }
  if (zero) out.emplace_back("zero column");
  if (off_unit) out.emplace_back("column not unit norm");
  return out;
}

std::vector<std::string> validate(const DeepDictionary& dict) {
  std::vector<std::string> out;
  if (dict.layers.empty()) {
    out.emplace_back("no layers");
    return out;
  }
  if (dict.layer_widths.size() != dict.layers.size()) {
    out.emplace_back("layer_widths length differs from layer count");
  }
  for (std::size_t j = 0; j < dict.layers.size(); ++j) {
    const auto& layer = dict.layers[j];
    if (j > 0 && dict.layers[j - 1].atoms() != layer.rows()) {
      out.push_back("chain mismatch at layer " + std::to_string(j + 1));
    }
    if (j < dict.layer_widths.size() && dict.layer_widths[j] != layer.atoms()) {
      out.push_back("layer " + std::to_string(j + 1) + " width differs from layer_widths");
    }
    for (auto& v : validate(layer)) out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::string> validate(const SparseCode& code) {
  std::vector<std::string> out;
  if (!code.matrix.allFinite()) {
    out.emplace_back("non-finite code entry");
    return out;
  }
  if (code.nonneg && code.matrix.size() > 0 && code.matrix.minCoeff() < 0.0) {
    out.emplace_back("negative code entry");
  }
  return out;
}

std::vector<std::string> validate(const SignalMatrix& signal) {
  std::vector<std::string> out;
  if (signal.data.rows() < 1 || signal.data.cols() < 1) out.emplace_back("empty signal matrix");
  if (!signal.data.allFinite()) out.emplace_back("non-finite signal entry");
  return out;
}

std::vector<std::string> validate(const ApplianceModel& model) {
  std::vector<std::string> out;
  if (model.appliance_id.empty()) out.emplace_back("empty appliance_id");
  for (auto& v : validate(model.dictionary)) out.push_back(std::move(v));
  return out;
}

}  // namespace deepdisagg
