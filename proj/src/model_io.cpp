#include "deepdisagg/model_io.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace deepdisagg {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& doc) {
  const auto rows = doc.at("rows").get<Index>();
  const auto cols = doc.at("cols").get<Index>();
  const auto& data = doc.at("data");
  if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols) {
    throw std::invalid_argument("model file: matrix data length does not match rows x cols");
  }
  Matrix m(rows, cols);
  std::size_t n = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = data[n++].get<double>();
  return m;
}

json config_to_json(const TrainingConfig& cfg) {
  return json{{"solver", cfg.solver},
              {"lambda", cfg.lambda},
              {"mu", cfg.mu},
              {"outer_iters", cfg.outer_iters},
              {"greedy_iters", cfg.greedy_iters},
              {"tol", cfg.tol},
              {"ista_iters", cfg.ista_iters},
              {"ista_tol", cfg.ista_tol},
              {"nonneg", cfg.nonneg},
              {"seed", cfg.seed},
              {"init", cfg.init}};
}

TrainingConfig config_from_json(const json& doc) {
  TrainingConfig cfg;
  cfg.solver = doc.at("solver").get<std::string>();
  cfg.lambda = doc.at("lambda").get<double>();
  cfg.mu = doc.at("mu").get<std::vector<double>>();
  cfg.outer_iters = doc.at("outer_iters").get<int>();
  cfg.greedy_iters = doc.value("greedy_iters", 0);
  cfg.tol = doc.at("tol").get<double>();
  cfg.ista_iters = doc.at("ista_iters").get<int>();
  cfg.ista_tol = doc.value("ista_tol", 0.0);
  cfg.nonneg = doc.at("nonneg").get<bool>();
  cfg.seed = doc.at("seed").get<std::uint64_t>();
  cfg.init = doc.value("init", std::string{});
  return cfg;
}

}  // namespace

std::string model_to_json(const ApplianceModel& model) {
  json layers = json::array();
  for (const auto& layer : model.dictionary.layers) {
    auto entry = matrix_to_json(layer.matrix);
    entry["unit_columns"] = layer.unit_columns;
    layers.push_back(std::move(entry));
  }
  json doc{{"appliance_id", model.appliance_id},
           {"layer_widths", model.dictionary.layer_widths},
           {"layers", std::move(layers)},
           {"training_config", config_to_json(model.training_config)}};
  return doc.dump(1) + "\n";
}

ApplianceModel model_from_json(const std::string& text) {
  ApplianceModel model;
  try {
    const json doc = json::parse(text);
    model.appliance_id = doc.at("appliance_id").get<std::string>();
    for (const auto& entry : doc.at("layers")) {
      model.dictionary.layers.push_back(
          LayerDictionary{matrix_from_json(entry), entry.value("unit_columns", true)});
    }
    model.dictionary.layer_widths = doc.at("layer_widths").get<std::vector<Index>>();
    model.training_config = config_from_json(doc.at("training_config"));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model file: ") + e.what());
  }
  return model;
}

void save_model(const ApplianceModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_json(model));
}

ApplianceModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_file(path));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace deepdisagg
