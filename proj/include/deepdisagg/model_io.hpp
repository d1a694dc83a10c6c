#pragma once

#include "deepdisagg/core_model.hpp"

#include <filesystem>
#include <string>

namespace deepdisagg {

// Model documents are JSON:
//   {appliance_id, layer_widths, layers: [{rows, cols, data}], training_config}
// with `data` in row-major order. Doubles are written in their shortest
// round-trip form, so reading a model back reproduces every entry exactly.
std::string model_to_json(const ApplianceModel& model);
ApplianceModel model_from_json(const std::string& text);

void save_model(const ApplianceModel& model, const std::filesystem::path& path);
ApplianceModel load_model(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace deepdisagg
