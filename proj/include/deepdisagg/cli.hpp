#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace deepdisagg {

inline constexpr const char* kVersion = "0.1.0";

// Entry point of the deep_disagg tool. `args` excludes the program name.
// Returns the process exit code; failures print a one-line JSON error record
// to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace deepdisagg
