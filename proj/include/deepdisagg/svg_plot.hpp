#pragma once

#include <string>
#include <vector>

namespace deepdisagg {

// Two-series line plot: truth in red, estimate in blue.
std::string truth_vs_estimate_svg(const std::string& title, const std::vector<double>& truth,
                                  const std::vector<double>& estimate);

}  // namespace deepdisagg
