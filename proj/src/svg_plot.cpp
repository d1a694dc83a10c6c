#include "deepdisagg/svg_plot.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace deepdisagg {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 300.0;
constexpr double kMargin = 40.0;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void polyline(std::ostringstream& svg, const std::vector<double>& values, double lo, double hi,
              const char* color) {
  const double span = hi > lo ? hi - lo : 1.0;
  const double dx = values.size() > 1 ? (kWidth - 2 * kMargin) / static_cast<double>(values.size() - 1) : 0.0;
  svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = kMargin + dx * static_cast<double>(i);
    const double y = kHeight - kMargin - (values[i] - lo) / span * (kHeight - 2 * kMargin);
    svg << x << ',' << y << ' ';
  }
  svg << "\"/>\n";
}

}  // namespace

std::string truth_vs_estimate_svg(const std::string& title, const std::vector<double>& truth,
                                  const std::vector<double>& estimate) {
  if (truth.size() != estimate.size()) throw std::invalid_argument("plot: series lengths differ");
  double lo = 0.0;
  double hi = 0.0;
  for (const auto* s : {&truth, &estimate}) {
    if (s->empty()) continue;
    lo = std::min(lo, *std::min_element(s->begin(), s->end()));
    hi = std::max(hi, *std::max_element(s->begin(), s->end()));
  }

  std::ostringstream svg;
  svg.precision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kMargin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << escape(title)
      << "</text>\n";
  svg << "<text x=\"" << kWidth - 220 << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"12\">"
      << "<tspan fill=\"red\">actual</tspan> / <tspan fill=\"blue\">predicted</tspan> (W)</text>\n";
  svg << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin << "\" y2=\""
      << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\""
      << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  polyline(svg, truth, lo, hi, "red");
  polyline(svg, estimate, lo, hi, "blue");
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace deepdisagg
