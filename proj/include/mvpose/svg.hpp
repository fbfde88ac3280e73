#pragma once

#include <string>
#include <vector>

namespace mvpose {

// Minimal line/bar chart writer; enough for error-vs-views plots. The data
// points are also emitted as "data-x"/"data-y" attributes so the plotted
// values can be checked against the CSV they came from.
struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
  int width = 720;
  int height = 480;

  std::string render() const;
};

void write_svg(const SvgChart& chart, const std::string& path);

}  // namespace mvpose
