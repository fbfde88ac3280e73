#include "mvpose/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mvpose {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b"};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// A readable tick step: 1, 2 or 5 times a power of ten.
double nice_step(double range, int target_ticks) {
  if (range <= 0) return 1.0;
  const double raw = range / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double mult : {1.0, 2.0, 5.0, 10.0})
    if (raw <= mult * mag) return mult * mag;
  return 10.0 * mag;
}

}  // namespace

std::string SvgChart::render() const {
  if (series.empty()) throw std::invalid_argument("svg chart has no series");
  double xmin = series[0].x[0], xmax = xmin, ymin = 0.0, ymax = 0.0;
  for (const SvgSeries& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty())
      throw std::invalid_argument("svg series needs matching nonempty x/y");
    for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
    for (double v : s.y) ymax = std::max(ymax, v);
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  ymax *= 1.08;
  if (ymax <= 0) ymax = 1.0;

  const double ml = 64, mr = 16, mt = 36, mb = 48;
  const double pw = width - ml - mr, ph = height - mt - mb;
  const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  const auto py = [&](double y) { return mt + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";

  // Grid and ticks.
  const double ystep = nice_step(ymax - ymin, 6);
  for (double y = 0; y <= ymax + 1e-12; y += ystep) {
    out << "<line x1=\"" << ml << "\" y1=\"" << fmt(py(y)) << "\" x2=\"" << ml + pw
        << "\" y2=\"" << fmt(py(y)) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << fmt(py(y) + 4)
        << "\" text-anchor=\"end\">" << fmt(y) << "</text>\n";
  }
  const double xstep = nice_step(xmax - xmin, 8);
  for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-12; x += xstep) {
    out << "<line x1=\"" << fmt(px(x)) << "\" y1=\"" << mt + ph << "\" x2=\""
        << fmt(px(x)) << "\" y2=\"" << mt + ph + 4 << "\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << fmt(px(x)) << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\">" << fmt(x) << "</text>\n";
  }
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << mt + ph / 2
      << ")\">" << y_label << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const SvgSeries& s = series[i];
    const char* color = kColors[i % (sizeof kColors / sizeof *kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k)
      out << fmt(px(s.x[k])) << "," << fmt(py(s.y[k])) << " ";
    out << "\"/>\n";
    for (std::size_t k = 0; k < s.x.size(); ++k)
      out << "<circle cx=\"" << fmt(px(s.x[k])) << "\" cy=\"" << fmt(py(s.y[k]))
          << "\" r=\"3\" fill=\"" << color << "\" data-series=\"" << s.label
          << "\" data-x=\"" << fmt(s.x[k]) << "\" data-y=\"" << fmt(s.y[k])
          << "\"/>\n";
    // Legend entry.
    const double ly = mt + 16 + 16 * static_cast<double>(i);
    out << "<line x1=\"" << ml + pw - 120 << "\" y1=\"" << ly << "\" x2=\""
        << ml + pw - 96 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << ml + pw - 90 << "\" y=\"" << ly + 4 << "\">" << s.label
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_svg(const SvgChart& chart, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << chart.render();
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace mvpose
