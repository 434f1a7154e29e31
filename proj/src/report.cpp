#include "sfod/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "sfod/errors.hpp"

namespace sfod {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 60.0;
constexpr std::array<const char*, 4> kColors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void settle() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  double map(double v, double a, double b) const { return a + (v - lo) / (hi - lo) * (b - a); }
};

}  // namespace

CsvTable::CsvTable(std::string config_line, std::vector<std::string> header)
    : config_line_(std::move(config_line)), header_(std::move(header)) {
  if (config_line_.find('\n') != std::string::npos) {
    throw ContractViolation("CSV config line must be a single line");
  }
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) {
    throw ContractViolation(
        fmt::format("CSV row has {} cells, header has {}", row.size(), header_.size()));
  }
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out = "# config: " + config_line_ + "\n";
  out += fmt::format("{}\n", fmt::join(header_, ","));
  for (const auto& row : rows_) {
    out += fmt::format("{}\n", fmt::join(row, ","));
  }
  return out;
}

std::string cell(double value) { return fmt::format("{}", value); }

std::string render_svg(const LinePlot& plot) {
  Range xr;
  Range yr;
  for (const auto& s : plot.series) {
    if (s.x.size() != s.y.size()) {
      throw ContractViolation("plot series x and y differ in length");
    }
    for (double v : s.x) {
      xr.add(v);
    }
    for (double v : s.y) {
      yr.add(v);
    }
  }
  xr.settle();
  yr.settle();
  const double left = kMargin;
  const double right = kWidth - 20.0;
  const double top = 40.0;
  const double bottom = kHeight - kMargin;
  auto px = [&](double x) { return xr.map(x, left, right); };
  auto py = [&](double y) { return yr.map(y, bottom, top); };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight, kWidth, kHeight);
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                     kWidth / 2, escape_xml(plot.title));
  out += fmt::format(
      "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"black\"/>\n"
      "<line x1=\"{0}\" y1=\"{3}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n",
      left, right, bottom, top);
  for (int t = 0; t <= 4; ++t) {
    const double fx = xr.lo + (xr.hi - xr.lo) * t / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * t / 4.0;
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n",
                       px(fx), bottom + 16, fx);
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n",
                       left - 6, py(fy) + 4, fy);
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", (left + right) / 2,
                     kHeight - 16, escape_xml(plot.x_label));
  out += fmt::format(
      "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
      (top + bottom) / 2, escape_xml(plot.y_label));

  for (std::size_t s = 0; s < plot.series.size(); ++s) {
    const auto& series = plot.series[s];
    const char* color = kColors[s % kColors.size()];
    std::string points;
    for (std::size_t i = 0; i < series.x.size(); ++i) {
      if (std::isfinite(series.x[i]) && std::isfinite(series.y[i])) {
        points += fmt::format("{:.2f},{:.2f} ", px(series.x[i]), py(series.y[i]));
      }
    }
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
                       color, points);
    out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", right - 150,
                       top + 16 * (s + 1), color, escape_xml(series.name));
  }
  if (!plot.series.empty() && plot.highlight >= 0 &&
      static_cast<std::size_t>(plot.highlight) < plot.series[0].x.size()) {
    const auto i = static_cast<std::size_t>(plot.highlight);
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"5\" fill=\"none\" stroke=\"black\"/>\n",
                       px(plot.series[0].x[i]), py(plot.series[0].y[i]));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace sfod
