#pragma once

#include <string>
#include <vector>

namespace sfod {

/// Small CSV builder. The first line is `# config: ...`, the second the
/// header. Cells are written as given; numbers should go through `cell()`.
class CsvTable {
 public:
  CsvTable(std::string config_line, std::vector<std::string> header);

  void add_row(std::vector<std::string> row);
  std::string str() const;

 private:
  std::string config_line_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Shortest round-trip text for a double.
std::string cell(double value);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  /// Optional marker: index into the first series.
  int highlight = -1;
};

/// Self-contained SVG document.
std::string render_svg(const LinePlot& plot);

}  // namespace sfod
