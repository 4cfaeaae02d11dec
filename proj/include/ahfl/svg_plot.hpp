#pragma once

#include <string>
#include <vector>

// Minimal standalone SVG line charts.
namespace ahfl::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;
};

struct HLine {
  double y = 0.0;
  std::string label;
  std::string color;
  bool dashed = true;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 720;
  int height = 440;
  std::vector<Series> series;
  std::vector<HLine> hlines;
};

/// Renders a complete SVG document. Non-positive values are skipped on a log axis.
std::string render(const Chart& chart);

/// Stable color for the i-th series.
std::string palette(std::size_t i);

}  // namespace ahfl::svg
