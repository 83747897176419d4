#pragma once

#include <string>
#include <vector>

namespace barron {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
  bool markers = true;
};

struct ChartOptions {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  int width = 640;
  int height = 420;
};

// Standalone SVG document. Non-positive values are dropped on log axes.
std::string line_chart(const std::vector<Series>& series, const ChartOptions& opts);

}  // namespace barron
