#pragma once

#include <string>
#include <vector>

namespace oblab {

/// Minimal SVG line-plot writer for trace and free-boundary figures. One
/// fixed-size canvas, linear or log x axis, a handful of series with
/// automatic bounds and tick labels. Deterministic output.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel, bool log_x = false);

  void add_series(const std::string& name, const std::vector<double>& x,
                  const std::vector<double>& y);
  void add_points(const std::string& name, const std::vector<double>& x,
                  const std::vector<double>& y);

  void write(const std::string& path) const;

 private:
  struct Series {
    std::string name;
    std::vector<double> x, y;
    bool line = true;
  };
  std::string title_, xlabel_, ylabel_;
  bool log_x_;
  std::vector<Series> series_;
};

}  // namespace oblab
