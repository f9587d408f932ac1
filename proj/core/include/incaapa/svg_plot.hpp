#pragma once

// Minimal static SVG charts: line series and grouped bars on linear axes.

#include <string>
#include <vector>

namespace incaapa {

class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label);

  void add_line(std::string name, std::vector<double> x, std::vector<double> y);
  /// One bar group per category; each call adds one bar per category.
  void add_bars(std::string name, std::vector<double> values);
  void set_categories(std::vector<std::string> categories);

  /// Complete SVG document. Non-finite points are skipped.
  std::string render(int width = 720, int height = 440) const;

 private:
  struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
  };
  std::string title_;
  std::string x_label_;
  std::string y_label_;
  std::vector<Series> lines_;
  std::vector<Series> bars_;
  std::vector<std::string> categories_;
};

/// Round tick positions covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

}  // namespace incaapa
