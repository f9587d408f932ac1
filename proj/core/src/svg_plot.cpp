#include "incaapa/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace incaapa {

namespace {

constexpr std::array<const char*, 8> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double raw = (hi - lo) / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = (norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0) * mag;
  const auto first = static_cast<long long>(std::floor(lo / step));
  const auto last = static_cast<long long>(std::ceil(hi / step));
  std::vector<double> ticks;
  for (long long k = first; k <= last; ++k) {
    ticks.push_back(static_cast<double>(k) * step);
  }
  if (ticks.size() < 2) ticks.push_back(ticks.back() + step);
  return ticks;
}

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgPlot::add_line(std::string name, std::vector<double> x, std::vector<double> y) {
  lines_.push_back({std::move(name), std::move(x), std::move(y)});
}

void SvgPlot::add_bars(std::string name, std::vector<double> values) {
  bars_.push_back({std::move(name), {}, std::move(values)});
}

void SvgPlot::set_categories(std::vector<std::string> categories) {
  categories_ = std::move(categories);
}

std::string SvgPlot::render(int width, int height) const {
  const double left = 70, right = 160, top = 40, bottom = 55;
  const double pw = width - left - right;
  const double ph = height - top - bottom;

  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const auto& s : lines_) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  const std::size_t groups = categories_.size();
  if (!bars_.empty()) {
    xmin = -0.5;
    xmax = static_cast<double>(groups) - 0.5;
    for (const auto& b : bars_) {
      for (double v : b.y) {
        if (!std::isfinite(v)) continue;
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 0;
    xmax = 1;
  }
  if (!std::isfinite(ymin)) {
    ymin = 0;
    ymax = 1;
  }
  const auto yt = nice_ticks(ymin, ymax);
  ymin = yt.front();
  ymax = yt.back();
  std::vector<double> xt;
  if (bars_.empty()) {
    xt = nice_ticks(xmin, xmax);
    xmin = xt.front();
    xmax = xt.back();
    bool integral = true;
    for (const auto& s : lines_) {
      for (double x : s.x) {
        if (std::isfinite(x) && x != std::round(x)) integral = false;
      }
    }
    // Integer-valued axes (node ids, cycles) get integer ticks only.
    if (integral) {
      std::erase_if(xt, [](double t) { return t != std::round(t); });
    }
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;

  const auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  const auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
    << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(title_) << "</text>\n";

  for (double t : yt) {
    o << "<line x1=\"" << num(left) << "\" x2=\"" << num(left + pw) << "\" y1=\"" << num(py(t))
      << "\" y2=\"" << num(py(t)) << "\" stroke=\"#e0e0e0\"/>\n";
    o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(t) + 4)
      << "\" text-anchor=\"end\">" << label(t) << "</text>\n";
  }
  for (double t : xt) {
    o << "<line x1=\"" << num(px(t)) << "\" x2=\"" << num(px(t)) << "\" y1=\"" << num(top)
      << "\" y2=\"" << num(top + ph) << "\" stroke=\"#f0f0f0\"/>\n";
    o << "<text x=\"" << num(px(t)) << "\" y=\"" << num(top + ph + 16)
      << "\" text-anchor=\"middle\">" << label(t) << "</text>\n";
  }
  for (std::size_t g = 0; g < groups && !bars_.empty(); ++g) {
    o << "<text x=\"" << num(px(static_cast<double>(g))) << "\" y=\"" << num(top + ph + 16)
      << "\" text-anchor=\"middle\">" << escape(categories_[g]) << "</text>\n";
  }
  o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
    << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 12.0)
    << "\" text-anchor=\"middle\">" << escape(x_label_) << "</text>\n";
  o << "<text transform=\"translate(18," << num(top + ph / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label_) << "</text>\n";

  std::size_t color = 0;
  std::vector<std::pair<std::string, std::string>> legend;
  for (const auto& s : lines_) {
    const char* stroke = kPalette[color++ % kPalette.size()];
    o << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double y = std::clamp(s.y[i], ymin, ymax);
      o << num(px(s.x[i])) << ',' << num(py(y)) << ' ';
    }
    o << "\"/>\n";
    legend.emplace_back(s.name, stroke);
  }
  if (!bars_.empty()) {
    const double group_width = 0.8;
    const double bar_width = group_width / static_cast<double>(bars_.size());
    const double base = std::clamp(0.0, ymin, ymax);
    for (std::size_t b = 0; b < bars_.size(); ++b) {
      const char* fill = kPalette[color++ % kPalette.size()];
      for (std::size_t g = 0; g < groups && g < bars_[b].y.size(); ++g) {
        const double v = bars_[b].y[g];
        if (!std::isfinite(v)) continue;
        const double x0 = static_cast<double>(g) - group_width / 2 + bar_width * static_cast<double>(b);
        const double y0 = py(std::max(v, base));
        const double y1 = py(std::min(v, base));
        o << "<rect x=\"" << num(px(x0)) << "\" y=\"" << num(y0) << "\" width=\""
          << num(px(x0 + bar_width) - px(x0)) << "\" height=\"" << num(y1 - y0)
          << "\" fill=\"" << fill << "\"/>\n";
      }
      legend.emplace_back(bars_[b].name, fill);
    }
  }
  for (std::size_t i = 0; i < legend.size(); ++i) {
    const double y = top + 10 + 18.0 * static_cast<double>(i);
    o << "<rect x=\"" << num(left + pw + 12) << "\" y=\"" << num(y - 8)
      << "\" width=\"12\" height=\"10\" fill=\"" << legend[i].second << "\"/>\n";
    o << "<text x=\"" << num(left + pw + 30) << "\" y=\"" << num(y + 1) << "\">"
      << escape(legend[i].first) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace incaapa
