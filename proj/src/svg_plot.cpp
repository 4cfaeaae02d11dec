#include "ahfl/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace ahfl::svg {

namespace {

constexpr double kLeft = 80.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

std::string num(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.2f", v);
  return buf.data();
}

std::string tick_label(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%g", v);
  return buf.data();
}

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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return lo > hi; }
};

// Rounded step for about `target` ticks across [lo, hi].
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
  return nice * mag;
}

}  // namespace

std::string palette(std::size_t i) {
  static const std::array<const char*, 8> colors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  return colors[i % colors.size()];
}

std::string render(const Chart& chart) {
  auto ty = [&](double v) { return chart.log_y ? std::log10(v) : v; };
  auto usable = [&](double v) { return std::isfinite(v) && (!chart.log_y || v > 0.0); };

  Range xr, yr;
  for (const auto& s : chart.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.y[i])) continue;
      xr.add(s.x[i]);
      yr.add(ty(s.y[i]));
    }
  }
  for (const auto& h : chart.hlines) {
    if (usable(h.y)) yr.add(ty(h.y));
  }
  if (xr.empty()) xr = Range{0.0, 1.0};
  if (yr.empty()) yr = Range{0.0, 1.0};
  if (xr.hi == xr.lo) xr.hi = xr.lo + 1.0;
  if (yr.hi == yr.lo) {
    yr.lo -= 0.5;
    yr.hi += 0.5;
  }
  if (!chart.log_y) {
    const double pad = 0.05 * (yr.hi - yr.lo);
    yr.lo = yr.lo >= 0.0 ? std::max(0.0, yr.lo - pad) : yr.lo - pad;
    yr.hi += pad;
  }

  const double w = chart.width;
  const double h = chart.height;
  const double pw = w - kLeft - kRight;
  const double ph = h - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (ty(y) - yr.lo) / (yr.hi - yr.lo) * ph; };
  auto py_raw = [&](double t) { return kTop + ph - (t - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(chart.title) + "</text>\n";

  // Axes and ticks.
  out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" +
         num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  const double xs = nice_step(xr.hi - xr.lo, 6);
  for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi + 1e-9 * xs; t += xs) {
    out += "<line x1=\"" + num(px(t)) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(px(t)) +
           "\" y2=\"" + num(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(px(t)) + "\" y=\"" + num(kTop + ph + 18) +
           "\" text-anchor=\"middle\">" + tick_label(t) + "</text>\n";
  }
  const double ys = chart.log_y ? std::max(1.0, std::round(nice_step(yr.hi - yr.lo, 6)))
                                : nice_step(yr.hi - yr.lo, 6);
  for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi + 1e-9 * ys; t += ys) {
    const std::string label = chart.log_y ? "1e" + tick_label(t) : tick_label(t);
    out += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(py_raw(t)) + "\" x2=\"" + num(kLeft + pw) +
           "\" y2=\"" + num(py_raw(t)) + "\" stroke=\"#dddddd\"/>\n";
    out += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(py_raw(t) + 4) +
           "\" text-anchor=\"end\">" + label + "</text>\n";
  }
  out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(h - 12) + "\" text-anchor=\"middle\">" +
         escape(chart.x_label) + "</text>\n";
  out += "<text transform=\"translate(18," + num(kTop + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(chart.y_label) + "</text>\n";

  double legend_y = kTop + 10;
  const double legend_x = kLeft + pw + 12;

  for (const auto& s : chart.series) {
    std::string pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.y[i])) continue;
      pts += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
    }
    out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"" + pts +
           "\"/>\n";
    out += "<line x1=\"" + num(legend_x) + "\" y1=\"" + num(legend_y) + "\" x2=\"" +
           num(legend_x + 20) + "\" y2=\"" + num(legend_y) + "\" stroke=\"" + s.color +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(legend_x + 26) + "\" y=\"" + num(legend_y + 4) + "\">" +
           escape(s.label) + "</text>\n";
    legend_y += 18;
  }
  for (const auto& hl : chart.hlines) {
    if (!usable(hl.y)) continue;
    const std::string dash = hl.dashed ? " stroke-dasharray=\"6,4\"" : "";
    out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(py(hl.y)) + "\" x2=\"" + num(kLeft + pw) +
           "\" y2=\"" + num(py(hl.y)) + "\" stroke=\"" + hl.color + "\"" + dash + "/>\n";
    // Label sits just above the line at the right edge, over a white halo.
    const std::string pos = "<text x=\"" + num(kLeft + pw - 4) + "\" y=\"" + num(py(hl.y) - 4) +
                            "\" text-anchor=\"end\" ";
    out += pos + "fill=\"white\" stroke=\"white\" stroke-width=\"3\">" + escape(hl.label) + "</text>\n";
    out += pos + "fill=\"" + hl.color + "\">" + escape(hl.label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace ahfl::svg
