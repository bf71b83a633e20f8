#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "experiment.hpp"

namespace fcomp::bench {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 130.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* colour(Algorithm a) {
  switch (a) {
    case Algorithm::Omp: return "#1f77b4";
    case Algorithm::Fomp: return "#ff7f0e";
    case Algorithm::Comp: return "#2ca02c";
    case Algorithm::Fcomp: return "#d62728";
  }
  return "#000000";
}

struct Axis {
  double lo;
  double hi;
  bool log;

  double map(double v, double pixel_lo, double pixel_hi) const {
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(v) : v;
    const double t = b > a ? (x - a) / (b - a) : 0.5;
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }
};

template <typename Value>
std::string render(std::span<const SummaryRow> rows, const std::string& title,
                   const std::string& y_label, bool log_y, Value&& value) {
  std::map<Algorithm, std::vector<std::pair<double, double>>> series;
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  for (const SummaryRow& r : rows) {
    const double x = static_cast<double>(r.n_star);
    const double y = value(r);
    if (log_y && !(y > 0.0)) continue;
    series[r.algorithm].emplace_back(x, y);
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
    y_lo = std::min(y_lo, y);
    y_hi = std::max(y_hi, y);
  }

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n",
      kWidth, kHeight, kWidth / 2.0, title);

  const double px_lo = kLeft;
  const double px_hi = kWidth - kRight;
  const double py_lo = kHeight - kBottom;
  const double py_hi = kTop;
  svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
                     px_lo, py_hi, px_hi - px_lo, py_lo - py_hi);
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">N* (grid nodes per axis)</text>\n",
                     (px_lo + px_hi) / 2.0, kHeight - 18.0);
  svg += fmt::format(
      "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
      (py_lo + py_hi) / 2.0, y_label);

  if (series.empty()) {
    svg += "</svg>\n";
    return svg;
  }
  if (!log_y) {
    y_lo = std::min(0.0, y_lo);
    if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  } else if (y_hi <= y_lo) {
    y_lo /= 2.0;
    y_hi *= 2.0;
  }
  const Axis x_axis{x_lo, x_hi > x_lo ? x_hi : x_lo * 2.0, true};
  const Axis y_axis{y_lo, y_hi, log_y};

  // Ticks at each swept N* and at the y-range ends.
  for (const auto& [algo, pts] : series) {
    for (const auto& [x, y] : pts) {
      const double px = x_axis.map(x, px_lo, px_hi);
      svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", px,
                         py_lo + 16.0, static_cast<long long>(x));
    }
    break;
  }
  for (const double y : {y_lo, y_hi}) {
    const double py = y_axis.map(y, py_lo, py_hi);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3g}</text>\n", px_lo - 6.0,
                       py + 4.0, y);
  }

  double legend_y = kTop + 10.0;
  for (const auto& [algo, pts] : series) {
    std::string points;
    for (const auto& [x, y] : pts) {
      points += fmt::format("{:.2f},{:.2f} ", x_axis.map(x, px_lo, px_hi), y_axis.map(y, py_lo, py_hi));
    }
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
                       colour(algo), points);
    for (const auto& [x, y] : pts) {
      svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3.5\" fill=\"{}\"/>\n",
                         x_axis.map(x, px_lo, px_hi), y_axis.map(y, py_lo, py_hi), colour(algo));
    }
    svg += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>"
        "<text x=\"{4}\" y=\"{5}\">{6}</text>\n",
        px_hi + 12.0, legend_y, px_hi + 36.0, colour(algo), px_hi + 42.0, legend_y + 4.0,
        to_string(algo));
    legend_y += 20.0;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace

std::string render_time_chart(std::span<const SummaryRow> rows) {
  return render(rows, "Median solve time", "time [ns] (log scale)", true,
                [](const SummaryRow& r) { return r.time_median_ns; });
}

std::string render_miss_chart(std::span<const SummaryRow> rows) {
  return render(rows, "Miss rate", "miss rate", false,
                [](const SummaryRow& r) { return r.miss_rate; });
}

}  // namespace fcomp::bench
