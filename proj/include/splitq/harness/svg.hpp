#pragma once

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "splitq/harness/runner.hpp"

namespace splitq::harness {

namespace detail {

inline std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape_xml(const std::string& s) {
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

}  // namespace detail

/// Line chart of the smoothed mean return of each label. Output depends only
/// on the curve values.
inline std::string learning_curves_svg(const CurveSet& set, const std::string& title, std::size_t window = 20) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  constexpr double kWidth = 720, kHeight = 420, kLeft = 60, kRight = 150, kTop = 40, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  std::vector<std::vector<double>> smooth;
  std::size_t episodes = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& curve : set.curves) {
    std::vector<double> means;
    for (const auto& m : curve) means.push_back(m.mean);
    smooth.push_back(moving_average(means, window));
    episodes = std::max(episodes, means.size());
    for (double v : smooth.back()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo <= hi)) lo = hi = 0.0;
  if (hi - lo < 1e-9) {
    lo -= 1.0;
    hi += 1.0;
  }
  auto x_of = [&](std::size_t e) {
    return kLeft + (episodes > 1 ? plot_w * static_cast<double>(e) / static_cast<double>(episodes - 1) : 0.0);
  };
  auto y_of = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
     << detail::escape_xml(title) << " (" << window << "-episode moving average)</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << detail::fixed(y_of(v) + 4)
       << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << detail::fixed(v) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
     << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">episode (0.."
     << (episodes ? episodes - 1 : 0) << ")</text>\n";
  for (std::size_t k = 0; k < smooth.size(); ++k) {
    const char* color = kColors[k % (sizeof kColors / sizeof *kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t e = 0; e < smooth[k].size(); ++e) {
      if (e) os << ' ';
      os << detail::fixed(x_of(e)) << ',' << detail::fixed(y_of(smooth[k][e]));
    }
    os << "\"/>\n";
    const double ly = kTop + 16.0 * static_cast<double>(k) + 8.0;
    os << "<line x1=\"" << kLeft + plot_w + 10 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + plot_w + 30
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kLeft + plot_w + 36 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << detail::escape_xml(set.labels[k]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace splitq::harness
