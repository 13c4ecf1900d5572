#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "subfit/harness.hpp"
#include "subfit/matrix_io.hpp"

namespace subfit {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 170;
constexpr int kMarginTop = 30;
constexpr int kMarginBottom = 55;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

std::string point_label(double alpha, int n_sup) {
  std::string a = std::isinf(alpha) ? "inf" : fmt(alpha);
  return "alpha=" + a + ", nsup=" + std::to_string(n_sup);
}

struct LogAxis {
  double lo = 0.0, hi = 1.0;  // log10 bounds
  double map(double value, double pixel_lo, double pixel_hi) const {
    const double t = (std::log10(value) - lo) / std::max(hi - lo, 1e-12);
    return pixel_hi + t * (pixel_lo - pixel_hi);  // larger values higher up
  }
};

// Shifts nonpositive values to half the smallest positive one so they stay
// plottable on the log axis.
double clamp_positive(double v, double min_positive) {
  return v > 0.0 ? v : 0.5 * min_positive;
}

void write_heatmap(std::ofstream& out, const SweepResult& result) {
  std::set<int> p_set, k_set;
  double min_pos = std::numeric_limits<double>::infinity();
  double max_val = 0.0;
  for (const auto& rec : result.averaged) {
    p_set.insert(rec.p);
    k_set.insert(rec.k);
    if (std::isfinite(rec.e_out) && rec.e_out > 0.0) {
      min_pos = std::min(min_pos, rec.e_out);
      max_val = std::max(max_val, rec.e_out);
    }
  }
  if (!std::isfinite(min_pos)) { min_pos = 1e-12; max_val = 1.0; }
  const double log_lo = std::log10(min_pos);
  const double log_hi = std::log10(std::max(max_val, min_pos * 10));

  std::map<int, int> p_pos, k_pos;
  int idx = 0;
  for (int p : p_set) p_pos[p] = idx++;
  idx = 0;
  for (int k : k_set) k_pos[k] = idx++;
  const double cell_w =
      static_cast<double>(kWidth - kMarginLeft - kMarginRight) / p_set.size();
  const double cell_h =
      static_cast<double>(kHeight - kMarginTop - kMarginBottom) / k_set.size();

  for (const auto& rec : result.averaged) {
    if (!std::isfinite(rec.e_out)) continue;  // undefined k > p cells stay blank
    const double v = clamp_positive(rec.e_out, min_pos);
    const double t = (std::log10(v) - log_lo) / std::max(log_hi - log_lo, 1e-12);
    const int red = static_cast<int>(std::lround(255 * t));
    const int blue = 255 - red;
    const double x = kMarginLeft + p_pos[rec.p] * cell_w;
    // k grows upward from the bottom of the plot area
    const double y = kHeight - kMarginBottom - (k_pos[rec.k] + 1) * cell_h;
    out << "  <rect class=\"cell\" x=\"" << fmt(x) << "\" y=\"" << fmt(y)
        << "\" width=\"" << fmt(cell_w) << "\" height=\"" << fmt(cell_h)
        << "\" fill=\"rgb(" << red << ",40," << blue << ")\"/>\n";
  }
  out << "  <text x=\"" << (kWidth - kMarginRight + 10) << "\" y=\"" << kMarginTop + 10
      << "\" font-size=\"12\">log10 e_out in [" << fmt(log_lo) << ", "
      << fmt(log_hi) << "]</text>\n";
  out << "  <text x=\"" << (kMarginLeft + (kWidth - kMarginLeft - kMarginRight) / 2)
      << "\" y=\"" << (kHeight - 12)
      << "\" text-anchor=\"middle\" font-size=\"14\">number of features p</text>\n";
  out << "  <text transform=\"translate(18," << (kMarginTop + (kHeight - kMarginTop - kMarginBottom) / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"14\">subspace rank k</text>\n";
}

void write_curves(std::ofstream& out, const SweepResult& result) {
  std::vector<std::pair<double, int>> points;  // first-seen trajectory order
  std::map<std::pair<double, int>, std::vector<const AveragedRecord*>> by_point;
  double min_pos = std::numeric_limits<double>::infinity();
  double max_val = 0.0;
  int p_lo = std::numeric_limits<int>::max(), p_hi = std::numeric_limits<int>::min();
  for (const auto& rec : result.averaged) {
    const auto key = std::make_pair(rec.alpha, rec.n_sup);
    if (by_point.find(key) == by_point.end()) points.push_back(key);
    by_point[key].push_back(&rec);
    if (std::isfinite(rec.e_out)) {
      if (rec.e_out > 0.0) min_pos = std::min(min_pos, rec.e_out);
      max_val = std::max(max_val, rec.e_out);
      p_lo = std::min(p_lo, rec.p);
      p_hi = std::max(p_hi, rec.p);
    }
  }
  if (!std::isfinite(min_pos)) { min_pos = 1e-12; max_val = 1.0; }
  if (p_hi <= p_lo) p_hi = p_lo + 1;

  LogAxis axis{std::floor(std::log10(min_pos)),
               std::ceil(std::log10(std::max(max_val, min_pos * 10)))};
  const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const double y0 = kMarginTop, y1 = kHeight - kMarginBottom;
  auto x_of = [&](int p) {
    return x0 + (static_cast<double>(p - p_lo) / (p_hi - p_lo)) * (x1 - x0);
  };

  // axes
  out << "  <line x1=\"" << x0 << "\" y1=\"" << y1 << "\" x2=\"" << x1
      << "\" y2=\"" << y1 << "\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0
      << "\" y2=\"" << y1 << "\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(axis.lo); e <= static_cast<int>(axis.hi); ++e) {
    const double y = axis.map(std::pow(10.0, e), y0, y1);
    out << "  <line x1=\"" << (x0 - 4) << "\" y1=\"" << fmt(y) << "\" x2=\"" << x0
        << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << (x0 - 8) << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">1e" << e << "</text>\n";
  }
  const int x_ticks = std::min(8, p_hi - p_lo);
  for (int t = 0; t <= x_ticks; ++t) {
    const int p = p_lo + static_cast<int>(std::lround(
                             t * static_cast<double>(p_hi - p_lo) / x_ticks));
    out << "  <line x1=\"" << fmt(x_of(p)) << "\" y1=\"" << y1 << "\" x2=\""
        << fmt(x_of(p)) << "\" y2=\"" << (y1 + 4) << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << fmt(x_of(p)) << "\" y=\"" << (y1 + 18)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << p << "</text>\n";
  }
  out << "  <text x=\"" << ((x0 + x1) / 2) << "\" y=\"" << (kHeight - 12)
      << "\" text-anchor=\"middle\" font-size=\"14\">number of features p</text>\n";
  out << "  <text transform=\"translate(18," << ((y0 + y1) / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"14\">out-of-sample error</text>\n";

  int color = 0;
  for (const auto& key : points) {
    std::vector<const AveragedRecord*> recs = by_point[key];
    std::sort(recs.begin(), recs.end(),
              [](const AveragedRecord* a, const AveragedRecord* b) { return a->p < b->p; });
    std::ostringstream pts;
    for (const AveragedRecord* rec : recs) {
      if (!std::isfinite(rec->e_out)) continue;
      pts << fmt(x_of(rec->p)) << ','
          << fmt(axis.map(clamp_positive(rec->e_out, min_pos), y0, y1)) << ' ';
    }
    const char* stroke = kPalette[color % 10];
    out << "  <polyline class=\"curve\" fill=\"none\" stroke=\"" << stroke
        << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    out << "  <text x=\"" << (x1 + 10) << "\" y=\"" << (y0 + 14 + 16 * color)
        << "\" font-size=\"12\" fill=\"" << stroke << "\">"
        << point_label(key.first, key.second) << "</text>\n";
    ++color;
  }
}

}  // namespace

void plot_curves(const SweepResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);

  std::set<int> k_set;
  for (const auto& rec : result.averaged) k_set.insert(rec.k);

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  out << "  <rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  if (k_set.size() > 1)
    write_heatmap(out, result);
  else
    write_curves(out, result);
  out << "</svg>\n";
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace subfit
