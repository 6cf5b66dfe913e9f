// Minimal SVG plotter: line charts, heatmaps, and violin summaries emitted
// as plain strings. The CSV files are the source of truth; these renderings
// exist so a run can be eyeballed without any external plotting stack.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsn::svg {

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

inline const char* palette(size_t i) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return kColors[i % (sizeof(kColors) / sizeof(kColors[0]))];
}

// dark-to-bright perceptual ramp sampled at u in [0, 1]
inline std::string ramp(double u) {
  static const double stops[][3] = {
      {0.267, 0.005, 0.329}, {0.254, 0.265, 0.530}, {0.164, 0.471, 0.558},
      {0.135, 0.659, 0.518}, {0.478, 0.821, 0.318}, {0.993, 0.906, 0.144}};
  constexpr int n = 6;
  u = std::clamp(u, 0.0, 1.0);
  const double pos = u * (n - 1);
  const int i = std::min(n - 2, static_cast<int>(pos));
  const double t = pos - i;
  char buf[8];
  std::string out = "#";
  for (int c = 0; c < 3; ++c) {
    const double v = stops[i][c] + t * (stops[i + 1][c] - stops[i][c]);
    std::snprintf(buf, sizeof(buf), "%02x",
                  static_cast<int>(std::lround(255.0 * v)));
    out += buf;
  }
  return out;
}

// tick spacing from the 1-2-5 ladder
inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = 10.0 * mag;
  for (double m : {1.0, 2.0, 5.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 0.5 * step; t += step)
    out.push_back(std::fabs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    if (!std::isfinite(v))
      throw std::invalid_argument("plot: non-finite value");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  void pad(double frac) {
    if (!(hi >= lo)) throw std::invalid_argument("plot: empty range");
    if (hi == lo) {
      const double d = std::max(1.0, std::fabs(hi)) * 0.1;
      lo -= d;
      hi += d;
    } else {
      const double d = (hi - lo) * frac;
      lo -= d;
      hi += d;
    }
  }
};

class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h) {}

  void line(double x1, double y1, double x2, double y2,
            const std::string& stroke, double width = 1.0) {
    body_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\""
          << fmt(x2) << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << stroke
          << "\" stroke-width=\"" << fmt(width) << "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& stroke, double width = 1.5,
                const std::string& fill = "none") {
    body_ << "<polyline points=\"";
    for (const auto& [x, y] : pts) body_ << fmt(x) << "," << fmt(y) << " ";
    body_ << "\" fill=\"" << fill << "\" stroke=\"" << stroke
          << "\" stroke-width=\"" << fmt(width) << "\"/>\n";
  }

  void polygon(const std::vector<std::pair<double, double>>& pts,
               const std::string& fill, const std::string& stroke = "none") {
    body_ << "<polygon points=\"";
    for (const auto& [x, y] : pts) body_ << fmt(x) << "," << fmt(y) << " ";
    body_ << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke = "none") {
    body_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
          << fmt(w) << "\" height=\"" << fmt(h) << "\" fill=\"" << fill
          << "\" stroke=\"" << stroke << "\"/>\n";
  }

  void circle(double x, double y, double r, const std::string& fill) {
    body_ << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\""
          << fmt(r) << "\" fill=\"" << fill << "\"/>\n";
  }

  void text(double x, double y, const std::string& s, int size = 12,
            const std::string& anchor = "start", double rotate_deg = 0.0) {
    body_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y)
          << "\" font-size=\"" << size
          << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\"";
    if (rotate_deg != 0.0)
      body_ << " transform=\"rotate(" << fmt(rotate_deg) << " " << fmt(x)
            << " " << fmt(y) << ")\"";
    body_ << ">" << escape(s) << "</text>\n";
  }

  std::string str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_
        << "\" height=\"" << h_ << "\" viewBox=\"0 0 " << w_ << " " << h_
        << "\">\n<rect width=\"" << w_ << "\" height=\"" << h_
        << "\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '&')
        out += "&amp;";
      else if (c == '<')
        out += "&lt;";
      else if (c == '>')
        out += "&gt;";
      else
        out += c;
    }
    return out;
  }

  int w_, h_;
  std::ostringstream body_;
};

// plot rectangle with data-to-pixel mapping; y grows upward in data space
struct Frame {
  double x0, y0, w, h;
  Range xr, yr;

  double px(double x) const { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * w; }
  double py(double y) const {
    return y0 + h - (y - yr.lo) / (yr.hi - yr.lo) * h;
  }

  void draw_axes(Canvas& c, const std::string& xlabel,
                 const std::string& ylabel) const {
    c.rect(x0, y0, w, h, "none", "#333333");
    for (double t : nice_ticks(xr.lo, xr.hi)) {
      const double x = px(t);
      c.line(x, y0, x, y0 + h, "#dddddd", 0.6);
      c.text(x, y0 + h + 16, fmt(t), 11, "middle");
    }
    for (double t : nice_ticks(yr.lo, yr.hi)) {
      const double y = py(t);
      c.line(x0, y, x0 + w, y, "#dddddd", 0.6);
      c.text(x0 - 6, y + 4, fmt(t), 11, "end");
    }
    c.text(x0 + w / 2, y0 + h + 34, xlabel, 12, "middle");
    c.text(x0 - 52, y0 + h / 2, ylabel, 12, "middle", -90.0);
  }
};

}  // namespace detail

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

inline std::string line_plot(const std::string& title,
                             const std::string& xlabel,
                             const std::string& ylabel,
                             std::span<const Series> series, int width = 760,
                             int height = 460) {
  if (series.empty()) throw std::invalid_argument("line_plot: no series");
  detail::Frame f{70, 40, width - 100.0, height - 90.0, {}, {}};
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty())
      throw std::invalid_argument("line_plot: bad series \"" + s.label + "\"");
    for (double v : s.x) f.xr.include(v);
    for (double v : s.y) f.yr.include(v);
  }
  f.xr.pad(0.03);
  f.yr.pad(0.07);
  detail::Canvas c(width, height);
  c.text(width / 2.0, 22, title, 14, "middle");
  f.draw_axes(c, xlabel, ylabel);
  for (size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const std::string color = detail::palette(i);
    std::vector<std::pair<double, double>> pts;
    pts.reserve(s.x.size());
    for (size_t j = 0; j < s.x.size(); ++j)
      pts.emplace_back(f.px(s.x[j]), f.py(s.y[j]));
    if (pts.size() > 1) c.polyline(pts, color, 1.5);
    if (pts.size() <= 64)
      for (const auto& [x, y] : pts) c.circle(x, y, 2.5, color);
    if (series.size() > 1) {
      const double ly = f.y0 + 14 + 15.0 * static_cast<double>(i);
      c.line(f.x0 + f.w - 108, ly - 4, f.x0 + f.w - 88, ly - 4, color, 2.0);
      c.text(f.x0 + f.w - 84, ly, s.label, 11);
    }
  }
  return c.str();
}

// markers only, no connecting lines; with_diagonal adds a y = x guide
inline std::string scatter_plot(const std::string& title,
                                const std::string& xlabel,
                                const std::string& ylabel,
                                std::span<const Series> series,
                                bool with_diagonal = false, int width = 760,
                                int height = 460) {
  if (series.empty()) throw std::invalid_argument("scatter_plot: no series");
  detail::Frame f{70, 40, width - 100.0, height - 90.0, {}, {}};
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty())
      throw std::invalid_argument("scatter_plot: bad series \"" + s.label +
                                  "\"");
    for (double v : s.x) f.xr.include(v);
    for (double v : s.y) f.yr.include(v);
  }
  f.xr.pad(0.07);
  f.yr.pad(0.07);
  detail::Canvas c(width, height);
  c.text(width / 2.0, 22, title, 14, "middle");
  f.draw_axes(c, xlabel, ylabel);
  if (with_diagonal) {
    const double lo = std::max(f.xr.lo, f.yr.lo);
    const double hi = std::min(f.xr.hi, f.yr.hi);
    if (hi > lo) c.line(f.px(lo), f.py(lo), f.px(hi), f.py(hi), "#999999", 1.0);
  }
  for (size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const std::string color = detail::palette(i);
    for (size_t j = 0; j < s.x.size(); ++j)
      c.circle(f.px(s.x[j]), f.py(s.y[j]), 3.0, color);
    if (series.size() > 1) {
      const double ly = f.y0 + 14 + 15.0 * static_cast<double>(i);
      c.circle(f.x0 + f.w - 98, ly - 4, 3.0, color);
      c.text(f.x0 + f.w - 88, ly, s.label, 11);
    }
  }
  return c.str();
}

inline std::string heatmap(const std::string& title, const std::string& xlabel,
                           const std::string& ylabel,
                           std::span<const double> xs,
                           std::span<const double> ys,
                           std::span<const double> values, int width = 760,
                           int height = 460) {
  const size_t nx = xs.size(), ny = ys.size();
  if (nx == 0 || ny == 0 || values.size() != nx * ny)
    throw std::invalid_argument("heatmap: grid does not match values");
  detail::Range vr;
  for (double v : values) vr.include(v);
  if (vr.hi == vr.lo) vr.pad(0.0);
  detail::Frame f{70, 40, width - 130.0, height - 90.0, {}, {}};
  for (double v : xs) f.xr.include(v);
  for (double v : ys) f.yr.include(v);
  if (f.xr.hi == f.xr.lo) f.xr.pad(0.0);
  if (f.yr.hi == f.yr.lo) f.yr.pad(0.0);
  detail::Canvas c(width, height);
  c.text(width / 2.0, 22, title, 14, "middle");
  const double cw = f.w / static_cast<double>(nx);
  const double ch = f.h / static_cast<double>(ny);
  for (size_t iy = 0; iy < ny; ++iy)
    for (size_t ix = 0; ix < nx; ++ix) {
      const double u = (values[iy * nx + ix] - vr.lo) / (vr.hi - vr.lo);
      c.rect(f.x0 + cw * static_cast<double>(ix),
             f.y0 + f.h - ch * static_cast<double>(iy + 1), cw + 0.5,
             ch + 0.5, detail::ramp(u));
    }
  f.draw_axes(c, xlabel, ylabel);
  const double bx = f.x0 + f.w + 14;
  for (int i = 0; i < 64; ++i)
    c.rect(bx, f.y0 + f.h * (1.0 - (i + 1) / 64.0), 14, f.h / 64.0 + 0.5,
           detail::ramp(i / 63.0));
  c.text(bx + 18, f.y0 + 10, detail::fmt(vr.hi), 10);
  c.text(bx + 18, f.y0 + f.h, detail::fmt(vr.lo), 10);
  return c.str();
}

// one mirrored kernel-density silhouette per labeled sample group, with a
// median tick; groups may have as few as one point
inline std::string violin_plot(const std::string& title,
                               const std::string& ylabel,
                               std::span<const std::string> labels,
                               std::span<const std::vector<double>> groups,
                               int width = 760, int height = 460) {
  if (labels.size() != groups.size() || groups.empty())
    throw std::invalid_argument("violin_plot: labels do not match groups");
  detail::Frame f{70, 40, width - 100.0, height - 90.0, {}, {}};
  f.xr.include(0.0);
  f.xr.include(static_cast<double>(groups.size()));
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("violin_plot: empty group");
    for (double v : g) f.yr.include(v);
  }
  f.yr.pad(0.1);
  detail::Canvas c(width, height);
  c.text(width / 2.0, 22, title, 14, "middle");
  c.rect(f.x0, f.y0, f.w, f.h, "none", "#333333");
  for (double t : detail::nice_ticks(f.yr.lo, f.yr.hi)) {
    const double y = f.py(t);
    c.line(f.x0, y, f.x0 + f.w, y, "#dddddd", 0.6);
    c.text(f.x0 - 6, y + 4, detail::fmt(t), 11, "end");
  }
  c.text(f.x0 - 52, f.y0 + f.h / 2, ylabel, 12, "middle", -90.0);
  const double slot = f.w / static_cast<double>(groups.size());
  for (size_t g = 0; g < groups.size(); ++g) {
    std::vector<double> v = groups[g];
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    const double cx = f.x0 + slot * (static_cast<double>(g) + 0.5);
    double m = 0;
    for (double x : v) m += x / n;
    double sd = 0;
    for (double x : v) sd += (x - m) * (x - m);
    sd = v.size() > 1 ? std::sqrt(sd / (n - 1)) : 0.0;
    double bw = 0.9 * sd * std::pow(n, -0.2);
    if (!(bw > 0)) bw = std::max(1e-12, 0.02 * (f.yr.hi - f.yr.lo));
    constexpr int kGrid = 80;
    std::vector<double> gy(kGrid), gd(kGrid);
    double dmax = 0;
    for (int i = 0; i < kGrid; ++i) {
      gy[i] = v.front() - 2.5 * bw +
              (v.back() - v.front() + 5.0 * bw) * i / (kGrid - 1);
      double d = 0;
      for (double x : v) {
        const double z = (gy[i] - x) / bw;
        d += std::exp(-0.5 * z * z);
      }
      gd[i] = d;
      dmax = std::max(dmax, d);
    }
    const double half = 0.42 * slot;
    std::vector<std::pair<double, double>> shape;
    shape.reserve(2 * kGrid);
    for (int i = 0; i < kGrid; ++i)
      shape.emplace_back(cx - half * gd[i] / dmax, f.py(gy[i]));
    for (int i = kGrid - 1; i >= 0; --i)
      shape.emplace_back(cx + half * gd[i] / dmax, f.py(gy[i]));
    const std::string color = detail::palette(g);
    c.polygon(shape, color + "55", color);
    const double med = v.size() % 2 ? v[v.size() / 2]
                                    : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    c.line(cx - half * 0.6, f.py(med), cx + half * 0.6, f.py(med), "#222222",
           1.5);
    c.text(cx, f.y0 + f.h + 16, labels[g], 11, "middle");
  }
  return c.str();
}

}  // namespace qsn::svg
