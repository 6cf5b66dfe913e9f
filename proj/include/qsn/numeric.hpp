#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "qsn/rng.hpp"

namespace qsn {

inline double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean: empty input");
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// unbiased sample standard deviation
inline double sample_stdev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double stderr_of_mean(std::span<const double> v) {
  return v.empty() ? 0.0 : sample_stdev(v) / std::sqrt(static_cast<double>(v.size()));
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("pearson: need two equal-length series");
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0)
    throw std::invalid_argument("pearson: degenerate series");
  return sxy / std::sqrt(sxx * syy);
}

// linear-interpolated percentile, p in [0,1]
inline double percentile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("percentile: empty input");
  std::sort(v.begin(), v.end());
  const double idx = p * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(idx));
  const size_t hi = static_cast<size_t>(std::ceil(idx));
  const double frac = idx - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

// Result of fitting mean(x) = A * f^x through log-linear least squares.
struct ExpFit {
  double a = 1.0;        // amplitude exp(intercept)
  double f = 1.0;        // decay base exp(slope), clamped to <= 1
  double slope = 0.0;    // pre-clamp slope
  double slope_se = 0.0;
  double residual = 0.0;  // rms residual in log space
  bool clipped = false;   // some mean was at or below the floor
  bool clamped = false;   // fitted f exceeded 1
};

// Weighted log-linear fit of ln(mean) against x. Weights are the delta-method
// inverse variances (mean/stderr)^2; if any stderr is missing (<= 0) the fit
// falls back to unweighted. Means at or below `floor` are clipped to it.
inline ExpFit fit_exponential_loglinear(std::span<const double> x,
                                        std::span<const double> means,
                                        std::span<const double> stderrs,
                                        double floor = 1e-3) {
  const size_t m = x.size();
  if (means.size() != m || (!stderrs.empty() && stderrs.size() != m))
    throw std::invalid_argument("fit: mismatched series lengths");
  if (m < 2) throw std::invalid_argument("fit: need at least two points");

  ExpFit out;
  std::vector<double> y(m), w(m, 1.0);
  bool weighted = !stderrs.empty();
  if (weighted)
    for (double s : stderrs)
      if (!(s > 0.0)) weighted = false;
  for (size_t i = 0; i < m; ++i) {
    double v = means[i];
    if (v <= floor) {
      v = floor;
      out.clipped = true;
    }
    y[i] = std::log(v);
    if (weighted) w[i] = (v / stderrs[i]) * (v / stderrs[i]);
  }

  // centered accumulation: disparate weights (a bootstrap resample can give
  // one point a near-zero stderr) would cancel catastrophically in the raw
  // normal-equation determinant
  double sw = 0, swx = 0, swy = 0;
  for (size_t i = 0; i < m; ++i) {
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
  }
  const double xbar = swx / sw, ybar = swy / sw;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < m; ++i) {
    const double dx = x[i] - xbar;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * (y[i] - ybar);
  }
  if (!(sxx > 0)) throw std::invalid_argument("fit: degenerate abscissae");
  out.slope = sxy / sxx;
  const double intercept = ybar - out.slope * xbar;
  out.a = std::exp(intercept);
  out.f = std::exp(out.slope);
  if (out.f > 1.0) {
    out.f = 1.0;
    out.clamped = true;
  }
  double ss = 0;
  for (size_t i = 0; i < m; ++i) {
    const double r = y[i] - (intercept + out.slope * x[i]);
    ss += w[i] * r * r;
  }
  out.residual = std::sqrt(ss / sw);
  // weighted slope variance; for the unweighted case scale by residual
  // variance with m-2 degrees of freedom
  if (weighted) {
    out.slope_se = std::sqrt(1.0 / sxx);
  } else if (m > 2) {
    const double s2 = ss / static_cast<double>(m - 2);
    out.slope_se = std::sqrt(s2 / sxx);
  }
  return out;
}

// No-intercept least squares of ln(value) = -rate * x, the form used by the
// quasi-static analysis: rate = -sum(x ln v) / sum(x^2). A lone x=0 point
// contributes nothing; values above 1 are legal (negative log).
inline double fit_rate_no_intercept(std::span<const double> x,
                                    std::span<const double> values) {
  if (x.size() != values.size() || x.empty())
    throw std::invalid_argument("fit_rate: mismatched series");
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(values[i] > 0.0))
      throw std::invalid_argument("fit_rate: values must be positive");
    sxx += x[i] * x[i];
    sxy += x[i] * std::log(values[i]);
  }
  if (sxx == 0) throw std::invalid_argument("fit_rate: all depths zero");
  return -sxy / sxx;
}

// one bootstrap resample of {0, ..., count-1}
inline std::vector<int> resample_indices(int count, RngStream& rng) {
  std::vector<int> idx(static_cast<size_t>(count));
  for (auto& i : idx) i = static_cast<int>(rng.below(static_cast<uint32_t>(count)));
  return idx;
}

// normal truncated to (0, inf) by rejection
inline double sample_truncated_normal(double mu, double sd, RngStream& rng) {
  if (!(mu > 0.0)) throw std::invalid_argument("truncated normal: need mu > 0");
  for (;;) {
    const double v = mu + sd * rng.normal();
    if (v > 0.0) return v;
  }
}

}  // namespace qsn
