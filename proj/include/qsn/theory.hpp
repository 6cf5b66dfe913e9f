#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "qsn/numeric.hpp"
#include "qsn/rng.hpp"

namespace qsn {

// Gaussian-distributed per-layer decay rate: the quasi-static toy model.
// Draws are untruncated; closed forms below are exact for this choice.
struct GaussianRate {
  double mu = 0.0;
  double sigma = 0.0;

  void validate() const {
    if (sigma < 0.0)
      throw std::invalid_argument("gaussian rate: sigma must be >= 0");
  }
};

// E[f^d] for f = e^{-G}, G ~ N(mu, sigma): the moment generating function
// of the Gaussian evaluated at -d.
inline double lognormal_moment(const GaussianRate& r, double d) {
  r.validate();
  if (d < 0.0) throw std::invalid_argument("lognormal_moment: d < 0");
  return std::exp(-d * r.mu + 0.5 * d * d * r.sigma * r.sigma);
}

inline double effective_depth(std::span<const int> depths) {
  double d2 = 0.0, d3 = 0.0;
  for (int d : depths) {
    if (d < 0) throw std::invalid_argument("effective_depth: negative depth");
    const double x = d;
    d2 += x * x;
    d3 += x * x * x;
  }
  if (d2 <= 0.0)
    throw std::invalid_argument("effective_depth: schedule is all zeros");
  return d3 / d2;
}

// rate recovered by the no-intercept log fit over a schedule, closed form
inline double fitted_rate(const GaussianRate& r, std::span<const int> depths) {
  r.validate();
  return r.mu - 0.5 * r.sigma * r.sigma * effective_depth(depths);
}

// the same rate via the explicit least-squares cost on exact moments
inline double fitted_rate_lsq(const GaussianRate& r,
                              std::span<const int> depths) {
  std::vector<double> x, v;
  x.reserve(depths.size());
  v.reserve(depths.size());
  for (int d : depths) {
    x.push_back(d);
    v.push_back(lognormal_moment(r, d));
  }
  return fit_rate_no_intercept(x, v);
}

// mitigated/ideal ratio when rates learned over a schedule with effective
// depth d_eff are applied at depth d
inline double quasi_static_bias(double sigma, double d, double d_eff) {
  return std::exp(0.5 * sigma * sigma * d * (d - d_eff));
}

// the full learn-then-mitigate pipeline evaluated on exact moments: fit the
// schedule curve, divide the depth-d moment by the predicted decay
inline double analytic_learn_mitigate(const GaussianRate& r,
                                      std::span<const int> schedule,
                                      double target_d) {
  const double mu_fit = fitted_rate_lsq(r, schedule);
  return lognormal_moment(r, target_d) * std::exp(target_d * mu_fit);
}

struct LearnMitigateMc {
  double bias = 0.0;     // mitigated/ideal ratio estimate
  double bias_se = 0.0;  // jackknife standard error over sample batches
};

// Monte Carlo twin of analytic_learn_mitigate: draw quasi-static rates,
// build the averaged schedule curve, fit, mitigate the target-depth average.
inline LearnMitigateMc simulate_learn_mitigate(const GaussianRate& r,
                                               std::span<const int> schedule,
                                               int target_d, int samples,
                                               uint64_t seed,
                                               int batches = 100) {
  r.validate();
  if (target_d < 0)
    throw std::invalid_argument("simulate_learn_mitigate: target_d < 0");
  if (batches < 2 || samples < batches)
    throw std::invalid_argument("simulate_learn_mitigate: need samples >= batches >= 2");
  const size_t nd = schedule.size();
  std::vector<double> xs(nd);
  for (size_t j = 0; j < nd; ++j) xs[j] = schedule[j];

  // per-batch sums of e^{-dG} for the schedule depths plus the target depth
  std::vector<std::vector<double>> sums(
      static_cast<size_t>(batches), std::vector<double>(nd + 1, 0.0));
  std::vector<int> counts(static_cast<size_t>(batches), 0);
  for (int i = 0; i < samples; ++i) {
    RngStream rng(seed, static_cast<uint64_t>(i), 0, Stream::kTheory);
    const double g = r.mu + r.sigma * rng.normal();
    auto& row = sums[static_cast<size_t>(i % batches)];
    for (size_t j = 0; j < nd; ++j) row[j] += std::exp(-xs[j] * g);
    row[nd] += std::exp(-target_d * g);
    ++counts[static_cast<size_t>(i % batches)];
  }

  auto pipeline = [&](int skip) {
    std::vector<double> m(nd + 1, 0.0);
    double n = 0;
    for (int b = 0; b < batches; ++b) {
      if (b == skip) continue;
      for (size_t j = 0; j <= nd; ++j) m[j] += sums[static_cast<size_t>(b)][j];
      n += counts[static_cast<size_t>(b)];
    }
    for (auto& v : m) v /= n;
    const double mu_hat =
        fit_rate_no_intercept(xs, std::span<const double>(m.data(), nd));
    return m[nd] * std::exp(target_d * mu_hat);
  };

  LearnMitigateMc out;
  out.bias = pipeline(-1);
  std::vector<double> loo(static_cast<size_t>(batches));
  for (int b = 0; b < batches; ++b) loo[static_cast<size_t>(b)] = pipeline(b);
  const double lm = mean(loo);
  double ss = 0.0;
  for (double v : loo) ss += (v - lm) * (v - lm);
  out.bias_se = std::sqrt((batches - 1.0) / batches * ss);
  return out;
}

struct AveragedT1Result {
  std::vector<double> curve;  // trial-averaged survival per delay
  double fitted_t1 = 0.0;     // -1/slope of the log-linear fit
  double max_t1 = 0.0;        // largest T1 drawn
};

// Ensemble-averaged relaxation: many fluctuating-T1 trials collapse to a
// curve that still fits a single exponential surprisingly well.
inline AveragedT1Result averaged_t1_sim(double mean_t1, double sd_t1,
                                        std::span<const double> delays,
                                        int trials, uint64_t seed) {
  if (!(mean_t1 > 0.0) || sd_t1 < 0.0)
    throw std::invalid_argument("averaged_t1_sim: bad distribution");
  if (trials < 1) throw std::invalid_argument("averaged_t1_sim: trials < 1");
  if (delays.size() < 2)
    throw std::invalid_argument("averaged_t1_sim: need at least two delays");
  AveragedT1Result out;
  out.curve.assign(delays.size(), 0.0);
  for (int t = 0; t < trials; ++t) {
    RngStream rng(seed, static_cast<uint64_t>(t), 0, Stream::kTheory);
    const double t1 = sample_truncated_normal(mean_t1, sd_t1, rng);
    out.max_t1 = std::max(out.max_t1, t1);
    for (size_t j = 0; j < delays.size(); ++j)
      out.curve[j] += std::exp(-delays[j] / t1) / trials;
  }
  const auto fit = fit_exponential_loglinear(delays, out.curve, {});
  out.fitted_t1 = -1.0 / fit.slope;
  return out;
}

struct LearningSimResult {
  double f_markov = 0.0;  // mean per-step fidelity
  double f_fit = 0.0;     // per-step fidelity the quasi-static fit reports
  double rel_diff = 0.0;  // |f_markov - f_fit| / f_markov
  std::vector<double> markov_curve;  // (E[f])^d per depth
  std::vector<double> quasi_curve;   // E[f^d] per depth
};

// How far a quasi-static T1 ensemble pushes the fitted per-step fidelity
// away from the plain Markovian average.
inline LearningSimResult quasi_static_learning_sim(
    std::span<const double> t1_samples, double t0,
    std::span<const int> depths) {
  if (t1_samples.empty())
    throw std::invalid_argument("quasi_static_learning_sim: no samples");
  if (!(t0 > 0.0))
    throw std::invalid_argument("quasi_static_learning_sim: t0 must be > 0");
  for (double t1 : t1_samples)
    if (!(t1 > 0.0))
      throw std::invalid_argument("quasi_static_learning_sim: T1 must be > 0");
  LearningSimResult out;
  const double n = static_cast<double>(t1_samples.size());
  for (double t1 : t1_samples) out.f_markov += std::exp(-t0 / t1) / n;
  std::vector<double> xs;
  xs.reserve(depths.size());
  for (int d : depths) {
    double c = 0.0;
    for (double t1 : t1_samples) c += std::exp(-d * t0 / t1) / n;
    out.quasi_curve.push_back(c);
    out.markov_curve.push_back(std::pow(out.f_markov, d));
    xs.push_back(d);
  }
  const double mu = fit_rate_no_intercept(xs, out.quasi_curve);
  out.f_fit = std::exp(-mu);
  out.rel_diff = std::abs(out.f_markov - out.f_fit) / out.f_markov;
  return out;
}

struct MitsimResult {
  std::vector<double> deviations;  // mitigated <Z...Z> - 1 per realization
  std::vector<double> fbar;        // learned per-qubit per-layer fidelity
  double mean_deviation = 0.0;
  double mean_abs_deviation = 0.0;
};

// Learn per-qubit rates from quasi-static averaged decays, then mitigate
// the depth-`target_d` product observable realization by realization. The
// six sample sets are paired by index. Negative or infinite T1 draws are
// tolerated: they encode rate samples of either sign.
inline MitsimResult mitsim(std::span<const std::vector<double>> t1_per_qubit,
                           std::span<const int> schedule, double tau = 135e-9,
                           int target_d = 24) {
  if (t1_per_qubit.size() != 6)
    throw std::invalid_argument("mitsim: expects six T1 distributions");
  if (!(tau > 0.0)) throw std::invalid_argument("mitsim: tau must be > 0");
  if (target_d < 1) throw std::invalid_argument("mitsim: target_d < 1");
  const size_t ns = t1_per_qubit[0].size();
  if (ns == 0) throw std::invalid_argument("mitsim: empty distribution");
  for (const auto& dist : t1_per_qubit)
    if (dist.size() != ns)
      throw std::invalid_argument("mitsim: sample counts differ across qubits");

  std::vector<double> xs;
  xs.reserve(schedule.size());
  for (int d : schedule) xs.push_back(d);

  MitsimResult out;
  double mu_total = 0.0;
  for (const auto& dist : t1_per_qubit) {
    std::vector<double> curve(schedule.size(), 0.0);
    for (size_t j = 0; j < schedule.size(); ++j) {
      for (double t1 : dist) curve[j] += std::exp(-schedule[j] * tau / t1);
      curve[j] /= static_cast<double>(ns);
    }
    const double mu = fit_rate_no_intercept(xs, curve);
    out.fbar.push_back(std::exp(-mu));
    mu_total += mu;
  }

  const double predicted = std::exp(-target_d * mu_total);
  out.deviations.reserve(ns);
  for (size_t i = 0; i < ns; ++i) {
    double raw = 1.0;
    for (const auto& dist : t1_per_qubit)
      raw *= std::exp(-target_d * tau / dist[i]);
    out.deviations.push_back(raw / predicted - 1.0);
  }
  out.mean_deviation = mean(out.deviations);
  for (double d : out.deviations)
    out.mean_abs_deviation += std::abs(d) / static_cast<double>(ns);
  return out;
}

// Exact deviation |E[(ff')^d] - (E[ff'])^d| for independent symmetric
// two-point fidelity perturbations f0 +- delta, f0' +- delta. Halving delta
// should shrink it about fourfold: the averaged channel is first-order
// insensitive to fluctuations around it.
inline double perturbation_deviation(double f0, double f0p, double delta,
                                     int d) {
  if (d < 1) throw std::invalid_argument("perturbation_deviation: d < 1");
  if (delta < 0.0 || f0 - delta <= 0.0 || f0p - delta <= 0.0)
    throw std::invalid_argument("perturbation_deviation: perturbed fidelity not positive");
  double e = 0.0;
  for (int s : {-1, 1})
    for (int sp : {-1, 1})
      e += 0.25 * std::pow((f0 + s * delta) * (f0p + sp * delta), d);
  return std::abs(e - std::pow(f0 * f0p, d));
}

}  // namespace qsn
