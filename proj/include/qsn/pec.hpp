#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsn/engine.hpp"
#include "qsn/hash.hpp"
#include "qsn/learn.hpp"
#include "qsn/model.hpp"
#include "qsn/numeric.hpp"
#include "qsn/pauli.hpp"
#include "qsn/rng.hpp"
#include "qsn/tls.hpp"

namespace qsn {

struct PecBudget {
  int instances = 4096;
  int shots = 32;
  int bootstrap = 25;
};

// One mitigated (or raw) Pauli expectation with its error bar. `gamma` is the
// sampling-overhead factor baked into the estimate; 1 for raw runs.
struct EstimatorResult {
  std::string observable;
  double mean = 0.0;
  double se = 0.0;
  double gamma = 1.0;
  int instances = 0;
  int shots = 0;
  std::vector<double> bootstrap;
};

// The requested observable plus the same estimate re-read for every Z-prefix
// weight, so weight-resolved decay comes for free from one run.
struct PecRun {
  EstimatorResult primary;
  std::vector<EstimatorResult> by_weight;
};

// product of slot noise-strength factors over the circuit's noisy occurrences
inline double circuit_gamma(const Circuit& c,
                            std::span<const LindbladModel> models) {
  if (static_cast<int>(models.size()) < c.num_slots)
    throw std::invalid_argument("circuit_gamma: missing slot models");
  double g = 1.0;
  for (const auto& el : c.elements)
    if (el.slot >= 0) g *= models[static_cast<size_t>(el.slot)].gamma();
  return g;
}

namespace detail {

// readout correction for a Z support mask from the monitor's per-qubit factors
inline double mask_correction(const MonitorResult* monitor, int n,
                              uint64_t mask) {
  if (monitor == nullptr) return 1.0;
  double f = 1.0;
  for (int q = 0; q < n; ++q)
    if (mask & (uint64_t{1} << q)) f *= monitor->c[static_cast<size_t>(q)];
  return f;
}

inline PauliString z_prefix(int n, int weight) {
  PauliString p(n);
  for (int q = 0; q < weight; ++q) p.set_letter(q, 'Z');
  return p;
}

// Shared body of mitigate() and unmitigated(). When `learned` is empty the
// instances carry twirls only and gamma stays 1.
inline PecRun estimate(const Circuit& c, std::span<const LindbladModel> learned,
                       NoiseSource& noise, const ReadoutModel& ro,
                       const PauliString& obs, uint64_t seed,
                       const PecBudget& budget, const MonitorResult* monitor) {
  if (budget.instances < 2)
    throw std::invalid_argument("mitigate: need at least 2 instances");
  if (budget.shots < 1) throw std::invalid_argument("mitigate: need shots");
  const bool invert = !learned.empty();
  if (invert && static_cast<int>(learned.size()) < c.num_slots)
    throw std::invalid_argument("mitigate: missing slot models");

  const int n = c.n;
  const int num_occ = c.noisy_occurrences();
  const double gamma = invert ? circuit_gamma(c, learned) : 1.0;

  // slot index per noisy occurrence, in forward order
  std::vector<int> occ_slot;
  occ_slot.reserve(static_cast<size_t>(num_occ));
  for (const auto& el : c.elements)
    if (el.slot >= 0) occ_slot.push_back(el.slot);

  std::vector<uint64_t> masks;
  masks.push_back(z_mask(obs));
  for (int w = 1; w <= n; ++w) masks.push_back(z_mask(z_prefix(n, w)));

  // inst_means[m][i]: per-instance shot mean of the signed parity for mask m
  std::vector<std::vector<double>> inst_means(
      masks.size(), std::vector<double>(static_cast<size_t>(budget.instances)));
  for (int i = 0; i < budget.instances; ++i) {
    auto inst = compile_twirls(c, seed, static_cast<uint64_t>(i));
    if (invert) {
      inst.ins_x.assign(static_cast<size_t>(num_occ), 0);
      inst.ins_z.assign(static_cast<size_t>(num_occ), 0);
      for (int occ = 0; occ < num_occ; ++occ) {
        RngStream rng(seed, static_cast<uint64_t>(i),
                      static_cast<uint32_t>(occ), Stream::kPecInverse);
        auto [p, sgn] =
            learned[static_cast<size_t>(occ_slot[static_cast<size_t>(occ)])]
                .sample_inverse(rng);
        inst.ins_x[static_cast<size_t>(occ)] = p.x_words()[0];
        inst.ins_z[static_cast<size_t>(occ)] = p.z_words()[0];
        inst.sign *= sgn;
      }
    }
    const auto records =
        run_shots(c, inst, noise, ro, seed,
                  static_cast<uint64_t>(i) * budget.shots, budget.shots);
    for (size_t m = 0; m < masks.size(); ++m) {
      double acc = 0.0;
      for (const auto& r : records) acc += record_parity(r, masks[m]);
      inst_means[m][static_cast<size_t>(i)] = acc / budget.shots;
    }
  }

  // one resample per bootstrap round, shared across masks
  std::vector<std::vector<int>> resamples(
      static_cast<size_t>(std::max(budget.bootstrap, 0)));
  for (size_t b = 0; b < resamples.size(); ++b) {
    RngStream rng(seed, static_cast<uint64_t>(b), 0, Stream::kBootstrap);
    resamples[b] = resample_indices(budget.instances, rng);
  }

  auto collapse = [&](size_t m, const PauliString& label) {
    EstimatorResult r;
    r.observable = label.text();
    r.gamma = gamma;
    r.instances = budget.instances;
    r.shots = budget.shots;
    const double corr = mask_correction(monitor, n, masks[m]);
    const auto& v = inst_means[m];
    r.mean = gamma * mean(v) / corr;
    r.se = gamma * stderr_of_mean(v) / corr;
    r.bootstrap.reserve(resamples.size());
    for (const auto& idx : resamples) {
      double acc = 0.0;
      for (int j : idx) acc += v[static_cast<size_t>(j)];
      r.bootstrap.push_back(gamma * (acc / idx.size()) / corr);
    }
    return r;
  };

  PecRun run;
  run.primary = collapse(0, obs);
  run.by_weight.reserve(static_cast<size_t>(n));
  for (int w = 1; w <= n; ++w)
    run.by_weight.push_back(collapse(static_cast<size_t>(w), z_prefix(n, w)));
  return run;
}

inline uint64_t sub_seed(uint64_t seed, uint64_t a, uint64_t b) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (a + 1) +
               0x94d049bb133111ebull * (b + 1);
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

// Quasi-probability cancellation of the learned noise: every instance draws
// fresh twirls, then at each noisy occurrence samples the inverse channel of
// that slot's learned model, folding the drawn Pauli into the frame and the
// drawn sign into the instance. The estimator rescales by the total gamma, so
// it is unbiased against the learned model at the cost of variance ~ gamma^2.
inline PecRun mitigate(const Circuit& c, std::span<const LindbladModel> learned,
                       NoiseSource& noise, const ReadoutModel& ro,
                       const PauliString& obs, uint64_t seed,
                       const PecBudget& budget = {},
                       const MonitorResult* monitor = nullptr) {
  if (learned.empty()) throw std::invalid_argument("mitigate: missing models");
  return detail::estimate(c, learned, noise, ro, obs, seed, budget, monitor);
}

// same sampling pipeline with no insertions and gamma = 1
inline PecRun unmitigated(const Circuit& c, NoiseSource& noise,
                          const ReadoutModel& ro, const PauliString& obs,
                          uint64_t seed, const PecBudget& budget = {},
                          const MonitorResult* monitor = nullptr) {
  return detail::estimate(c, {}, noise, ro, obs, seed, budget, monitor);
}

inline double predict_fidelity(const Circuit& c,
                               std::span<const LindbladModel> models,
                               const PauliString& obs) {
  return exact_expectation(c, models, obs);
}

inline double delta_pred(double raw, double f_pred) {
  if (std::fabs(f_pred) < 1e-6)
    throw std::runtime_error("delta_pred: f_pred below 1e-6, ill-conditioned");
  return raw / f_pred - 1.0;
}

// Infinite-shot expectation of the mitigated estimator: the truth applies the
// noise, the learned model is inverted analytically, so each back-propagated
// slot Pauli contributes f_truth/f_learned. Equal models cancel exactly.
inline double mitigate_analytic(const Circuit& c,
                                std::span<const LindbladModel> truth,
                                std::span<const LindbladModel> learned,
                                const PauliString& obs) {
  if (static_cast<int>(truth.size()) < c.num_slots ||
      static_cast<int>(learned.size()) < c.num_slots)
    throw std::invalid_argument("mitigate_analytic: missing slot models");
  const auto bp = backpropagate(c, obs);
  if (!bp.initial.is_z_type()) return 0.0;
  double v = bp.initial.negative() ? -1.0 : 1.0;
  for (const auto& sp : bp.slots) {
    const double fl = learned[static_cast<size_t>(sp.slot)].fidelity(sp.p);
    if (fl < 1e-6)
      throw std::runtime_error(
          "mitigate_analytic: learned fidelity below 1e-6, ill-conditioned");
    v *= truth[static_cast<size_t>(sp.slot)].fidelity(sp.p) / fl;
  }
  return v;
}

// One learn-then-mitigate cycle on the mirror benchmark, plus the running
// aggregate over cycles so far.
struct StabilityRecord {
  int cycle = 0;
  double t_hr = 0.0;
  std::string strategy;
  uint64_t lambda_hash = 0;
  double gamma = 1.0;
  double f_pred = 0.0;
  double f_exp = 0.0;
  double raw = 0.0;
  double raw_se = 0.0;
  double mitigated = 0.0;
  double mitigated_se = 0.0;
  double delta_pred = 0.0;
  double delta_mit = 0.0;
  double cumulative_mean = 0.0;
  double cumulative_se = 0.0;
  std::vector<double> bootstrap;
  std::vector<double> monitor_c;

  nlohmann::json to_json() const {
    return nlohmann::json{{"cycle", cycle},
                          {"t_hr", t_hr},
                          {"strategy", strategy},
                          {"lambda_hash", lambda_hash},
                          {"gamma", gamma},
                          {"f_pred", f_pred},
                          {"f_exp", f_exp},
                          {"raw", raw},
                          {"raw_se", raw_se},
                          {"mitigated", mitigated},
                          {"mitigated_se", mitigated_se},
                          {"delta_pred", delta_pred},
                          {"delta_mit", delta_mit},
                          {"cumulative_mean", cumulative_mean},
                          {"cumulative_se", cumulative_se},
                          {"bootstrap", bootstrap},
                          {"monitor_c", monitor_c}};
  }
};

struct StabilityConfig {
  int cycles = 24;
  double cadence_hr = 2.0;
  double tau_s = 135e-9;
  int mirror_reps = 10;
  double floor_lambda = 7e-4;
  LearningConfig learn;
  int learn_bootstrap = 100;
  PecBudget pec{4096, 32, 25};
  PecBudget unmit{512, 32, 25};
  int monitor_instances = 2048;
  int monitor_shots = 32;
  double shot_rate_hz = 1000.0;

  void validate() const {
    if (cycles < 1) throw std::invalid_argument("stability: cycles < 1");
    if (!(cadence_hr > 0))
      throw std::invalid_argument("stability: cadence must be > 0");
    if (mirror_reps < 1) throw std::invalid_argument("stability: reps < 1");
    if (floor_lambda < 0)
      throw std::invalid_argument("stability: floor_lambda < 0");
    learn.validate();
  }
};

// Drift / (re-)optimize / learn / mitigate loop against a drifting landscape.
// Each cycle drifts half a cadence, learns both coupling layers through the
// strategy's control point, drifts the other half, then runs the monitored,
// mitigated, and raw benchmark estimates against the now-stale models.
// `f_exp` is the exact mirror expectation of the truth at the strategy's
// first-shot control point, a diagnostic reference only.
inline std::vector<StabilityRecord> stability_run(TlsLandscape& land,
                                                  ModulationStrategy& strat,
                                                  const ReadoutModel& ro,
                                                  uint64_t seed,
                                                  const StabilityConfig& cfg = {}) {
  cfg.validate();
  const int n = land.num_qubits();
  if (n < 2) throw std::invalid_argument("stability: need n >= 2");
  if (ro.n() != n) throw std::invalid_argument("stability: readout size mismatch");

  const auto gs = GeneratorSet::chain(n);
  std::vector<std::pair<int, int>> e1, e2;
  for (int q = 0; q + 1 < n; q += 2) e1.emplace_back(q, q + 1);
  for (int q = 1; q + 1 < n; q += 2) e2.emplace_back(q, q + 1);
  const auto l1 = CliffordLayer::cz_layer(n, e1);
  const auto l2 = CliffordLayer::cz_layer(n, e2);

  auto edge_floor = [&](const std::vector<std::pair<int, int>>& edges) {
    std::vector<double> lambda(static_cast<size_t>(gs->size()), 0.0);
    for (const auto& e : edges) {
      const size_t base =
          static_cast<size_t>(3 * n + 9 * gs->edge_index(e.first, e.second));
      for (size_t j = 0; j < 9; ++j) lambda[base + j] = cfg.floor_lambda;
    }
    return LindbladModel(gs, std::move(lambda));
  };
  const auto floor1 = edge_floor(e1);
  const auto floor2 = edge_floor(e2);
  const std::vector<LindbladModel> both_floors{floor1, floor2};

  const auto benchmark = mirror_circuit(n, cfg.mirror_reps);
  const auto obs = PauliString::from_text(std::string(static_cast<size_t>(n), 'Z'));

  RngStream drift_rng(seed, 0, 0, Stream::kDrift);
  std::vector<StabilityRecord> out;
  out.reserve(static_cast<size_t>(cfg.cycles));
  std::vector<double> mit_history;
  for (int cy = 0; cy < cfg.cycles; ++cy) {
    const auto u = static_cast<uint64_t>(cy);
    land.drift(0.5 * cfg.cadence_hr, drift_rng);
    strat.maybe_reoptimize(land);

    LandscapeNoiseSource learn_noise1(land, strat, cfg.tau_s, {floor1},
                                      cfg.shot_rate_hz);
    LandscapeNoiseSource learn_noise2(land, strat, cfg.tau_s, {floor2},
                                      cfg.shot_rate_hz);
    const auto r1 = learn_sampled(l1, gs, learn_noise1, ro,
                                  detail::sub_seed(seed, u, 1), cfg.learn,
                                  cfg.learn_bootstrap);
    const auto r2 = learn_sampled(l2, gs, learn_noise2, ro,
                                  detail::sub_seed(seed, u, 2), cfg.learn,
                                  cfg.learn_bootstrap);
    const std::vector<LindbladModel> learned{r1.model, r2.model};

    land.drift(0.5 * cfg.cadence_hr, drift_rng);

    const auto monitor =
        run_readout_monitor(ro, cfg.monitor_instances, cfg.monitor_shots,
                            detail::sub_seed(seed, u, 3));
    LandscapeNoiseSource bench_noise(land, strat, cfg.tau_s, {floor1, floor2},
                                     cfg.shot_rate_hz);
    const auto mit =
        mitigate(benchmark, learned, bench_noise, ro, obs,
                 detail::sub_seed(seed, u, 4), cfg.pec, &monitor);
    LandscapeNoiseSource raw_noise(land, strat, cfg.tau_s, {floor1, floor2},
                                   cfg.shot_rate_hz);
    const auto raw =
        unmitigated(benchmark, raw_noise, ro, obs,
                    detail::sub_seed(seed, u, 5), cfg.unmit, &monitor);

    std::vector<double> k_ref(static_cast<size_t>(n));
    for (int q = 0; q < n; ++q)
      k_ref[static_cast<size_t>(q)] = strat.sample_k(q, 0, cfg.shot_rate_hz);
    const auto truth = realize_noise(land, k_ref, cfg.tau_s, both_floors);

    StabilityRecord rec;
    rec.cycle = cy;
    rec.t_hr = land.time_hours();
    rec.strategy = strategy_name(strat.kind);
    rec.lambda_hash =
        fnv1a64(r2.model.lambda(), fnv1a64(r1.model.lambda()));
    rec.gamma = circuit_gamma(benchmark, learned);
    rec.f_pred = predict_fidelity(benchmark, learned, obs);
    rec.f_exp = exact_expectation(benchmark, truth.slot_models, obs);
    rec.raw = raw.primary.mean;
    rec.raw_se = raw.primary.se;
    rec.mitigated = mit.primary.mean;
    rec.mitigated_se = mit.primary.se;
    rec.delta_pred = delta_pred(rec.raw, rec.f_pred);
    rec.delta_mit = rec.mitigated - 1.0;
    rec.bootstrap = mit.primary.bootstrap;
    rec.monitor_c = monitor.c;

    mit_history.push_back(rec.mitigated);
    rec.cumulative_mean = mean(mit_history);
    rec.cumulative_se =
        mit_history.size() > 1 ? stderr_of_mean(mit_history) : 0.0;
    out.push_back(std::move(rec));
  }
  return out;
}

// Predicted spread of repeated learn-then-mitigate experiments: every ordered
// pair of learned-model snapshots gives a ratio f_pred(n1)/f_pred(n2), the
// value a mitigation calibrated at n2 would report for data taken at n1.
struct RepeatedLmResult {
  std::vector<double> ratios;
  double mean = 0.0;
  double sigma = 0.0;
  double se = 0.0;
  // running se after each prefix of the series, entry i uses models 0..i+1
  std::vector<double> cumulative_se;
};

inline RepeatedLmResult repeated_lm_prediction(
    std::span<const std::vector<LindbladModel>> series, const Circuit& c,
    const PauliString& obs) {
  if (series.size() < 2)
    throw std::invalid_argument("repeated prediction: need >= 2 model sets");
  std::vector<double> f(series.size());
  for (size_t i = 0; i < series.size(); ++i) {
    f[i] = predict_fidelity(c, series[i], obs);
    if (std::fabs(f[i]) < 1e-6)
      throw std::runtime_error(
          "repeated prediction: f_pred below 1e-6, ill-conditioned");
  }

  auto stats = [&](size_t count) {
    std::vector<double> r;
    r.reserve(count * (count - 1));
    for (size_t a = 0; a < count; ++a)
      for (size_t b = 0; b < count; ++b)
        if (a != b) r.push_back(f[a] / f[b]);
    const double m = mean(r);
    double s2 = 0.0;
    for (double x : r) s2 += (x - m) * (x - m);
    const double sigma = std::sqrt(s2 / static_cast<double>(r.size()));
    return std::tuple<std::vector<double>, double, double>(
        std::move(r), m, sigma);
  };

  RepeatedLmResult out;
  for (size_t count = 2; count <= series.size(); ++count) {
    auto [r, m, sigma] = stats(count);
    out.cumulative_se.push_back(sigma / std::sqrt(static_cast<double>(r.size())));
    if (count == series.size()) {
      out.ratios = std::move(r);
      out.mean = m;
      out.sigma = sigma;
      out.se = out.cumulative_se.back();
    }
  }
  return out;
}

// How far the mean of fidelity ratios sits from the ratio of mean fidelities
// for one i.i.d. fidelity sample: pairs-without-replacement U-statistic
// against the trivial same-sample ratio of means.
struct RatioBias {
  double mean_ratio = 0.0;
  double ratio_of_means = 0.0;
  double gap = 0.0;
};

inline RatioBias lm_ratio_bias(std::span<const double> f) {
  if (f.size() < 2)
    throw std::invalid_argument("ratio bias: need >= 2 samples");
  double sf = 0.0, sinv = 0.0;
  for (double x : f) {
    if (!(x > 0)) throw std::invalid_argument("ratio bias: fidelities must be > 0");
    sf += x;
    sinv += 1.0 / x;
  }
  const auto nd = static_cast<double>(f.size());
  RatioBias out;
  out.mean_ratio = (sf * sinv - nd) / (nd * (nd - 1.0));
  out.ratio_of_means = (sf / nd) / (sf / nd);
  out.gap = out.mean_ratio - out.ratio_of_means;
  return out;
}

}  // namespace qsn
