// Experiment configuration: one human-readable key-value tree covering every
// stage of a run (landscape synthesis, control strategies, model learning,
// mitigation budgets, stability cycling, closed-form studies). Any key may
// be omitted and takes the default; unknown keys are rejected so a typo
// cannot silently fall back. The fingerprint of the effective configuration
// keys every manifest, and it ignores the output directory so a run is
// identified by what it computes, not where the files land.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsn/hash.hpp"
#include "qsn/learn.hpp"
#include "qsn/pec.hpp"
#include "qsn/tls.hpp"

namespace qsn {

// configuration mistakes exit with a distinct status, so they get their own
// exception type
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void expect_object(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object())
    throw ConfigError("config: " + where + " must be an object");
}

inline void expect_keys(const nlohmann::json& j,
                        std::initializer_list<const char*> keys,
                        const std::string& where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("config: unknown key \"" + where + "." + item.key() +
                        "\"");
  }
}

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& dst,
                const std::string& where) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: bad value for " + where + "." + key + ": " +
                      e.what());
  }
}

}  // namespace detail

struct LandscapeSpec {
  int qubits = 6;
  double k_min = -1.0;
  double k_max = 1.0;
  double base_t1_us_min = 60.0;
  double base_t1_us_max = 150.0;
  int defects_min = 2;
  int defects_max = 4;
  double width_min = 0.03;
  double width_max = 0.12;
  double strength_min = 2e3;
  double strength_max = 2.5e4;
  double drift_theta_per_hr = 0.05;
  double drift_sigma_per_sqrt_hr = 0.08;

  SyntheticParams params() const {
    SyntheticParams p;
    p.k_min = k_min;
    p.k_max = k_max;
    p.base_t1_min = base_t1_us_min * 1e-6;
    p.base_t1_max = base_t1_us_max * 1e-6;
    p.min_defects = defects_min;
    p.max_defects = defects_max;
    p.width_min = width_min;
    p.width_max = width_max;
    p.strength_min = strength_min;
    p.strength_max = strength_max;
    p.drift = DriftParams{drift_theta_per_hr, drift_sigma_per_sqrt_hr};
    return p;
  }

  TlsLandscape build(uint64_t seed) const {
    return TlsLandscape::synthetic(qubits, seed, params());
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"qubits", qubits},
                          {"k_min", k_min},
                          {"k_max", k_max},
                          {"base_t1_us_min", base_t1_us_min},
                          {"base_t1_us_max", base_t1_us_max},
                          {"defects_min", defects_min},
                          {"defects_max", defects_max},
                          {"width_min", width_min},
                          {"width_max", width_max},
                          {"strength_min", strength_min},
                          {"strength_max", strength_max},
                          {"drift_theta_per_hr", drift_theta_per_hr},
                          {"drift_sigma_per_sqrt_hr", drift_sigma_per_sqrt_hr}};
  }

  static LandscapeSpec from_json(const nlohmann::json& j) {
    LandscapeSpec s;
    detail::expect_object(j, "landscape");
    detail::expect_keys(j,
                        {"qubits", "k_min", "k_max", "base_t1_us_min",
                         "base_t1_us_max", "defects_min", "defects_max",
                         "width_min", "width_max", "strength_min",
                         "strength_max", "drift_theta_per_hr",
                         "drift_sigma_per_sqrt_hr"},
                        "landscape");
    detail::read_field(j, "qubits", s.qubits, "landscape");
    detail::read_field(j, "k_min", s.k_min, "landscape");
    detail::read_field(j, "k_max", s.k_max, "landscape");
    detail::read_field(j, "base_t1_us_min", s.base_t1_us_min, "landscape");
    detail::read_field(j, "base_t1_us_max", s.base_t1_us_max, "landscape");
    detail::read_field(j, "defects_min", s.defects_min, "landscape");
    detail::read_field(j, "defects_max", s.defects_max, "landscape");
    detail::read_field(j, "width_min", s.width_min, "landscape");
    detail::read_field(j, "width_max", s.width_max, "landscape");
    detail::read_field(j, "strength_min", s.strength_min, "landscape");
    detail::read_field(j, "strength_max", s.strength_max, "landscape");
    detail::read_field(j, "drift_theta_per_hr", s.drift_theta_per_hr,
                       "landscape");
    detail::read_field(j, "drift_sigma_per_sqrt_hr", s.drift_sigma_per_sqrt_hr,
                       "landscape");
    return s;
  }
};

struct StrategySpec {
  std::string kind = "control";
  double k = 0.0;
  double grid_min = -0.5;
  double grid_max = 0.5;
  double grid_step = 0.1;
  double reopt_period_hr = 1.5;
  std::string waveform = "triangle";
  double freq_hz = 1.0;
  double amplitude = 0.3;
  double center = 0.0;

  std::vector<double> grid() const {
    return default_k_grid(grid_min, grid_max, grid_step);
  }

  ModulationStrategy build() const {
    if (kind == "control") return ModulationStrategy::control(k);
    if (kind == "optimized")
      return ModulationStrategy::optimized(grid(), reopt_period_hr);
    if (kind == "averaged") {
      Waveform w;
      if (waveform == "sine")
        w = Waveform::kSine;
      else if (waveform == "triangle")
        w = Waveform::kTriangle;
      else
        throw ConfigError("config: unknown waveform \"" + waveform + "\"");
      return ModulationStrategy::averaged(w, freq_hz, amplitude, center);
    }
    throw ConfigError("config: unknown strategy kind \"" + kind + "\"");
  }

  static StrategySpec defaults_for(const std::string& kind_name) {
    StrategySpec s;
    s.kind = kind_name;
    return s;
  }

  nlohmann::json to_json() const {
    return nlohmann::json{
        {"kind", kind},           {"k", k},
        {"grid_min", grid_min},   {"grid_max", grid_max},
        {"grid_step", grid_step}, {"reopt_period_hr", reopt_period_hr},
        {"waveform", waveform},   {"freq_hz", freq_hz},
        {"amplitude", amplitude}, {"center", center}};
  }

  static StrategySpec from_json(const nlohmann::json& j,
                                const std::string& where) {
    StrategySpec s;
    detail::expect_object(j, where);
    detail::expect_keys(j,
                        {"kind", "k", "grid_min", "grid_max", "grid_step",
                         "reopt_period_hr", "waveform", "freq_hz", "amplitude",
                         "center"},
                        where);
    detail::read_field(j, "kind", s.kind, where);
    detail::read_field(j, "k", s.k, where);
    detail::read_field(j, "grid_min", s.grid_min, where);
    detail::read_field(j, "grid_max", s.grid_max, where);
    detail::read_field(j, "grid_step", s.grid_step, where);
    detail::read_field(j, "reopt_period_hr", s.reopt_period_hr, where);
    detail::read_field(j, "waveform", s.waveform, where);
    detail::read_field(j, "freq_hz", s.freq_hz, where);
    detail::read_field(j, "amplitude", s.amplitude, where);
    detail::read_field(j, "center", s.center, where);
    return s;
  }
};

struct TheorySpec {
  std::vector<int> schedule{0, 4, 12, 24, 48, 64};
  double mu = 0.01;
  std::vector<double> sigmas{0.01, 0.02, 0.03, 0.05};
  int depth = 24;
  int samples = 200000;
  double cost_gamma_worse = 1.13;
  double cost_gamma_better = 1.06;
  std::vector<int> cost_pairs{20, 40};
  double t1_mean_us = 500.0;
  double t1_sd_us = 150.0;
  int t1_trials = 1000;
  int mitsim_samples = 400;
  double step_us = 5.0;

  nlohmann::json to_json() const {
    return nlohmann::json{{"schedule", schedule},
                          {"mu", mu},
                          {"sigmas", sigmas},
                          {"depth", depth},
                          {"samples", samples},
                          {"cost_gamma_worse", cost_gamma_worse},
                          {"cost_gamma_better", cost_gamma_better},
                          {"cost_pairs", cost_pairs},
                          {"t1_mean_us", t1_mean_us},
                          {"t1_sd_us", t1_sd_us},
                          {"t1_trials", t1_trials},
                          {"mitsim_samples", mitsim_samples},
                          {"step_us", step_us}};
  }

  static TheorySpec from_json(const nlohmann::json& j) {
    TheorySpec s;
    detail::expect_object(j, "theory");
    detail::expect_keys(j,
                        {"schedule", "mu", "sigmas", "depth", "samples",
                         "cost_gamma_worse", "cost_gamma_better", "cost_pairs",
                         "t1_mean_us", "t1_sd_us", "t1_trials",
                         "mitsim_samples", "step_us"},
                        "theory");
    detail::read_field(j, "schedule", s.schedule, "theory");
    detail::read_field(j, "mu", s.mu, "theory");
    detail::read_field(j, "sigmas", s.sigmas, "theory");
    detail::read_field(j, "depth", s.depth, "theory");
    detail::read_field(j, "samples", s.samples, "theory");
    detail::read_field(j, "cost_gamma_worse", s.cost_gamma_worse, "theory");
    detail::read_field(j, "cost_gamma_better", s.cost_gamma_better, "theory");
    detail::read_field(j, "cost_pairs", s.cost_pairs, "theory");
    detail::read_field(j, "t1_mean_us", s.t1_mean_us, "theory");
    detail::read_field(j, "t1_sd_us", s.t1_sd_us, "theory");
    detail::read_field(j, "t1_trials", s.t1_trials, "theory");
    detail::read_field(j, "mitsim_samples", s.mitsim_samples, "theory");
    detail::read_field(j, "step_us", s.step_us, "theory");
    return s;
  }
};

struct ExperimentConfig {
  uint64_t seed = 2024;
  std::string out_dir = "out";
  int cycles = 24;
  double cadence_hr = 2.0;
  double shot_rate_hz = 1000.0;
  LandscapeSpec landscape;
  double scan_k_min = -1.0;
  double scan_k_max = 1.0;
  int scan_steps = 81;
  std::vector<StrategySpec> strategies{StrategySpec::defaults_for("control"),
                                       StrategySpec::defaults_for("optimized"),
                                       StrategySpec::defaults_for("averaged")};
  LearningConfig learn;
  int learn_bootstrap = 100;
  double gate_time_ns = 135.0;
  double floor_lambda = 7e-4;
  int mirror_reps = 10;
  PecBudget pec{4096, 32, 25};
  PecBudget unmit{512, 32, 25};
  int monitor_instances = 2048;
  int monitor_shots = 32;
  double readout_e01 = 0.02;
  double readout_e10 = 0.015;
  TheorySpec theory;

  StabilityConfig stability() const {
    StabilityConfig s;
    s.cycles = cycles;
    s.cadence_hr = cadence_hr;
    s.tau_s = gate_time_ns * 1e-9;
    s.mirror_reps = mirror_reps;
    s.floor_lambda = floor_lambda;
    s.learn = learn;
    s.learn_bootstrap = learn_bootstrap;
    s.pec = pec;
    s.unmit = unmit;
    s.monitor_instances = monitor_instances;
    s.monitor_shots = monitor_shots;
    s.shot_rate_hz = shot_rate_hz;
    return s;
  }

  ReadoutModel readout() const {
    return ReadoutModel::uniform(landscape.qubits, readout_e01, readout_e10);
  }

  const StrategySpec& strategy_named(const std::string& kind_name) const {
    for (const auto& s : strategies)
      if (s.kind == kind_name) return s;
    throw ConfigError("config: no strategy of kind \"" + kind_name +
                      "\" in the strategy list");
  }

  void validate() const {
    if (landscape.qubits < 2 || landscape.qubits > 16)
      throw ConfigError("config: landscape.qubits must be in [2, 16]");
    if (!(landscape.k_max > landscape.k_min))
      throw ConfigError("config: landscape k range is empty");
    if (!(landscape.base_t1_us_min > 0) ||
        landscape.base_t1_us_max < landscape.base_t1_us_min)
      throw ConfigError("config: landscape base T1 range is invalid");
    if (landscape.defects_min < 0 ||
        landscape.defects_max < landscape.defects_min)
      throw ConfigError("config: landscape defect counts are invalid");
    if (!(landscape.width_min > 0) ||
        landscape.width_max < landscape.width_min)
      throw ConfigError("config: landscape defect widths are invalid");
    if (landscape.strength_min < 0 ||
        landscape.strength_max < landscape.strength_min)
      throw ConfigError("config: landscape defect strengths are invalid");
    if (landscape.drift_theta_per_hr < 0 ||
        landscape.drift_sigma_per_sqrt_hr < 0)
      throw ConfigError("config: landscape drift parameters must be >= 0");
    if (cycles < 1) throw ConfigError("config: run.cycles must be >= 1");
    if (!(cadence_hr > 0))
      throw ConfigError("config: run.cadence_hr must be > 0");
    if (!(shot_rate_hz > 0))
      throw ConfigError("config: run.shot_rate_hz must be > 0");
    if (scan_steps < 2) throw ConfigError("config: scan.steps must be >= 2");
    if (!(scan_k_max > scan_k_min))
      throw ConfigError("config: scan k range is empty");
    if (scan_k_min < landscape.k_min || scan_k_max > landscape.k_max)
      throw ConfigError("config: scan range leaves the landscape k range");
    if (strategies.empty())
      throw ConfigError("config: at least one strategy is required");
    for (const auto& s : strategies) {
      if (s.kind != "control" && s.kind != "optimized" && s.kind != "averaged")
        throw ConfigError("config: unknown strategy kind \"" + s.kind + "\"");
      if (s.waveform != "sine" && s.waveform != "triangle")
        throw ConfigError("config: unknown waveform \"" + s.waveform + "\"");
      if (!(s.grid_step > 0) || !(s.grid_max > s.grid_min))
        throw ConfigError("config: strategy grid is invalid");
      if (!(s.reopt_period_hr > 0))
        throw ConfigError("config: strategy reopt_period_hr must be > 0");
      if (!(s.freq_hz > 0))
        throw ConfigError("config: strategy freq_hz must be > 0");
      if (s.amplitude < 0)
        throw ConfigError("config: strategy amplitude must be >= 0");
      if (s.kind == "control" &&
          (s.k < landscape.k_min || s.k > landscape.k_max))
        throw ConfigError("config: control set point leaves the landscape");
      if (s.kind == "optimized" &&
          (s.grid_min < landscape.k_min || s.grid_max > landscape.k_max))
        throw ConfigError("config: strategy grid leaves the landscape");
      if (s.kind == "averaged" &&
          (s.center - s.amplitude < landscape.k_min ||
           s.center + s.amplitude > landscape.k_max))
        throw ConfigError("config: waveform sweep leaves the landscape");
    }
    try {
      learn.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: learning: ") + e.what());
    }
    if (learn_bootstrap < 0)
      throw ConfigError("config: learning.bootstrap must be >= 0");
    if (!(gate_time_ns > 0))
      throw ConfigError("config: noise.gate_time_ns must be > 0");
    if (floor_lambda < 0)
      throw ConfigError("config: noise.floor_lambda must be >= 0");
    if (mirror_reps < 1)
      throw ConfigError("config: benchmark.mirror_reps must be >= 1");
    for (const auto* b : {&pec, &unmit}) {
      if (b->instances < 2)
        throw ConfigError("config: estimator budgets need instances >= 2");
      if (b->shots < 1)
        throw ConfigError("config: estimator budgets need shots >= 1");
      if (b->bootstrap < 0)
        throw ConfigError("config: estimator bootstrap must be >= 0");
    }
    if (monitor_instances < 2 || monitor_shots < 1)
      throw ConfigError("config: monitor budget is too small");
    if (readout_e01 < 0 || readout_e01 >= 0.5 || readout_e10 < 0 ||
        readout_e10 >= 0.5)
      throw ConfigError("config: readout error rates must be in [0, 0.5)");
    if (theory.schedule.empty())
      throw ConfigError("config: theory.schedule must not be empty");
    bool nonzero = false;
    for (int d : theory.schedule) {
      if (d < 0) throw ConfigError("config: theory.schedule depths must be >= 0");
      if (d > 0) nonzero = true;
    }
    if (!nonzero)
      throw ConfigError("config: theory.schedule needs a nonzero depth");
    for (double s : theory.sigmas)
      if (s < 0) throw ConfigError("config: theory.sigmas must be >= 0");
    if (theory.depth < 1) throw ConfigError("config: theory.depth must be >= 1");
    if (theory.samples < 200)
      throw ConfigError("config: theory.samples must be >= 200");
    if (!(theory.cost_gamma_worse >= 1) || !(theory.cost_gamma_better >= 1))
      throw ConfigError("config: theory cost overheads must be >= 1");
    for (int p : theory.cost_pairs)
      if (p < 0) throw ConfigError("config: theory.cost_pairs must be >= 0");
    if (!(theory.t1_mean_us > 0) || theory.t1_sd_us < 0)
      throw ConfigError("config: theory T1 distribution is invalid");
    if (theory.t1_trials < 1 || theory.mitsim_samples < 2)
      throw ConfigError("config: theory sample counts are too small");
    if (!(theory.step_us > 0))
      throw ConfigError("config: theory.step_us must be > 0");
  }

  nlohmann::json to_json() const {
    nlohmann::json strat = nlohmann::json::array();
    for (const auto& s : strategies) strat.push_back(s.to_json());
    return nlohmann::json{
        {"seed", seed},
        {"out_dir", out_dir},
        {"run",
         {{"cycles", cycles},
          {"cadence_hr", cadence_hr},
          {"shot_rate_hz", shot_rate_hz}}},
        {"landscape", landscape.to_json()},
        {"scan",
         {{"k_min", scan_k_min}, {"k_max", scan_k_max}, {"steps", scan_steps}}},
        {"strategies", strat},
        {"learning",
         {{"depths", learn.depths},
          {"twirls_per_depth", learn.twirls_per_depth},
          {"shots_per_circuit", learn.shots_per_circuit},
          {"fit_floor", learn.fit_floor},
          {"bootstrap", learn_bootstrap}}},
        {"noise",
         {{"gate_time_ns", gate_time_ns}, {"floor_lambda", floor_lambda}}},
        {"benchmark", {{"mirror_reps", mirror_reps}}},
        {"mitigation",
         {{"instances", pec.instances},
          {"shots", pec.shots},
          {"bootstrap", pec.bootstrap}}},
        {"baseline",
         {{"instances", unmit.instances},
          {"shots", unmit.shots},
          {"bootstrap", unmit.bootstrap}}},
        {"monitor",
         {{"instances", monitor_instances}, {"shots", monitor_shots}}},
        {"readout", {{"e01", readout_e01}, {"e10", readout_e10}}},
        {"theory", theory.to_json()}};
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    detail::expect_object(j, "top level");
    detail::expect_keys(j,
                        {"seed", "out_dir", "run", "landscape", "scan",
                         "strategies", "learning", "noise", "benchmark",
                         "mitigation", "baseline", "monitor", "readout",
                         "theory"},
                        "config");
    detail::read_field(j, "seed", c.seed, "config");
    detail::read_field(j, "out_dir", c.out_dir, "config");
    if (j.contains("run")) {
      const auto& r = j.at("run");
      detail::expect_object(r, "run");
      detail::expect_keys(r, {"cycles", "cadence_hr", "shot_rate_hz"}, "run");
      detail::read_field(r, "cycles", c.cycles, "run");
      detail::read_field(r, "cadence_hr", c.cadence_hr, "run");
      detail::read_field(r, "shot_rate_hz", c.shot_rate_hz, "run");
    }
    if (j.contains("landscape"))
      c.landscape = LandscapeSpec::from_json(j.at("landscape"));
    if (j.contains("scan")) {
      const auto& s = j.at("scan");
      detail::expect_object(s, "scan");
      detail::expect_keys(s, {"k_min", "k_max", "steps"}, "scan");
      detail::read_field(s, "k_min", c.scan_k_min, "scan");
      detail::read_field(s, "k_max", c.scan_k_max, "scan");
      detail::read_field(s, "steps", c.scan_steps, "scan");
    }
    if (j.contains("strategies")) {
      const auto& arr = j.at("strategies");
      if (!arr.is_array())
        throw ConfigError("config: strategies must be an array");
      c.strategies.clear();
      for (size_t i = 0; i < arr.size(); ++i)
        c.strategies.push_back(StrategySpec::from_json(
            arr[i], "strategies[" + std::to_string(i) + "]"));
    }
    if (j.contains("learning")) {
      const auto& l = j.at("learning");
      detail::expect_object(l, "learning");
      detail::expect_keys(l,
                          {"depths", "twirls_per_depth", "shots_per_circuit",
                           "fit_floor", "bootstrap"},
                          "learning");
      detail::read_field(l, "depths", c.learn.depths, "learning");
      detail::read_field(l, "twirls_per_depth", c.learn.twirls_per_depth,
                         "learning");
      detail::read_field(l, "shots_per_circuit", c.learn.shots_per_circuit,
                         "learning");
      detail::read_field(l, "fit_floor", c.learn.fit_floor, "learning");
      detail::read_field(l, "bootstrap", c.learn_bootstrap, "learning");
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      detail::expect_object(n, "noise");
      detail::expect_keys(n, {"gate_time_ns", "floor_lambda"}, "noise");
      detail::read_field(n, "gate_time_ns", c.gate_time_ns, "noise");
      detail::read_field(n, "floor_lambda", c.floor_lambda, "noise");
    }
    if (j.contains("benchmark")) {
      const auto& b = j.at("benchmark");
      detail::expect_object(b, "benchmark");
      detail::expect_keys(b, {"mirror_reps"}, "benchmark");
      detail::read_field(b, "mirror_reps", c.mirror_reps, "benchmark");
    }
    auto read_budget = [&](const char* key, PecBudget& dst) {
      if (!j.contains(key)) return;
      const auto& b = j.at(key);
      detail::expect_object(b, key);
      detail::expect_keys(b, {"instances", "shots", "bootstrap"}, key);
      detail::read_field(b, "instances", dst.instances, key);
      detail::read_field(b, "shots", dst.shots, key);
      detail::read_field(b, "bootstrap", dst.bootstrap, key);
    };
    read_budget("mitigation", c.pec);
    read_budget("baseline", c.unmit);
    if (j.contains("monitor")) {
      const auto& m = j.at("monitor");
      detail::expect_object(m, "monitor");
      detail::expect_keys(m, {"instances", "shots"}, "monitor");
      detail::read_field(m, "instances", c.monitor_instances, "monitor");
      detail::read_field(m, "shots", c.monitor_shots, "monitor");
    }
    if (j.contains("readout")) {
      const auto& r = j.at("readout");
      detail::expect_object(r, "readout");
      detail::expect_keys(r, {"e01", "e10"}, "readout");
      detail::read_field(r, "e01", c.readout_e01, "readout");
      detail::read_field(r, "e10", c.readout_e10, "readout");
    }
    if (j.contains("theory")) c.theory = TheorySpec::from_json(j.at("theory"));
    c.validate();
    return c;
  }

  static ExperimentConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/true,
                                /*ignore_comments=*/true);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config: parse error in " + path.string() + ": " +
                        e.what());
    }
    return from_json(j);
  }

  // stable across machines and reruns; out_dir is excluded on purpose
  uint64_t fingerprint() const {
    nlohmann::json j = to_json();
    j.erase("out_dir");
    return fnv1a64(j.dump());
  }

  // the `init` template: defaults spelled out with the meaning of each knob
  static std::string annotated_template() {
    return R"cfg(// Experiment configuration. Every key is optional and defaults to the
// value shown; comments are stripped by the parser. Seeded reruns of the
// same configuration reproduce every data file byte for byte.
{
  // master seed for the whole run; every random stream derives from it
  "seed": 2024,

  // directory where CSV tables, JSON reports, and SVG plots are written
  "out_dir": "out",

  "run": {
    "cycles": 24,           // learn-mitigate cycles in a stability study
    "cadence_hr": 2.0,      // simulated hours between successive cycles
    "shot_rate_hz": 1000.0  // shot clock seen by swept-control strategies
  },

  // synthetic T1(k) landscape: per-qubit baseline plus mobile defects that
  // dig Lorentzian dips and wander by an Ornstein-Uhlenbeck walk
  "landscape": {
    "qubits": 6,
    "k_min": -1.0,                   // control-parameter range
    "k_max": 1.0,
    "base_t1_us_min": 60.0,          // defect-free T1 draw, microseconds
    "base_t1_us_max": 150.0,
    "defects_min": 2,                // defects per qubit (uniform draw)
    "defects_max": 4,
    "width_min": 0.03,               // defect width in k units
    "width_max": 0.12,
    "strength_min": 2000.0,          // added decay rate at the dip, 1/s
    "strength_max": 25000.0,
    "drift_theta_per_hr": 0.05,      // pull back toward the anchor, per hour
    "drift_sigma_per_sqrt_hr": 0.08  // diffusion per sqrt(hour)
  },

  // grid used when scanning the landscape for heatmaps and argmin tracks
  "scan": {
    "k_min": -1.0,
    "k_max": 1.0,
    "steps": 81
  },

  // control strategies to compare; commands pick one with --strategy.
  // kind "control" holds k fixed, "optimized" rescans a grid on a cadence,
  // "averaged" sweeps k across shots with a waveform
  "strategies": [
    {
      "kind": "control",
      "k": 0.0
    },
    {
      "kind": "optimized",
      "grid_min": -0.5,
      "grid_max": 0.5,
      "grid_step": 0.1,
      "reopt_period_hr": 1.5
    },
    {
      "kind": "averaged",
      "waveform": "triangle",  // or "sine"
      "freq_hz": 1.0,
      "amplitude": 0.3,
      "center": 0.0
    }
  ],

  // sparse-model learning protocol: depth schedule of repeated noisy
  // layers, randomized twirls per depth, shots per circuit
  "learning": {
    "depths": [0, 4, 12, 24, 64],
    "twirls_per_depth": 60,
    "shots_per_circuit": 32,
    "fit_floor": 0.001,  // decay means at or below this are dropped from fits
    "bootstrap": 100     // resamples for rate and overhead error bars
  },

  // physical scale of the injected noise
  "noise": {
    "gate_time_ns": 135.0,   // entangling-layer duration
    "floor_lambda": 0.0007   // baseline two-qubit rate added on every edge
  },

  // mirror benchmark: layer pairs applied forward then reversed
  "benchmark": {
    "mirror_reps": 10
  },

  // sampled-inverse estimator budget (instances x shots, bootstrap resamples)
  "mitigation": {
    "instances": 4096,
    "shots": 32,
    "bootstrap": 25
  },

  // unmitigated reference estimator budget
  "baseline": {
    "instances": 512,
    "shots": 32,
    "bootstrap": 25
  },

  // readout-monitor circuits used to debias measured observables
  "monitor": {
    "instances": 2048,
    "shots": 32
  },

  // symmetric-independent readout error rates
  "readout": {
    "e01": 0.02,   // P(read 1 | prepared 0)
    "e10": 0.015   // P(read 0 | prepared 1)
  },

  // closed-form studies: quasi-static bias, effective depth, sampling cost
  "theory": {
    "schedule": [0, 4, 12, 24, 48, 64],  // learning depth schedule
    "mu": 0.01,                          // mean per-layer decay rate
    "sigmas": [0.01, 0.02, 0.03, 0.05],  // rate spreads for the bias table
    "depth": 24,                         // mitigation depth for bias rows
    "samples": 200000,                   // Monte Carlo draws per bias row
    "cost_gamma_worse": 1.13,            // per-pair overhead, noisier layer
    "cost_gamma_better": 1.06,           // per-pair overhead, quieter layer
    "cost_pairs": [20, 40],              // circuit sizes for the cost table
    "t1_mean_us": 500.0,                 // fluctuating-T1 ensemble mean
    "t1_sd_us": 150.0,                   // and spread, truncated at zero
    "t1_trials": 1000,                   // trials in the averaged-decay study
    "mitsim_samples": 400,               // realizations per deviation violin
    "step_us": 5.0                       // idle time per depth step
  }
}
)cfg";
  }
};

}  // namespace qsn
