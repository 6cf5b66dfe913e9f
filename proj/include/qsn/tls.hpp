#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsn/model.hpp"
#include "qsn/rng.hpp"

namespace qsn {

// One Lorentzian dip in the T1-vs-k profile of a qubit. The center wanders
// over time; `anchor` is the point the random walk reverts to.
struct Defect {
  double anchor = 0.0;
  double center = 0.0;
  double width = 0.05;     // dimensionless k units
  double strength = 0.0;   // added decay rate 1/s at the dip center
};

struct DriftParams {
  double theta_per_hr = 0.05;       // mean reversion rate
  double sigma_per_sqrt_hr = 0.08;  // diffusion per sqrt(hour)
};

struct QubitEnvironment {
  double base_t1 = 100e-6;  // seconds
  std::vector<Defect> defects;
};

struct SyntheticParams {
  double k_min = -1.0;
  double k_max = 1.0;
  double base_t1_min = 60e-6;
  double base_t1_max = 150e-6;
  int min_defects = 2;
  int max_defects = 4;
  double width_min = 0.03;
  double width_max = 0.12;
  double strength_min = 2e3;    // barely visible dip
  double strength_max = 2.5e4;  // dip T1 toward tens of microseconds
  DriftParams drift;
};

// Per-qubit T1(k) landscape shaped by mobile two-level-system defects.
// The landscape owns its clock: drift() advances it, reads use the current
// defect positions.
class TlsLandscape {
 public:
  TlsLandscape(std::vector<QubitEnvironment> qubits, DriftParams drift,
               double k_min = -1.0, double k_max = 1.0)
      : qubits_(std::move(qubits)), drift_(drift), k_min_(k_min), k_max_(k_max) {
    if (qubits_.empty()) throw std::invalid_argument("landscape: no qubits");
    if (!(k_min_ < k_max_)) throw std::invalid_argument("landscape: bad k range");
    for (const auto& q : qubits_) {
      if (!(q.base_t1 > 0)) throw std::invalid_argument("landscape: base_t1 <= 0");
      for (const auto& d : q.defects) {
        if (!(d.width > 0)) throw std::invalid_argument("landscape: width <= 0");
        if (d.strength < 0) throw std::invalid_argument("landscape: strength < 0");
      }
    }
  }

  static TlsLandscape synthetic(int num_qubits, uint64_t seed,
                                const SyntheticParams& p = {}) {
    RngStream rng(seed, 0, 0, Stream::kLandscape);
    std::vector<QubitEnvironment> qs(static_cast<size_t>(num_qubits));
    for (auto& q : qs) {
      q.base_t1 = p.base_t1_min + (p.base_t1_max - p.base_t1_min) * rng.uniform();
      const int nd = p.min_defects +
                     static_cast<int>(rng.below(
                         static_cast<uint32_t>(p.max_defects - p.min_defects + 1)));
      q.defects.resize(static_cast<size_t>(nd));
      for (auto& d : q.defects) {
        d.anchor = p.k_min + (p.k_max - p.k_min) * rng.uniform();
        d.center = d.anchor;
        d.width = p.width_min + (p.width_max - p.width_min) * rng.uniform();
        d.strength =
            p.strength_min + (p.strength_max - p.strength_min) * rng.uniform();
      }
    }
    return TlsLandscape(std::move(qs), p.drift, p.k_min, p.k_max);
  }

  int num_qubits() const { return static_cast<int>(qubits_.size()); }
  double time_hours() const { return time_hr_; }
  double k_min() const { return k_min_; }
  double k_max() const { return k_max_; }
  const std::vector<QubitEnvironment>& qubits() const { return qubits_; }

  // 1/T1 = 1/base + sum_d strength_d / (1 + ((k - center_d)/width_d)^2)
  double t1_at(int qubit, double k) const {
    check_qubit(qubit);
    if (k < k_min_ || k > k_max_)
      throw std::invalid_argument("t1_at: k outside configured range");
    const auto& q = qubits_[static_cast<size_t>(qubit)];
    double rate = 1.0 / q.base_t1;
    for (const auto& d : q.defects) {
      const double u = (k - d.center) / d.width;
      rate += d.strength / (1.0 + u * u);
    }
    return 1.0 / rate;
  }

  // mean-reverting random walk of every defect center, Euler step
  void drift(double dt_hr, RngStream& rng) {
    if (!(dt_hr > 0)) throw std::invalid_argument("drift: dt must be > 0");
    for (auto& q : qubits_) {
      for (auto& d : q.defects) {
        d.center += -drift_.theta_per_hr * (d.center - d.anchor) * dt_hr +
                    drift_.sigma_per_sqrt_hr * std::sqrt(dt_hr) * rng.normal();
      }
    }
    time_hr_ += dt_hr;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["time_hr"] = time_hr_;
    j["k_min"] = k_min_;
    j["k_max"] = k_max_;
    j["drift"] = {{"theta_per_hr", drift_.theta_per_hr},
                  {"sigma_per_sqrt_hr", drift_.sigma_per_sqrt_hr}};
    j["qubits"] = nlohmann::json::array();
    for (const auto& q : qubits_) {
      nlohmann::json jq;
      jq["base_t1"] = q.base_t1;
      jq["defects"] = nlohmann::json::array();
      for (const auto& d : q.defects)
        jq["defects"].push_back({{"anchor", d.anchor},
                                 {"center", d.center},
                                 {"width", d.width},
                                 {"strength", d.strength}});
      j["qubits"].push_back(std::move(jq));
    }
    return j;
  }

  static TlsLandscape from_json(const nlohmann::json& j) {
    std::vector<QubitEnvironment> qs;
    for (const auto& jq : j.at("qubits")) {
      QubitEnvironment q;
      q.base_t1 = jq.at("base_t1").get<double>();
      for (const auto& jd : jq.at("defects")) {
        Defect d;
        d.anchor = jd.at("anchor").get<double>();
        d.center = jd.at("center").get<double>();
        d.width = jd.at("width").get<double>();
        d.strength = jd.at("strength").get<double>();
        q.defects.push_back(d);
      }
      qs.push_back(std::move(q));
    }
    DriftParams dp{j.at("drift").at("theta_per_hr").get<double>(),
                   j.at("drift").at("sigma_per_sqrt_hr").get<double>()};
    TlsLandscape out(std::move(qs), dp, j.at("k_min").get<double>(),
                     j.at("k_max").get<double>());
    out.time_hr_ = j.at("time_hr").get<double>();
    return out;
  }

 private:
  void check_qubit(int q) const {
    if (q < 0 || q >= num_qubits())
      throw std::invalid_argument("landscape: qubit out of range");
  }

  std::vector<QubitEnvironment> qubits_;
  DriftParams drift_;
  double k_min_, k_max_;
  double time_hr_ = 0.0;
};

constexpr double kPeDelaySeconds = 40e-6;

// excited-state survival after a fixed delay, the quantity the k scans probe
inline double pe_proxy(double t1, double delay = kPeDelaySeconds) {
  if (!(t1 > 0)) throw std::invalid_argument("pe_proxy: t1 must be > 0");
  if (delay < 0) throw std::invalid_argument("pe_proxy: delay must be >= 0");
  return std::exp(-delay / t1);
}

inline std::vector<double> default_k_grid(double k_min = -1.0, double k_max = 1.0,
                                          double step = 0.05) {
  std::vector<double> g;
  for (double k = k_min; k <= k_max + 1e-12; k += step)
    g.push_back(std::min(k, k_max));
  return g;
}

struct ScanPoint {
  double k = 0.0;
  double pe = 0.0;
};

inline std::vector<ScanPoint> scan_pe(const TlsLandscape& land, int qubit,
                                      std::span<const double> grid,
                                      double delay = kPeDelaySeconds) {
  if (grid.empty()) throw std::invalid_argument("scan_pe: empty grid");
  std::vector<ScanPoint> out(grid.size());
  for (size_t i = 0; i < grid.size(); ++i)
    out[i] = {grid[i], pe_proxy(land.t1_at(qubit, grid[i]), delay)};
  return out;
}

// argmax of the scan; ties break toward the point nearest the grid center
inline double optimize_k(const TlsLandscape& land, int qubit,
                         std::span<const double> grid,
                         double delay = kPeDelaySeconds) {
  const auto scan = scan_pe(land, qubit, grid, delay);
  const double mid = 0.5 * (grid.front() + grid.back());
  double best_k = scan[0].k, best_pe = scan[0].pe;
  for (const auto& pt : scan) {
    if (pt.pe > best_pe ||
        (pt.pe == best_pe && std::fabs(pt.k - mid) < std::fabs(best_k - mid))) {
      best_pe = pt.pe;
      best_k = pt.k;
    }
  }
  return best_k;
}

enum class Waveform { kSine, kTriangle };

// How the control parameter is driven during an experiment: held fixed,
// re-optimized on a cadence, or swept continuously across shots.
struct ModulationStrategy {
  enum class Kind { kControl, kOptimized, kAveraged };

  Kind kind = Kind::kControl;
  // control
  double k_fixed = 0.0;
  // optimized
  std::vector<double> grid;
  double reopt_period_hr = 1.5;
  std::vector<double> k_star;  // per qubit, filled by maybe_reoptimize
  double last_opt_hr = -std::numeric_limits<double>::infinity();
  // averaged
  Waveform waveform = Waveform::kTriangle;
  double freq_hz = 1.0;
  double amplitude = 0.2;
  double center = 0.0;

  static ModulationStrategy control(double k) {
    ModulationStrategy s;
    s.kind = Kind::kControl;
    s.k_fixed = k;
    return s;
  }
  static ModulationStrategy optimized(std::vector<double> grid,
                                      double period_hr = 1.5) {
    if (grid.empty()) throw std::invalid_argument("optimized: empty grid");
    ModulationStrategy s;
    s.kind = Kind::kOptimized;
    s.grid = std::move(grid);
    s.reopt_period_hr = period_hr;
    return s;
  }
  static ModulationStrategy averaged(Waveform w, double freq_hz, double amplitude,
                                     double center = 0.0) {
    if (amplitude < 0) throw std::invalid_argument("averaged: amplitude < 0");
    ModulationStrategy s;
    s.kind = Kind::kAveraged;
    s.waveform = w;
    s.freq_hz = freq_hz;
    s.amplitude = amplitude;
    s.center = center;
    return s;
  }

  // re-scan every qubit if the period has elapsed; returns true when it did
  bool maybe_reoptimize(const TlsLandscape& land) {
    if (kind != Kind::kOptimized) return false;
    if (land.time_hours() - last_opt_hr < reopt_period_hr && !k_star.empty())
      return false;
    k_star.resize(static_cast<size_t>(land.num_qubits()));
    for (int q = 0; q < land.num_qubits(); ++q)
      k_star[static_cast<size_t>(q)] = optimize_k(land, q, grid);
    last_opt_hr = land.time_hours();
    return true;
  }

  // k for a given qubit and shot; averaged strategies advance with the shot
  // clock, wave(0) = 0 and ascending
  double sample_k(int qubit, uint64_t shot_index, double shot_rate_hz) const {
    switch (kind) {
      case Kind::kControl:
        return k_fixed;
      case Kind::kOptimized:
        if (k_star.empty())
          throw std::logic_error("sample_k: optimize before sampling");
        return k_star.at(static_cast<size_t>(qubit));
      case Kind::kAveraged: {
        if (!(shot_rate_hz > freq_hz))
          throw std::invalid_argument("sample_k: shot rate below waveform rate");
        const double t = static_cast<double>(shot_index) / shot_rate_hz;
        double cycles = freq_hz * t;
        cycles -= std::floor(cycles);
        double wave;
        if (waveform == Waveform::kSine) {
          wave = std::sin(2.0 * M_PI * cycles);
        } else {
          if (cycles < 0.25)
            wave = 4.0 * cycles;
          else if (cycles < 0.75)
            wave = 2.0 - 4.0 * cycles;
          else
            wave = 4.0 * cycles - 4.0;
        }
        return center + amplitude * wave;
      }
    }
    throw std::logic_error("sample_k: bad strategy kind");
  }
};

inline const char* strategy_name(ModulationStrategy::Kind k) {
  switch (k) {
    case ModulationStrategy::Kind::kControl: return "control";
    case ModulationStrategy::Kind::kOptimized: return "optimized";
    case ModulationStrategy::Kind::kAveraged: return "averaged";
  }
  return "?";
}

// Noise models for every circuit slot at one frozen instant: the T1 part
// follows from the landscape at the given per-qubit k, and each slot may add
// a static non-T1 floor.
struct NoiseRealization {
  std::vector<LindbladModel> slot_models;
  uint64_t id = 0;
  double time_hr = 0.0;
};

inline NoiseRealization realize_noise(const TlsLandscape& land,
                                      std::span<const double> k, double tau_s,
                                      std::span<const LindbladModel> slot_floors) {
  if (static_cast<int>(k.size()) != land.num_qubits())
    throw std::invalid_argument("realize_noise: need one k per qubit");
  if (slot_floors.empty())
    throw std::invalid_argument("realize_noise: need at least one slot floor");
  std::vector<double> t1(k.size());
  for (size_t q = 0; q < k.size(); ++q)
    t1[q] = land.t1_at(static_cast<int>(q), k[q]);
  NoiseRealization out;
  out.time_hr = land.time_hours();
  const auto t1_model =
      model_from_t1(t1, tau_s, slot_floors.front().generators_ptr());
  out.slot_models.reserve(slot_floors.size());
  for (const auto& floor : slot_floors)
    out.slot_models.push_back(add(t1_model, floor));
  return out;
}

}  // namespace qsn
