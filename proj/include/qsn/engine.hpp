#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qsn/model.hpp"
#include "qsn/pauli.hpp"
#include "qsn/rng.hpp"
#include "qsn/tls.hpp"

namespace qsn {

// A Clifford circuit as an ordered list of references into a layer table.
// Elements tagged with a slot id pick up that slot's noise channel right
// after the ideal layer; slot -1 means noiseless. Measurement is always
// a terminal Z-basis readout of every qubit.
struct Circuit {
  struct Element {
    int layer = 0;
    int slot = -1;
    bool twirl = false;
  };

  int n = 0;
  std::vector<CliffordLayer> layers;
  std::vector<CliffordLayer> inverse_layers;
  std::vector<Element> elements;
  int num_slots = 0;

  explicit Circuit(int n_qubits = 0) : n(n_qubits) {}

  int add_layer(const CliffordLayer& l) {
    layers.push_back(l);
    inverse_layers.push_back(l.inverse());
    return static_cast<int>(layers.size()) - 1;
  }

  void append(int layer, int slot, bool twirl) {
    if (layer < 0 || layer >= static_cast<int>(layers.size()))
      throw std::invalid_argument("circuit: unregistered layer");
    if (slot >= num_slots) num_slots = slot + 1;
    elements.push_back({layer, slot, twirl});
  }

  int noisy_occurrences() const {
    int c = 0;
    for (const auto& e : elements) c += (e.slot >= 0);
    return c;
  }

  // Net unitary action of the ideal circuit on a Pauli, with sign. Circuits
  // here are built to compile to the identity, which this lets tests assert.
  PauliString propagate_ideal(const PauliString& p) const {
    PauliString cur = p;
    for (const auto& e : elements)
      cur = conjugate(layers[static_cast<size_t>(e.layer)], cur);
    return cur;
  }
};

// [H, L1, L2] x reps then the mirrored second half. L1 couples (0,1),(2,3),...
// and L2 the offset pairs (1,2),(3,4),... Every layer is self-inverse, so the
// whole sequence is the identity and the ideal outcome is all zeros. Only the
// two CZ layers are noisy: slot 0 for L1, slot 1 for L2.
inline Circuit mirror_circuit(int n = 6, int reps = 10) {
  if (n < 2) throw std::invalid_argument("mirror_circuit: need n >= 2");
  if (reps < 0) throw std::invalid_argument("mirror_circuit: reps < 0");
  std::vector<std::pair<int, int>> e1, e2;
  for (int q = 0; q + 1 < n; q += 2) e1.emplace_back(q, q + 1);
  for (int q = 1; q + 1 < n; q += 2) e2.emplace_back(q, q + 1);
  Circuit c(n);
  const int h = c.add_layer(CliffordLayer::hadamard_layer(n));
  const int l1 = c.add_layer(CliffordLayer::cz_layer(n, e1));
  const int l2 = c.add_layer(CliffordLayer::cz_layer(n, e2));
  c.num_slots = 2;
  for (int r = 0; r < reps; ++r) {
    c.append(h, -1, false);
    c.append(l1, 0, true);
    c.append(l2, 1, true);
  }
  for (int r = 0; r < reps; ++r) {
    c.append(l2, 1, true);
    c.append(l1, 0, true);
    c.append(h, -1, false);
  }
  return c;
}

// Fidelity-decay circuit: rotate into the measurement basis eigenstates,
// apply the layer under study `depth` times (all slot 0, twirled), rotate
// back, measure. Depth must be even so the layer pairs cancel logically.
inline Circuit learning_circuit(const CliffordLayer& layer, int depth,
                                const std::string& basis_letters) {
  if (depth < 0 || depth % 2 != 0)
    throw std::invalid_argument("learning_circuit: depth must be even, >= 0");
  const int n = static_cast<int>(basis_letters.size());
  Circuit c(n);
  const auto meas = CliffordLayer::basis_change_to_z(basis_letters);
  const int prep_id = c.add_layer(meas.inverse());
  const int layer_id = c.add_layer(layer);
  const int meas_id = c.add_layer(meas);
  c.num_slots = 1;
  c.append(prep_id, -1, false);
  for (int d = 0; d < depth; ++d) c.append(layer_id, 0, true);
  c.append(meas_id, -1, false);
  return c;
}

// idle-evolution circuit: depth noisy identity slots, Z measurement
inline Circuit delay_circuit(int n, int depth) {
  if (depth < 0) throw std::invalid_argument("delay_circuit: depth < 0");
  Circuit c(n);
  const int id = c.add_layer(CliffordLayer::identity(n));
  c.num_slots = 1;
  for (int d = 0; d < depth; ++d) c.append(id, 0, true);
  return c;
}

// The Pauli each noise slot sees in the Heisenberg picture when the
// observable is pulled backward from the measurement, plus the Pauli that
// reaches the initial state.
struct BackpropResult {
  struct SlotPauli {
    int element;
    int slot;
    PauliString p;
  };
  std::vector<SlotPauli> slots;  // in forward element order
  PauliString initial;
};

inline BackpropResult backpropagate(const Circuit& c, const PauliString& obs) {
  if (obs.n() != c.n) throw std::invalid_argument("backpropagate: size mismatch");
  BackpropResult out{{}, obs};
  for (int e = static_cast<int>(c.elements.size()) - 1; e >= 0; --e) {
    const auto& el = c.elements[static_cast<size_t>(e)];
    if (el.slot >= 0) out.slots.push_back({e, el.slot, out.initial});
    out.initial = conjugate(
        c.inverse_layers[static_cast<size_t>(el.layer)], out.initial);
  }
  std::reverse(out.slots.begin(), out.slots.end());
  return out;
}

// Infinite-shot oracle: product of slot fidelities over the back-propagated
// observable, zero when the propagated Pauli cannot be read off |0...0>.
inline double exact_expectation(const Circuit& c,
                                std::span<const LindbladModel> slot_models,
                                const PauliString& obs) {
  if (static_cast<int>(slot_models.size()) < c.num_slots)
    throw std::invalid_argument("exact_expectation: missing slot models");
  const auto bp = backpropagate(c, obs);
  if (!bp.initial.is_z_type()) return 0.0;
  double v = bp.initial.negative() ? -1.0 : 1.0;
  for (const auto& sp : bp.slots)
    v *= slot_models[static_cast<size_t>(sp.slot)].fidelity(sp.p);
  return v;
}

// One random-compilation draw: a twirl Pauli per twirled element (compiled
// away exactly by its conjugate partner, so it never changes measured bits)
// and optional quasi-probability insertions per noisy occurrence with their
// accumulated sign.
struct CompiledInstance {
  uint64_t index = 0;
  int sign = 1;
  std::vector<PauliString> pre_twirls;   // aligned with circuit elements
  std::vector<uint64_t> ins_x, ins_z;    // aligned with noisy occurrences

  static CompiledInstance plain(const Circuit& c) {
    CompiledInstance inst;
    inst.pre_twirls.assign(c.elements.size(), PauliString(c.n));
    return inst;
  }
};

inline PauliString random_pauli(int n, RngStream& rng) {
  PauliString p(n);
  for (int q = 0; q < n; ++q) {
    static const char kLetters[4] = {'I', 'X', 'Y', 'Z'};
    p.set_letter(q, kLetters[rng.next_u32() & 3]);
  }
  return p;
}

inline CompiledInstance compile_twirls(const Circuit& c, uint64_t seed,
                                       uint64_t instance) {
  CompiledInstance inst;
  inst.index = instance;
  inst.pre_twirls.reserve(c.elements.size());
  for (size_t e = 0; e < c.elements.size(); ++e) {
    if (c.elements[e].twirl) {
      RngStream rng(seed, instance, static_cast<uint32_t>(e), Stream::kTwirl);
      inst.pre_twirls.push_back(random_pauli(c.n, rng));
    } else {
      inst.pre_twirls.push_back(PauliString(c.n));
    }
  }
  return inst;
}

// per-qubit asymmetric readout flips, with optional twirling by a random X
// layer whose flips are undone classically in the record
struct ReadoutModel {
  std::vector<double> p01;     // read 1 given prepared 0
  std::vector<double> p10;     // read 0 given prepared 1
  std::vector<double> x_fail;  // probability the twirl X silently does nothing
  bool twirl = true;

  static ReadoutModel ideal(int n) { return uniform(n, 0.0, 0.0); }

  static ReadoutModel uniform(int n, double e01, double e10) {
    ReadoutModel m;
    m.p01.assign(static_cast<size_t>(n), e01);
    m.p10.assign(static_cast<size_t>(n), e10);
    m.x_fail.assign(static_cast<size_t>(n), 0.0);
    m.validate();
    return m;
  }

  int n() const { return static_cast<int>(p01.size()); }

  void validate() const {
    if (p10.size() != p01.size() || x_fail.size() != p01.size())
      throw std::invalid_argument("readout: mismatched per-qubit vectors");
    for (size_t q = 0; q < p01.size(); ++q) {
      if (p01[q] < 0 || p01[q] >= 0.5 || p10[q] < 0 || p10[q] >= 0.5)
        throw std::invalid_argument("readout: probabilities must be in [0, 0.5)");
      if (x_fail[q] < 0 || x_fail[q] > 1)
        throw std::invalid_argument("readout: x_fail must be in [0, 1]");
    }
  }

  // exact Z-string attenuation of twirled readout over the support
  double attenuation(const PauliString& z_obs) const {
    double a = 1.0;
    for (int q = 0; q < z_obs.n(); ++q)
      if (z_obs.letter(q) != 'I') a *= 1.0 - p01[static_cast<size_t>(q)] -
                                        p10[static_cast<size_t>(q)];
    return a;
  }
};

struct ShotRecord {
  uint64_t shot = 0;
  uint64_t realization_id = 0;
  uint64_t bits = 0;  // readout-detwirled measured bits, qubit q at bit q
  int8_t sign = 1;    // quasi-probability sign of the instance
};

// Supplies the frozen-noise realization for each shot. The quasi-static
// contract lives here: one realization object per shot, reused at every slot.
// Sources may opt into per-slot resampling instead, which models the
// fast-fluctuation (Markovian) limit where slots are uncorrelated.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;
  virtual const NoiseRealization& for_shot(uint64_t global_shot) = 0;
  virtual bool per_slot() const { return false; }
  virtual const NoiseRealization& for_slot(uint64_t global_shot, int /*occ*/) {
    return for_shot(global_shot);
  }
};

class StaticNoiseSource final : public NoiseSource {
 public:
  explicit StaticNoiseSource(NoiseRealization r) : real_(std::move(r)) {}
  const NoiseRealization& for_shot(uint64_t) override { return real_; }

 private:
  NoiseRealization real_;
};

// Realizes noise from the landscape at the k the modulation strategy picks
// for each shot. Consecutive shots with identical k reuse the realization;
// the id increments on every rebuild.
class LandscapeNoiseSource final : public NoiseSource {
 public:
  LandscapeNoiseSource(const TlsLandscape& land, const ModulationStrategy& strat,
                       double tau_s, std::vector<LindbladModel> floors,
                       double shot_rate_hz = 1000.0)
      : land_(&land),
        strat_(&strat),
        tau_(tau_s),
        floors_(std::move(floors)),
        rate_(shot_rate_hz) {
    if (floors_.empty())
      throw std::invalid_argument("noise source: need slot floors");
  }

  const NoiseRealization& for_shot(uint64_t shot) override {
    k_.resize(static_cast<size_t>(land_->num_qubits()));
    for (int q = 0; q < land_->num_qubits(); ++q)
      k_[static_cast<size_t>(q)] = strat_->sample_k(q, shot, rate_);
    if (!have_ || k_ != last_k_) {
      real_ = realize_noise(*land_, k_, tau_, floors_);
      real_.id = next_id_++;
      last_k_ = k_;
      have_ = true;
    }
    return real_;
  }

 private:
  const TlsLandscape* land_;
  const ModulationStrategy* strat_;
  double tau_;
  std::vector<LindbladModel> floors_;
  double rate_;
  std::vector<double> k_, last_k_;
  NoiseRealization real_;
  uint64_t next_id_ = 0;
  bool have_ = false;
};

// Fast-fluctuation variant: every slot occurrence redraws the environment
// independently, picking a uniform tick of the modulation clock within one
// waveform period. The marginal k distribution matches the quasi-static
// source it is compared against while successive draws stay uncorrelated,
// so decays compose as (mean fidelity)^depth with no quasi-static curvature.
class MarkovianNoiseSource final : public NoiseSource {
 public:
  MarkovianNoiseSource(const TlsLandscape& land, const ModulationStrategy& strat,
                       double tau_s, std::vector<LindbladModel> floors,
                       uint64_t seed, uint64_t period_shots,
                       double shot_rate_hz = 1000.0)
      : land_(&land),
        strat_(&strat),
        tau_(tau_s),
        floors_(std::move(floors)),
        seed_(seed),
        period_(period_shots),
        rate_(shot_rate_hz) {
    if (floors_.empty())
      throw std::invalid_argument("noise source: need slot floors");
    if (period_ < 1 || period_ > 0xffffffffull)
      throw std::invalid_argument(
          "markovian source: period_shots must be in [1, 2^32)");
  }

  bool per_slot() const override { return true; }

  const NoiseRealization& for_shot(uint64_t shot) override {
    return at_tick(draw(shot, 0));
  }

  const NoiseRealization& for_slot(uint64_t shot, int occ) override {
    return at_tick(draw(shot, occ));
  }

 private:
  uint64_t draw(uint64_t shot, int occ) {
    RngStream r(seed_, shot, static_cast<uint32_t>(occ), Stream::kModulation);
    return r.below(static_cast<uint32_t>(period_));
  }

  const NoiseRealization& at_tick(uint64_t tick) {
    auto it = cache_.find(tick);
    if (it == cache_.end()) {
      std::vector<double> k(static_cast<size_t>(land_->num_qubits()));
      for (int q = 0; q < land_->num_qubits(); ++q)
        k[static_cast<size_t>(q)] = strat_->sample_k(q, tick, rate_);
      NoiseRealization real = realize_noise(*land_, k, tau_, floors_);
      real.id = tick;
      it = cache_.emplace(tick, std::move(real)).first;
    }
    return it->second;
  }

  const TlsLandscape* land_;
  const ModulationStrategy* strat_;
  double tau_;
  std::vector<LindbladModel> floors_;
  uint64_t seed_;
  uint64_t period_;
  double rate_;
  std::map<uint64_t, NoiseRealization> cache_;
};

// Pauli-frame Monte Carlo. Per shot: freeze a realization, push the error
// frame through the ideal layers, draw each slot's error, apply any
// quasi-probability insertions, then read out with flips and twirling.
// Everything is keyed by the global shot index, so batching does not change
// the stream.
inline std::vector<ShotRecord> run_shots(const Circuit& c,
                                         const CompiledInstance& inst,
                                         NoiseSource& noise,
                                         const ReadoutModel& ro, uint64_t seed,
                                         uint64_t first_shot, int shots) {
  if (c.n > 64) throw std::invalid_argument("run_shots: supports up to 64 qubits");
  if (ro.n() != c.n) throw std::invalid_argument("run_shots: readout size mismatch");
  const bool has_insertions = !inst.ins_x.empty();
  if (has_insertions &&
      static_cast<int>(inst.ins_x.size()) != c.noisy_occurrences())
    throw std::invalid_argument("run_shots: insertion count mismatch");
  const uint64_t qmask =
      (c.n == 64) ? ~uint64_t{0} : ((uint64_t{1} << c.n) - 1);
  bool any_fail = false;
  for (double f : ro.x_fail) any_fail |= (f > 0);

  const bool resample_per_slot = noise.per_slot();
  std::vector<ShotRecord> out;
  out.reserve(static_cast<size_t>(shots));
  for (int s = 0; s < shots; ++s) {
    const uint64_t gs = first_shot + static_cast<uint64_t>(s);
    const NoiseRealization* shot_real = &noise.for_shot(gs);
    const uint64_t realization_id = shot_real->id;

    uint64_t fx = 0, fz = 0;
    int occ = 0;
    for (const auto& el : c.elements) {
      uint64_t tx = 0, tz = 0;
      c.layers[static_cast<size_t>(el.layer)].apply_to_bits(
          {&fx, 1}, {&fz, 1}, {&tx, 1}, {&tz, 1});
      fx = tx;
      fz = tz;
      if (el.slot >= 0) {
        const auto& real =
            resample_per_slot ? noise.for_slot(gs, occ) : *shot_real;
        if (static_cast<int>(real.slot_models.size()) < c.num_slots)
          throw std::invalid_argument(
              "run_shots: realization missing slot models");
        RngStream err(seed, gs, static_cast<uint32_t>(occ), Stream::kError);
        real.slot_models[static_cast<size_t>(el.slot)].sample_error_bits(
            err, {&fx, 1}, {&fz, 1});
        if (has_insertions) {
          fx ^= inst.ins_x[static_cast<size_t>(occ)];
          fz ^= inst.ins_z[static_cast<size_t>(occ)];
        }
        ++occ;
      }
    }

    // Z-basis measurement: the frame's X part flips the ideal all-zeros
    RngStream ror(seed, gs, 0, Stream::kReadout);
    uint64_t state = fx & qmask;
    uint64_t rmask = 0;
    if (ro.twirl) {
      rmask = ror.next_u64() & qmask;
      uint64_t applied = rmask;
      if (any_fail) {
        for (int q = 0; q < c.n; ++q) {
          const uint64_t bit = uint64_t{1} << q;
          if ((rmask & bit) &&
              ror.bernoulli_u32(RngStream::bernoulli_threshold(
                  ro.x_fail[static_cast<size_t>(q)])))
            applied ^= bit;  // the X silently failed
        }
      }
      state ^= applied;
    }
    uint64_t recorded = 0;
    for (int q = 0; q < c.n; ++q) {
      const uint64_t bit = uint64_t{1} << q;
      const bool one = state & bit;
      const double p = one ? ro.p10[static_cast<size_t>(q)]
                           : ro.p01[static_cast<size_t>(q)];
      bool read_one = one;
      if (p > 0 && ror.bernoulli_u32(RngStream::bernoulli_threshold(p)))
        read_one = !read_one;
      if (read_one) recorded |= bit;
    }
    recorded ^= rmask;  // undo the intended twirl flips classically

    out.push_back(
        {gs, realization_id, recorded, static_cast<int8_t>(inst.sign)});
  }
  return out;
}

// support mask of a Z-type observable, bit q set when letter q is Z
inline uint64_t z_mask(const PauliString& obs) {
  if (!obs.is_z_type() || obs.n() > 64)
    throw std::invalid_argument("z_mask: need a Z-type observable on <= 64 qubits");
  uint64_t m = 0;
  for (int q = 0; q < obs.n(); ++q)
    if (obs.letter(q) == 'Z') m |= uint64_t{1} << q;
  return m;
}

inline double record_parity(const ShotRecord& r, uint64_t mask) {
  const double p = (std::popcount(r.bits & mask) & 1) ? -1.0 : 1.0;
  return p * static_cast<double>(r.sign);
}

// Readout health monitor: depth-0 circuits that prepare |0...0>, apply a
// per-instance random X pattern, measure, and compare against the intent.
// c_q estimates the per-qubit readout attenuation including any broken-X
// effect; z_debiased divides out the configured flip probabilities so a
// healthy gate sits at 1 and a broken one dips below.
struct MonitorResult {
  std::vector<double> c;
  std::vector<double> c_stderr;
  std::vector<double> z_debiased;
  int instances = 0;
  int shots = 0;

  // empirical correction factor for a Z-type observable estimate
  double correction(const PauliString& z_obs) const {
    double f = 1.0;
    for (int q = 0; q < z_obs.n(); ++q)
      if (z_obs.letter(q) != 'I') f *= c[static_cast<size_t>(q)];
    return f;
  }
};

inline MonitorResult run_readout_monitor(const ReadoutModel& ro, int instances,
                                         int shots, uint64_t seed) {
  const int n = ro.n();
  if (n > 64) throw std::invalid_argument("monitor: supports up to 64 qubits");
  if (instances < 2 || shots < 1)
    throw std::invalid_argument("monitor: need at least 2 instances");
  const uint64_t qmask = (n == 64) ? ~uint64_t{0} : ((uint64_t{1} << n) - 1);

  std::vector<std::vector<double>> inst_means(
      static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(instances)));
  for (int i = 0; i < instances; ++i) {
    RngStream pick(seed, static_cast<uint64_t>(i), 0, Stream::kMonitorFlip);
    const uint64_t intended = pick.next_u64() & qmask;
    std::vector<double> acc(static_cast<size_t>(n), 0.0);
    for (int s = 0; s < shots; ++s) {
      const uint64_t gs = static_cast<uint64_t>(i) *
                              static_cast<uint64_t>(shots) +
                          static_cast<uint64_t>(s);
      RngStream ror(seed, gs, 1, Stream::kReadout);
      for (int q = 0; q < n; ++q) {
        const uint64_t bit = uint64_t{1} << q;
        bool state = intended & bit;
        if (state && ror.bernoulli_u32(RngStream::bernoulli_threshold(
                         ro.x_fail[static_cast<size_t>(q)])))
          state = false;  // broken X left the qubit in |0>
        const double p = state ? ro.p10[static_cast<size_t>(q)]
                               : ro.p01[static_cast<size_t>(q)];
        bool read_one = state;
        if (p > 0 && ror.bernoulli_u32(RngStream::bernoulli_threshold(p)))
          read_one = !read_one;
        const bool match = read_one == static_cast<bool>(intended & bit);
        acc[static_cast<size_t>(q)] += match ? 1.0 : -1.0;
      }
    }
    for (int q = 0; q < n; ++q)
      inst_means[static_cast<size_t>(q)][static_cast<size_t>(i)] =
          acc[static_cast<size_t>(q)] / shots;
  }

  MonitorResult out;
  out.instances = instances;
  out.shots = shots;
  out.c.resize(static_cast<size_t>(n));
  out.c_stderr.resize(static_cast<size_t>(n));
  out.z_debiased.resize(static_cast<size_t>(n));
  for (int q = 0; q < n; ++q) {
    const auto& m = inst_means[static_cast<size_t>(q)];
    double s = 0;
    for (double v : m) s += v;
    const double mean = s / instances;
    double var = 0;
    for (double v : m) var += (v - mean) * (v - mean);
    out.c[static_cast<size_t>(q)] = mean;
    out.c_stderr[static_cast<size_t>(q)] =
        std::sqrt(var / (instances - 1.0) / instances);
    out.z_debiased[static_cast<size_t>(q)] =
        mean / (1.0 - ro.p01[static_cast<size_t>(q)] -
                ro.p10[static_cast<size_t>(q)]);
  }
  return out;
}

}  // namespace qsn
