#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsn/engine.hpp"
#include "qsn/model.hpp"
#include "qsn/nnls.hpp"
#include "qsn/numeric.hpp"
#include "qsn/pauli.hpp"
#include "qsn/rng.hpp"

namespace qsn {

struct LearningConfig {
  std::vector<int> depths{0, 4, 12, 24, 64};
  int twirls_per_depth = 60;
  int shots_per_circuit = 32;
  double fit_floor = 1e-3;

  void validate() const {
    if (depths.size() < 2)
      throw std::invalid_argument("learning config: need at least two depths");
    bool has_zero = false;
    for (int d : depths) {
      if (d < 0 || d % 2 != 0)
        throw std::invalid_argument("learning config: depths must be even, >= 0");
      has_zero |= (d == 0);
    }
    if (!has_zero)
      throw std::invalid_argument("learning config: depth 0 anchors SPAM");
    if (twirls_per_depth < 2)
      throw std::invalid_argument("learning config: need >= 2 twirls per depth");
    if (shots_per_circuit < 1)
      throw std::invalid_argument("learning config: need >= 1 shot");
  }
};

// Nine product bases built from a letter pair (a, b): even qubits measure a,
// odd qubits measure b. Every chain edge has one even and one odd endpoint,
// so across the set each edge realizes all nine two-qubit letter pairs.
// Duplicate strings (n = 1) collapse.
inline std::vector<std::string> measurement_bases(int n) {
  if (n < 1) throw std::invalid_argument("measurement_bases: n < 1");
  static const char kLetters[3] = {'X', 'Y', 'Z'};
  std::vector<std::string> out;
  for (char a : kLetters) {
    for (char b : kLetters) {
      std::string s(static_cast<size_t>(n), 'I');
      for (int q = 0; q < n; ++q) s[static_cast<size_t>(q)] = (q % 2 == 0) ? a : b;
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
  }
  return out;
}

// Orbit structure of the measured Paulis under conjugation by the layer.
// A fixed point learns its own fidelity; a 2-cycle learns the product
// f_P f_P' and the reported per-layer value rests on the symmetry assumption
// f_P = f_P' (recorded by `symmetrized`).
struct DegeneracyPair {
  int k;                // generator index
  PauliString partner;  // unsigned conjugate image
  bool fixed_point;
};

inline std::vector<DegeneracyPair> degeneracy_pairs(const CliffordLayer& layer,
                                                    const GeneratorSet& gs) {
  std::vector<DegeneracyPair> out;
  out.reserve(static_cast<size_t>(gs.size()));
  for (int k = 0; k < gs.size(); ++k) {
    PauliString img = conjugate(layer, gs.paulis[static_cast<size_t>(k)]);
    img.set_negative(false);
    const bool fixed = img.bits_equal(gs.paulis[static_cast<size_t>(k)]);
    out.push_back({k, std::move(img), fixed});
  }
  return out;
}

// Weighted log-linear decay fit for the learning protocol. Depths count
// layer applications, so the fitted base is already the per-layer (pair
// square root) fidelity. Throws when every mean sits at or below the floor.
inline ExpFit fit_fidelity(std::span<const double> depths,
                           std::span<const double> means,
                           std::span<const double> stderrs,
                           double floor = 1e-3) {
  bool any_above = false;
  for (double m : means) any_above |= (m > floor);
  if (!any_above)
    throw std::invalid_argument("fit_fidelity: every mean at the floor, unfittable");
  return fit_exponential_loglinear(depths, means, stderrs, floor);
}

struct SolveResult {
  std::vector<double> lambda;
  double residual = 0.0;
  int iterations = 0;
};

// Nonnegative least squares for the rates: rows are the measured Paulis,
// M_jk their symplectic overlap with each generator, b_j = -ln(f_j)/2.
// The overlap matrix must have full column rank; a deficiency names the
// generators spanning the unresolved directions.
inline SolveResult solve_lambda(std::span<const double> fidelities,
                                const GeneratorSet& gs, double tol = 1e-10) {
  const size_t k = static_cast<size_t>(gs.size());
  if (fidelities.size() != k)
    throw std::invalid_argument("solve_lambda: need one fidelity per generator");

  NnlsProblem p;
  p.rows = k;
  p.cols = k;
  p.a.assign(k * k, 0.0);
  p.b.assign(k, 0.0);
  for (size_t j = 0; j < k; ++j) {
    // f > 1 (negative b entry) is allowed: fit noise can overshoot, and the
    // nonnegativity constraint absorbs it
    if (!(fidelities[j] > 0.0))
      throw std::invalid_argument("solve_lambda: fidelities must be positive");
    for (size_t c = 0; c < k; ++c)
      p.at(j, c) = symplectic_product(gs.paulis[j], gs.paulis[c]) ? 1.0 : 0.0;
    p.b[j] = -0.5 * std::log(fidelities[j]);
  }

  // column-rank audit by plain elimination on a copy
  {
    std::vector<double> m(p.a);
    std::vector<bool> pivoted(k, false);
    size_t row = 0;
    for (size_t c = 0; c < k && row < k; ++c) {
      size_t best = row;
      double mag = 0;
      for (size_t r = row; r < k; ++r) {
        const double v = std::fabs(m[c * k + r]);
        if (v > mag) {
          mag = v;
          best = r;
        }
      }
      if (mag < 1e-9) continue;
      for (size_t cc = 0; cc < k; ++cc) std::swap(m[cc * k + row], m[cc * k + best]);
      for (size_t r = 0; r < k; ++r) {
        if (r == row) continue;
        const double factor = m[c * k + r] / m[c * k + row];
        if (factor != 0.0)
          for (size_t cc = c; cc < k; ++cc) m[cc * k + r] -= factor * m[cc * k + row];
      }
      pivoted[c] = true;
      ++row;
    }
    std::vector<int> missing;
    for (size_t c = 0; c < k; ++c)
      if (!pivoted[c]) missing.push_back(static_cast<int>(c));
    if (!missing.empty()) {
      std::ostringstream os;
      os << "solve_lambda: underdetermined, unresolvable generators:";
      for (int c : missing) os << ' ' << gs.paulis[static_cast<size_t>(c)].text();
      throw std::invalid_argument(os.str());
    }
  }

  auto res = nnls_solve(p, tol);
  return {std::move(res.x), res.residual_norm, res.iterations};
}

struct FidelityRecord {
  std::string pauli;
  std::string partner;
  bool symmetrized = false;  // value rests on the pair-symmetry assumption
  std::vector<double> depths;
  std::vector<double> means;
  std::vector<double> stderrs;
  double a = 1.0;
  double f = 1.0;
  double residual = 0.0;
  bool clipped = false;
  bool clamped = false;
};

struct LearnResult {
  LindbladModel model;
  std::vector<double> lambda_stderr;
  double gamma = 1.0;
  double gamma_stderr = 0.0;
  double solve_residual = 0.0;
  std::vector<FidelityRecord> records;
  nlohmann::json report;
};

namespace detail {

struct MeasurePlan {
  std::vector<std::string> bases;
  std::vector<std::vector<int>> gens_in_basis;  // basis -> generator indices
  std::vector<uint64_t> mask;                   // generator -> parity mask
};

inline uint64_t support_mask(const PauliString& p) {
  uint64_t m = 0;
  for (int q = 0; q < p.n(); ++q)
    if (p.letter(q) != 'I') m |= uint64_t{1} << q;
  return m;
}

inline MeasurePlan plan_measurements(const GeneratorSet& gs) {
  MeasurePlan plan;
  plan.bases = measurement_bases(gs.n);
  plan.gens_in_basis.resize(plan.bases.size());
  plan.mask.resize(static_cast<size_t>(gs.size()));
  for (int k = 0; k < gs.size(); ++k) {
    const auto& p = gs.paulis[static_cast<size_t>(k)];
    plan.mask[static_cast<size_t>(k)] = support_mask(p);
    for (size_t b = 0; b < plan.bases.size(); ++b) {
      bool diagonal = true;
      for (int q = 0; q < gs.n && diagonal; ++q) {
        const char l = p.letter(q);
        if (l != 'I' && l != plan.bases[b][static_cast<size_t>(q)])
          diagonal = false;
      }
      if (diagonal) plan.gens_in_basis[b].push_back(k);
    }
  }
  return plan;
}

inline nlohmann::json record_to_json(const FidelityRecord& r) {
  return nlohmann::json{{"pauli", r.pauli},       {"partner", r.partner},
                        {"symmetrized", r.symmetrized},
                        {"depths", r.depths},     {"means", r.means},
                        {"stderrs", r.stderrs},   {"a", r.a},
                        {"f", r.f},               {"residual", r.residual},
                        {"clipped", r.clipped},   {"clamped", r.clamped}};
}

inline LearnResult assemble(const GeneratorSet& gs,
                            std::shared_ptr<const GeneratorSet> gs_ptr,
                            std::vector<FidelityRecord> records,
                            const std::vector<double>& fhat,
                            std::vector<std::vector<double>> boot_lambda,
                            std::vector<double> boot_gamma) {
  auto solved = solve_lambda(fhat, gs);
  LearnResult out{LindbladModel(std::move(gs_ptr), solved.lambda),
                  {},    1.0, 0.0, solved.residual,
                  std::move(records), {}};
  out.gamma = out.model.gamma();
  out.lambda_stderr.assign(static_cast<size_t>(gs.size()), 0.0);
  if (!boot_gamma.empty()) {
    out.gamma_stderr = sample_stdev(boot_gamma);
    for (size_t k = 0; k < out.lambda_stderr.size(); ++k) {
      std::vector<double> col(boot_lambda.size());
      for (size_t r = 0; r < boot_lambda.size(); ++r) col[r] = boot_lambda[r][k];
      out.lambda_stderr[k] = sample_stdev(col);
    }
  }

  nlohmann::json j;
  j["lambda"] = out.model.lambda();
  j["lambda_stderr"] = out.lambda_stderr;
  j["gamma"] = out.gamma;
  j["gamma_stderr"] = out.gamma_stderr;
  j["solve_residual"] = out.solve_residual;
  j["records"] = nlohmann::json::array();
  for (const auto& r : out.records) j["records"].push_back(record_to_json(r));
  j["local_gamma"] = nlohmann::json::object();
  j["local_gamma"]["qubit"] = nlohmann::json::array();
  for (int q = 0; q < gs.n; ++q)
    j["local_gamma"]["qubit"].push_back(out.model.local_gamma_qubit(q));
  j["local_gamma"]["edge"] = nlohmann::json::array();
  for (size_t e = 0; e < gs.edges.size(); ++e)
    j["local_gamma"]["edge"].push_back(
        out.model.local_gamma_edge(static_cast<int>(e)));
  if (!boot_gamma.empty()) {
    std::vector<double> g(boot_gamma);
    j["bootstrap"] = {{"rounds", boot_gamma.size()},
                      {"gamma_p16", percentile(g, 0.16)},
                      {"gamma_p50", percentile(g, 0.50)},
                      {"gamma_p84", percentile(g, 0.84)}};
  }
  out.report = std::move(j);
  return out;
}

}  // namespace detail

// Protocol against the infinite-shot oracle: per-basis decay curves computed
// exactly, then the same fit and solve path as the sampled variant. SPAM-free,
// so the fitted amplitudes are 1 and the result is twirl independent.
inline LearnResult learn_exact(const CliffordLayer& layer,
                               const LindbladModel& truth,
                               const LearningConfig& cfg = {}) {
  cfg.validate();
  auto gs_ptr = truth.generators_ptr();
  const GeneratorSet& gs = *gs_ptr;
  const auto plan = detail::plan_measurements(gs);
  const auto pairs = degeneracy_pairs(layer, gs);
  const std::vector<LindbladModel> models{truth};

  std::vector<double> xs(cfg.depths.begin(), cfg.depths.end());
  std::vector<std::vector<double>> means(
      static_cast<size_t>(gs.size()),
      std::vector<double>(cfg.depths.size(), 0.0));
  std::vector<bool> seen(static_cast<size_t>(gs.size()), false);
  for (size_t b = 0; b < plan.bases.size(); ++b) {
    for (size_t di = 0; di < cfg.depths.size(); ++di) {
      const auto circuit =
          learning_circuit(layer, cfg.depths[di], plan.bases[b]);
      for (int k : plan.gens_in_basis[b]) {
        if (seen[static_cast<size_t>(k)]) continue;
        PauliString obs(gs.n);
        for (int q = 0; q < gs.n; ++q)
          if (plan.mask[static_cast<size_t>(k)] & (uint64_t{1} << q))
            obs.set_letter(q, 'Z');
        means[static_cast<size_t>(k)][di] =
            exact_expectation(circuit, models, obs);
      }
    }
    for (int k : plan.gens_in_basis[b]) seen[static_cast<size_t>(k)] = true;
  }

  std::vector<FidelityRecord> records;
  std::vector<double> fhat(static_cast<size_t>(gs.size()), 1.0);
  for (int k = 0; k < gs.size(); ++k) {
    const auto fit = fit_fidelity(xs, means[static_cast<size_t>(k)], {},
                                  cfg.fit_floor);
    FidelityRecord r;
    r.pauli = gs.paulis[static_cast<size_t>(k)].text();
    r.partner = pairs[static_cast<size_t>(k)].partner.text();
    r.symmetrized = !pairs[static_cast<size_t>(k)].fixed_point;
    r.depths = xs;
    r.means = means[static_cast<size_t>(k)];
    r.stderrs.assign(xs.size(), 0.0);
    r.a = std::min(fit.a, 1.0);
    r.f = fit.f;
    r.residual = fit.residual;
    r.clipped = fit.clipped;
    r.clamped = fit.clamped;
    fhat[static_cast<size_t>(k)] = fit.f;
    records.push_back(std::move(r));
  }
  return detail::assemble(gs, gs_ptr, std::move(records), fhat, {}, {});
}

// Full sampled protocol: per (basis, depth) run `twirls_per_depth` randomly
// compiled circuits of `shots_per_circuit` shots each against the provided
// noise source, estimate each measurable Pauli's decay, fit, and solve.
// Bootstrap rounds resample whole circuit instances.
inline LearnResult learn_sampled(const CliffordLayer& layer,
                                 std::shared_ptr<const GeneratorSet> gs_ptr,
                                 NoiseSource& noise, const ReadoutModel& ro,
                                 uint64_t seed, const LearningConfig& cfg = {},
                                 int bootstrap = 100) {
  cfg.validate();
  const GeneratorSet& gs = *gs_ptr;
  const auto plan = detail::plan_measurements(gs);
  const auto pairs = degeneracy_pairs(layer, gs);
  const size_t nb = plan.bases.size(), nd = cfg.depths.size();
  const int twirls = cfg.twirls_per_depth, shots = cfg.shots_per_circuit;

  // inst_means[b][d][obs][t]: per-instance shot means
  std::vector<std::vector<std::vector<std::vector<double>>>> inst_means(nb);
  for (size_t b = 0; b < nb; ++b) {
    inst_means[b].resize(nd);
    for (size_t di = 0; di < nd; ++di) {
      inst_means[b][di].assign(plan.gens_in_basis[b].size(),
                               std::vector<double>(static_cast<size_t>(twirls)));
      const auto circuit = learning_circuit(layer, cfg.depths[di], plan.bases[b]);
      for (int t = 0; t < twirls; ++t) {
        const uint64_t key =
            (b * nd + di) * static_cast<uint64_t>(twirls) +
            static_cast<uint64_t>(t);
        const auto inst = compile_twirls(circuit, seed, key);
        const auto recs = run_shots(circuit, inst, noise, ro, seed,
                                    key * static_cast<uint64_t>(shots), shots);
        for (size_t oi = 0; oi < plan.gens_in_basis[b].size(); ++oi) {
          const uint64_t mask =
              plan.mask[static_cast<size_t>(plan.gens_in_basis[b][oi])];
          double acc = 0;
          for (const auto& rec : recs) acc += record_parity(rec, mask);
          inst_means[b][di][oi][static_cast<size_t>(t)] = acc / shots;
        }
      }
    }
  }

  std::vector<double> xs(cfg.depths.begin(), cfg.depths.end());

  // pool instance means across the bases that measure Pauli k; a resample
  // table (basis, depth -> instance indices) reuses the cached shots for
  // bootstrap rounds
  auto pooled_series =
      [&](int k, const std::vector<std::vector<std::vector<int>>>* resample,
          std::vector<double>& m, std::vector<double>& se) {
        std::vector<double> pool;
        m.resize(nd);
        se.resize(nd);
        for (size_t di = 0; di < nd; ++di) {
          pool.clear();
          for (size_t b = 0; b < nb; ++b) {
            const auto& obs_list = plan.gens_in_basis[b];
            const auto it = std::find(obs_list.begin(), obs_list.end(), k);
            if (it == obs_list.end()) continue;
            const size_t oi = static_cast<size_t>(it - obs_list.begin());
            const auto& vals = inst_means[b][di][oi];
            if (resample) {
              for (int idx : (*resample)[b][di])
                pool.push_back(vals[static_cast<size_t>(idx)]);
            } else {
              pool.insert(pool.end(), vals.begin(), vals.end());
            }
          }
          m[di] = mean(pool);
          se[di] = stderr_of_mean(pool);
        }
      };

  std::vector<FidelityRecord> records;
  std::vector<double> fhat(static_cast<size_t>(gs.size()), 1.0);
  for (int k = 0; k < gs.size(); ++k) {
    std::vector<double> m, se;
    pooled_series(k, nullptr, m, se);
    const auto fit = fit_fidelity(xs, m, se, cfg.fit_floor);
    FidelityRecord r;
    r.pauli = gs.paulis[static_cast<size_t>(k)].text();
    r.partner = pairs[static_cast<size_t>(k)].partner.text();
    r.symmetrized = !pairs[static_cast<size_t>(k)].fixed_point;
    r.depths = xs;
    r.means = std::move(m);
    r.stderrs = std::move(se);
    r.a = std::min(fit.a, 1.0);
    r.f = fit.f;
    r.residual = fit.residual;
    r.clipped = fit.clipped;
    r.clamped = fit.clamped;
    fhat[static_cast<size_t>(k)] = fit.f;
    records.push_back(std::move(r));
  }

  // bootstrap over circuit instances
  std::vector<std::vector<double>> boot_lambda;
  std::vector<double> boot_gamma;
  for (int round = 0; round < bootstrap; ++round) {
    RngStream rng(seed, static_cast<uint64_t>(round), 0, Stream::kBootstrap);
    std::vector<std::vector<std::vector<int>>> resample(nb);
    for (size_t b = 0; b < nb; ++b) {
      resample[b].resize(nd);
      for (size_t di = 0; di < nd; ++di)
        resample[b][di] = resample_indices(twirls, rng);
    }
    std::vector<double> bf(static_cast<size_t>(gs.size()));
    for (int k = 0; k < gs.size(); ++k) {
      std::vector<double> m, se;
      pooled_series(k, &resample, m, se);
      bf[static_cast<size_t>(k)] = fit_fidelity(xs, m, se, cfg.fit_floor).f;
    }
    auto solved = solve_lambda(bf, gs);
    double s = 0;
    for (double l : solved.lambda) s += l;
    boot_gamma.push_back(std::exp(2.0 * s));
    boot_lambda.push_back(std::move(solved.lambda));
  }

  return detail::assemble(gs, gs_ptr, std::move(records), fhat,
                          std::move(boot_lambda), std::move(boot_gamma));
}

}  // namespace qsn
