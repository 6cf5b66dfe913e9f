// qsn: experiment driver for the TLS-landscape stabilization and
// error-mitigation toolkit. Subcommands cover the whole pipeline: landscape
// scans, T1 stabilization series, noise-model learning, mitigation of the
// mirror benchmark, long stability studies, and the closed-form theory
// tables. Every command writes CSV data (the source of truth), SVG
// renderings of it, and a manifest that fingerprints the run; `report`
// rebuilds the SVG files from the CSV files alone.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qsn/config.hpp"
#include "qsn/engine.hpp"
#include "qsn/io.hpp"
#include "qsn/learn.hpp"
#include "qsn/model.hpp"
#include "qsn/numeric.hpp"
#include "qsn/pauli.hpp"
#include "qsn/pec.hpp"
#include "qsn/svg.hpp"
#include "qsn/theory.hpp"
#include "qsn/tls.hpp"

namespace {

using namespace qsn;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- plumbing

struct Outputs {
  fs::path dir;
  std::vector<std::string> names;

  void save(const std::string& name, const std::string& content) {
    write_text(dir / name, content);
    names.push_back(name);
  }
};

Outputs open_outputs(const std::string& dir) {
  fs::create_directories(dir);
  return Outputs{fs::path(dir), {}};
}

void seal(Outputs& out, const std::string& command, uint64_t seed,
          uint64_t config_hash) {
  std::sort(out.names.begin(), out.names.end());
  Manifest m;
  m.command = command;
  m.seed = seed;
  m.config_hash = config_hash;
  m.outputs = out.names;
  write_manifest(out.dir, m);
  std::printf("%s: wrote %zu data files to %s\n", command.c_str(),
              out.names.size(), out.dir.string().c_str());
}

std::vector<double> linspace(double lo, double hi, int steps) {
  std::vector<double> out(static_cast<size_t>(steps));
  for (int i = 0; i < steps; ++i)
    out[static_cast<size_t>(i)] = lo + (hi - lo) * i / (steps - 1);
  return out;
}

nlohmann::json quartiles(const std::vector<double>& v) {
  return nlohmann::json{{"min", percentile(v, 0.0)},
                        {"q1", percentile(v, 0.25)},
                        {"median", percentile(v, 0.5)},
                        {"q3", percentile(v, 0.75)},
                        {"max", percentile(v, 1.0)}};
}

// the two-layer chain setup shared by learn, mitigate, and stability
struct ChainSetup {
  std::shared_ptr<const GeneratorSet> gs;
  std::vector<std::pair<int, int>> e1, e2;
  CliffordLayer l1, l2;
  LindbladModel floor1, floor2;
};

ChainSetup make_chain(int n, double floor_lambda) {
  auto gs = GeneratorSet::chain(n);
  std::vector<std::pair<int, int>> e1, e2;
  for (int q = 0; q + 1 < n; q += 2) e1.emplace_back(q, q + 1);
  for (int q = 1; q + 1 < n; q += 2) e2.emplace_back(q, q + 1);
  auto edge_floor = [&](const std::vector<std::pair<int, int>>& edges) {
    std::vector<double> lambda(static_cast<size_t>(gs->size()), 0.0);
    for (const auto& e : edges) {
      const size_t base =
          static_cast<size_t>(3 * n + 9 * gs->edge_index(e.first, e.second));
      for (size_t j = 0; j < 9; ++j) lambda[base + j] = floor_lambda;
    }
    return LindbladModel(gs, std::move(lambda));
  };
  return ChainSetup{gs,
                    e1,
                    e2,
                    CliffordLayer::cz_layer(n, e1),
                    CliffordLayer::cz_layer(n, e2),
                    edge_floor(e1),
                    edge_floor(e2)};
}

std::vector<StrategySpec> pick_strategies(const ExperimentConfig& cfg,
                                          const std::string& requested,
                                          bool all_by_default) {
  if (!requested.empty()) {
    for (const auto& s : cfg.strategies)
      if (s.kind == requested) return {s};
    return {StrategySpec::defaults_for(requested)};
  }
  if (all_by_default) return cfg.strategies;
  return {cfg.strategies.front()};
}

// ------------------------------------------------------------- renderers
// Each renderer consumes a parsed CSV and returns (file name, svg) pairs,
// so the producing command and `report` emit identical plots.

using Rendered = std::vector<std::pair<std::string, std::string>>;

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

Rendered render_landscape(const Csv& scan) {
  const int ct = scan.column("time_hr"), cq = scan.column("qubit"),
            ck = scan.column("k"), cp = scan.column("pe");
  std::set<int> qubits;
  std::vector<double> ks, ts;
  for (size_t r = 0; r < scan.rows.size(); ++r) {
    qubits.insert(static_cast<int>(scan.number(r, cq)));
    ks.push_back(scan.number(r, ck));
    ts.push_back(scan.number(r, ct));
  }
  const auto xs = sorted_unique(ks);
  const auto ys = sorted_unique(ts);
  auto at = [&](const std::vector<double>& grid, double v) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), v - 1e-12);
    return static_cast<size_t>(it - grid.begin());
  };
  Rendered out;
  for (int q : qubits) {
    std::vector<double> v(xs.size() * ys.size(), 0.0);
    for (size_t r = 0; r < scan.rows.size(); ++r) {
      if (static_cast<int>(scan.number(r, cq)) != q) continue;
      v[at(ys, scan.number(r, ct)) * xs.size() + at(xs, scan.number(r, ck))] =
          scan.number(r, cp);
    }
    out.emplace_back("landscape_q" + std::to_string(q) + ".svg",
                     svg::heatmap("survival proxy, qubit " + std::to_string(q),
                                  "k", "time (hr)", xs, ys, v));
  }
  return out;
}

Rendered render_t1(const Csv& series) {
  const int ct = series.column("t_hr"), cs = series.column("strategy"),
            cq = series.column("qubit"), cv = series.column("t1_us");
  std::map<std::string, std::map<int, svg::Series>> by_strategy;
  for (size_t r = 0; r < series.rows.size(); ++r) {
    const std::string strat = series.rows[r][static_cast<size_t>(cs)];
    const int q = static_cast<int>(series.number(r, cq));
    auto& s = by_strategy[strat][q];
    if (s.label.empty()) s.label = "q" + std::to_string(q);
    s.x.push_back(series.number(r, ct));
    s.y.push_back(series.number(r, cv));
  }
  Rendered out;
  for (const auto& [strat, qs] : by_strategy) {
    std::vector<svg::Series> list;
    for (const auto& [q, s] : qs) list.push_back(s);
    out.emplace_back("t1_" + strat + ".svg",
                     svg::line_plot("effective T1, " + strat + " strategy",
                                    "time (hr)", "T1 (us)", list));
  }
  return out;
}

Rendered render_learn_gamma(const Csv& gam) {
  const int ct = gam.column("t_hr");
  std::vector<svg::Series> list;
  for (const char* name : {"gamma_l1", "gamma_l2", "gamma_total"}) {
    svg::Series s;
    s.label = name;
    const int c = gam.column(name);
    for (size_t r = 0; r < gam.rows.size(); ++r) {
      s.x.push_back(gam.number(r, ct));
      s.y.push_back(gam.number(r, c));
    }
    list.push_back(std::move(s));
  }
  return {{"learn_gamma.svg",
           svg::line_plot("sampling overhead over time", "time (hr)", "gamma",
                          list)}};
}

Rendered render_delta_lambda(const Csv& mat) {
  if (mat.header.size() < 2 || mat.rows.empty()) return {};
  const size_t nk = mat.header.size() - 1;
  std::vector<double> ts, v;
  for (size_t r = 0; r < mat.rows.size(); ++r) ts.push_back(mat.number(r, 0));
  std::vector<double> ranks(nk);
  for (size_t k = 0; k < nk; ++k) ranks[k] = static_cast<double>(k);
  v.resize(nk * ts.size());
  for (size_t k = 0; k < nk; ++k)
    for (size_t r = 0; r < mat.rows.size(); ++r)
      v[k * ts.size() + r] = mat.number(r, static_cast<int>(k + 1));
  return {{"learn_delta_lambda.svg",
           svg::heatmap("rate fluctuation around the median", "time (hr)",
                        "generator rank", ts, ranks, v)}};
}

Rendered render_mitigate_weights(const Csv& w) {
  const int cw = w.column("weight");
  std::vector<svg::Series> list;
  for (const char* name : {"raw_mean", "mitigated_mean"}) {
    svg::Series s;
    s.label = name;
    const int c = w.column(name);
    for (size_t r = 0; r < w.rows.size(); ++r) {
      s.x.push_back(w.number(r, cw));
      s.y.push_back(w.number(r, c));
    }
    list.push_back(std::move(s));
  }
  return {{"mitigate_weights.svg",
           svg::line_plot("observable vs weight", "Z-prefix weight",
                          "expectation", list)}};
}

Rendered render_stability(const Csv& series) {
  const int ct = series.column("t_hr"), cs = series.column("strategy");
  Rendered out;
  std::map<std::string, svg::Series> gamma;
  std::map<std::string, std::vector<double>> dmit;
  const int cg = series.column("gamma"), cd = series.column("delta_mit");
  for (size_t r = 0; r < series.rows.size(); ++r) {
    const std::string strat = series.rows[r][static_cast<size_t>(cs)];
    auto& s = gamma[strat];
    if (s.label.empty()) s.label = strat;
    s.x.push_back(series.number(r, ct));
    s.y.push_back(series.number(r, cg));
    dmit[strat].push_back(series.number(r, cd));
  }
  std::vector<svg::Series> glist;
  for (const auto& [k, s] : gamma) glist.push_back(s);
  out.emplace_back("stability_gamma.svg",
                   svg::line_plot("sampling overhead over time", "time (hr)",
                                  "gamma", glist));
  std::vector<std::string> labels;
  std::vector<std::vector<double>> groups;
  for (const auto& [k, g] : dmit) {
    labels.push_back(k);
    groups.push_back(g);
  }
  out.emplace_back("stability_violin.svg",
                   svg::violin_plot("mitigated deviation by strategy",
                                    "delta_mit", labels, groups));
  return out;
}

Rendered render_stability_scatter(const Csv& sc) {
  const int cs = sc.column("strategy"), cp = sc.column("delta_pred"),
            cm = sc.column("delta_mit");
  std::map<std::string, svg::Series> pts;
  for (size_t r = 0; r < sc.rows.size(); ++r) {
    const std::string strat = sc.rows[r][static_cast<size_t>(cs)];
    auto& s = pts[strat];
    if (s.label.empty()) s.label = strat;
    s.x.push_back(sc.number(r, cp));
    s.y.push_back(sc.number(r, cm));
  }
  std::vector<svg::Series> list;
  for (const auto& [k, s] : pts) list.push_back(s);
  return {{"stability_scatter.svg",
           svg::scatter_plot("predicted vs mitigated deviation", "delta_pred",
                             "delta_mit", list, /*with_diagonal=*/true)}};
}

Rendered render_theory_curves(const Csv& c) {
  const int cd = c.column("d");
  std::vector<svg::Series> list;
  for (const char* name : {"markov_curve", "quasi_static_curve"}) {
    svg::Series s;
    s.label = name;
    const int col = c.column(name);
    for (size_t r = 0; r < c.rows.size(); ++r) {
      s.x.push_back(c.number(r, cd));
      s.y.push_back(c.number(r, col));
    }
    list.push_back(std::move(s));
  }
  return {{"theory_curves.svg",
           svg::line_plot("memoryless vs quasi-static decay", "depth",
                          "survival", list)}};
}

Rendered render_theory_deviation(const Csv& c) {
  const int cd = c.column("depth"), cv = c.column("deviation");
  std::map<int, std::vector<double>> by_depth;
  for (size_t r = 0; r < c.rows.size(); ++r)
    by_depth[static_cast<int>(c.number(r, cd))].push_back(c.number(r, cv));
  std::vector<std::string> labels;
  std::vector<std::vector<double>> groups;
  for (const auto& [d, g] : by_depth) {
    labels.push_back("d=" + std::to_string(d));
    groups.push_back(g);
  }
  return {{"theory_deviation.svg",
           svg::violin_plot("mitigated deviation by depth", "deviation",
                            labels, groups)}};
}

Rendered render_theory_bias(const Csv& c) {
  const int cs = c.column("sigma");
  std::vector<svg::Series> list;
  for (const char* name : {"closed_form", "mc_bias"}) {
    svg::Series s;
    s.label = name;
    const int col = c.column(name);
    for (size_t r = 0; r < c.rows.size(); ++r) {
      s.x.push_back(c.number(r, cs));
      s.y.push_back(c.number(r, col));
    }
    list.push_back(std::move(s));
  }
  return {{"theory_bias.svg",
           svg::line_plot("quasi-static mitigation bias", "sigma", "bias",
                          list)}};
}

Rendered render_theory_t1(const Csv& c) {
  const int cd = c.column("delay_us"), cv = c.column("survival");
  svg::Series s;
  s.label = "trial average";
  for (size_t r = 0; r < c.rows.size(); ++r) {
    s.x.push_back(c.number(r, cd));
    s.y.push_back(c.number(r, cv));
  }
  const std::vector<svg::Series> list{s};
  return {{"theory_t1_average.svg",
           svg::line_plot("ensemble-averaged relaxation", "delay (us)",
                          "survival", list)}};
}

const std::vector<std::pair<const char*, Rendered (*)(const Csv&)>>
    kRenderers = {
        {"landscape_scan.csv", render_landscape},
        {"t1_series.csv", render_t1},
        {"gamma_series.csv", render_learn_gamma},
        {"delta_lambda_top20.csv", render_delta_lambda},
        {"mitigate_by_weight.csv", render_mitigate_weights},
        {"stability_series.csv", render_stability},
        {"stability_scatter.csv", render_stability_scatter},
        {"theory_curves.csv", render_theory_curves},
        {"theory_deviation.csv", render_theory_deviation},
        {"theory_bias.csv", render_theory_bias},
        {"theory_t1_average.csv", render_theory_t1},
};

void save_rendered(Outputs& out, const Rendered& files) {
  for (const auto& [name, content] : files) out.save(name, content);
}

// -------------------------------------------------------------- commands

void cmd_init(const std::string& dir, bool force) {
  Outputs out = open_outputs(dir.empty() ? "." : dir);
  if (!force && fs::exists(out.dir / "experiment.jsonc"))
    throw ConfigError("init: " + (out.dir / "experiment.jsonc").string() +
                      " already exists; pass --force to overwrite");
  out.save("experiment.jsonc", ExperimentConfig::annotated_template());
  const ExperimentConfig defaults;
  seal(out, "init", defaults.seed, defaults.fingerprint());
}

void cmd_landscape(const ExperimentConfig& cfg) {
  TlsLandscape land = cfg.landscape.build(cfg.seed);
  const auto grid = linspace(cfg.scan_k_min, cfg.scan_k_max, cfg.scan_steps);
  RngStream drift_rng(cfg.seed, 0, 0, Stream::kDrift);
  CsvTable scan({"time_hr", "qubit", "k", "pe", "t1_us"});
  CsvTable track({"time_hr", "qubit", "k_best", "pe_best", "k_worst",
                  "pe_worst"});
  for (int s = 0; s <= cfg.cycles; ++s) {
    if (s > 0) land.drift(cfg.cadence_hr, drift_rng);
    const double t = land.time_hours();
    for (int q = 0; q < land.num_qubits(); ++q) {
      const auto pts = scan_pe(land, q, grid);
      size_t best = 0, worst = 0;
      for (size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].pe > pts[best].pe) best = i;
        if (pts[i].pe < pts[worst].pe) worst = i;
      }
      for (const auto& pt : pts)
        scan.push_row(t, q, pt.k, pt.pe, 1e6 * land.t1_at(q, pt.k));
      track.push_row(t, q, pts[best].k, pts[best].pe, pts[worst].k,
                     pts[worst].pe);
    }
  }
  Outputs out = open_outputs(cfg.out_dir);
  out.save("landscape_scan.csv", scan.str());
  out.save("landscape_track.csv", track.str());
  save_rendered(out, render_landscape(parse_csv(scan.str())));
  std::printf("landscape: %d qubits, %d time samples, %d k points\n",
              cfg.landscape.qubits, cfg.cycles + 1, cfg.scan_steps);
  seal(out, "landscape", cfg.seed, cfg.fingerprint());
}

void cmd_t1(const ExperimentConfig& cfg, const std::string& requested) {
  const auto specs = pick_strategies(cfg, requested, /*all_by_default=*/true);
  CsvTable series({"cycle", "t_hr", "strategy", "qubit", "k", "t1_us"});
  for (const auto& spec : specs) {
    TlsLandscape land = cfg.landscape.build(cfg.seed);
    ModulationStrategy strat = spec.build();
    RngStream drift_rng(cfg.seed, 0, 0, Stream::kDrift);
    for (int cy = 0; cy < cfg.cycles; ++cy) {
      if (cy > 0) land.drift(cfg.cadence_hr, drift_rng);
      strat.maybe_reoptimize(land);
      for (int q = 0; q < land.num_qubits(); ++q) {
        double k_rep, t1_eff;
        if (spec.kind == "averaged") {
          // decay rates average across the swept shots, so the effective
          // T1 is the harmonic mean over one waveform period
          const int steps = std::max(
              2, static_cast<int>(std::lround(cfg.shot_rate_hz / spec.freq_hz)));
          double rate_sum = 0.0;
          for (int s = 0; s < steps; ++s)
            rate_sum += 1.0 / land.t1_at(q, strat.sample_k(
                                                q, static_cast<uint64_t>(s),
                                                cfg.shot_rate_hz));
          t1_eff = steps / rate_sum;
          k_rep = spec.center;
        } else {
          k_rep = strat.sample_k(q, 0, cfg.shot_rate_hz);
          t1_eff = land.t1_at(q, k_rep);
        }
        series.push_row(cy, land.time_hours(), spec.kind, q, k_rep,
                        1e6 * t1_eff);
      }
    }
  }
  Outputs out = open_outputs(cfg.out_dir);
  out.save("t1_series.csv", series.str());
  save_rendered(out, render_t1(parse_csv(series.str())));
  std::printf("t1: %zu strategies over %d cycles\n", specs.size(), cfg.cycles);
  seal(out, "t1", cfg.seed, cfg.fingerprint());
}

void cmd_learn(const ExperimentConfig& cfg, const std::string& requested) {
  const auto spec = pick_strategies(cfg, requested, false).front();
  TlsLandscape land = cfg.landscape.build(cfg.seed);
  ModulationStrategy strat = spec.build();
  const int n = land.num_qubits();
  const ChainSetup chain = make_chain(n, cfg.floor_lambda);
  const ReadoutModel ro = cfg.readout();
  const double tau = cfg.gate_time_ns * 1e-9;

  CsvTable lam({"cycle", "t_hr", "layer", "index", "generator", "lambda",
                "lambda_stderr"});
  CsvTable gam({"cycle", "t_hr", "gamma_l1", "gamma_l2", "gamma_total"});
  std::vector<std::vector<double>> history;  // per cycle: both layers joined
  std::vector<double> gamma_total;
  std::vector<double> t_hrs;
  nlohmann::json per_cycle = nlohmann::json::array();

  RngStream drift_rng(cfg.seed, 0, 0, Stream::kDrift);
  for (int cy = 0; cy < cfg.cycles; ++cy) {
    const auto u = static_cast<uint64_t>(cy);
    land.drift(0.5 * cfg.cadence_hr, drift_rng);
    strat.maybe_reoptimize(land);
    LandscapeNoiseSource noise1(land, strat, tau, {chain.floor1},
                                cfg.shot_rate_hz);
    LandscapeNoiseSource noise2(land, strat, tau, {chain.floor2},
                                cfg.shot_rate_hz);
    const auto r1 = learn_sampled(chain.l1, chain.gs, noise1, ro,
                                  detail::sub_seed(cfg.seed, u, 1), cfg.learn,
                                  cfg.learn_bootstrap);
    const auto r2 = learn_sampled(chain.l2, chain.gs, noise2, ro,
                                  detail::sub_seed(cfg.seed, u, 2), cfg.learn,
                                  cfg.learn_bootstrap);
    land.drift(0.5 * cfg.cadence_hr, drift_rng);

    const double t = land.time_hours();
    t_hrs.push_back(t);
    std::vector<double> joined;
    for (int layer = 1; layer <= 2; ++layer) {
      const auto& r = layer == 1 ? r1 : r2;
      for (int k = 0; k < chain.gs->size(); ++k) {
        lam.push_row(cy, t, layer, k,
                     chain.gs->paulis[static_cast<size_t>(k)].text(),
                     r.model.lambda()[static_cast<size_t>(k)],
                     r.lambda_stderr[static_cast<size_t>(k)]);
        joined.push_back(r.model.lambda()[static_cast<size_t>(k)]);
      }
    }
    history.push_back(std::move(joined));
    const double g = r1.gamma * r2.gamma;
    gamma_total.push_back(g);
    gam.push_row(cy, t, r1.gamma, r2.gamma, g);
    per_cycle.push_back({{"cycle", cy},
                         {"t_hr", t},
                         {"layer1", r1.report},
                         {"layer2", r2.report}});
  }

  // fluctuation matrix: per generator, rate minus its median over time;
  // keep the 20 most mobile generators
  const size_t total = history.front().size();
  std::vector<std::pair<double, size_t>> fluct(total);
  std::vector<std::vector<double>> dev(total);
  for (size_t k = 0; k < total; ++k) {
    std::vector<double> col(history.size());
    for (size_t t = 0; t < history.size(); ++t) col[t] = history[t][k];
    const double med = percentile(col, 0.5);
    dev[k].resize(col.size());
    double mx = 0;
    for (size_t t = 0; t < col.size(); ++t) {
      dev[k][t] = col[t] - med;
      mx = std::max(mx, std::fabs(dev[k][t]));
    }
    fluct[k] = {-mx, k};
  }
  std::sort(fluct.begin(), fluct.end());
  const size_t keep = std::min<size_t>(20, total);
  std::vector<std::string> header{"t_hr"};
  auto gen_id = [&](size_t k) {
    const int layer = k < static_cast<size_t>(chain.gs->size()) ? 1 : 2;
    const size_t g = k % static_cast<size_t>(chain.gs->size());
    return "L" + std::to_string(layer) + ":" + chain.gs->paulis[g].text();
  };
  for (size_t j = 0; j < keep; ++j) header.push_back(gen_id(fluct[j].second));
  CsvTable top(header);
  for (size_t t = 0; t < history.size(); ++t) {
    std::vector<std::string> row{CsvTable::cell(t_hrs[t])};
    for (size_t j = 0; j < keep; ++j)
      row.push_back(CsvTable::cell(dev[fluct[j].second][t]));
    top.add_row(std::move(row));
  }

  nlohmann::json report{{"strategy", spec.kind},
                        {"cycles", cfg.cycles},
                        {"gamma_summary", quartiles(gamma_total)},
                        {"per_cycle", per_cycle}};
  Outputs out = open_outputs(cfg.out_dir);
  out.save("learn_report.json", report.dump(2) + "\n");
  out.save("lambda_series.csv", lam.str());
  out.save("gamma_series.csv", gam.str());
  out.save("delta_lambda_top20.csv", top.str());
  save_rendered(out, render_learn_gamma(parse_csv(gam.str())));
  save_rendered(out, render_delta_lambda(parse_csv(top.str())));
  std::printf("learn: %d cycles, median overhead %.4f\n", cfg.cycles,
              percentile(gamma_total, 0.5));
  seal(out, "learn", cfg.seed, cfg.fingerprint());
}

void cmd_mitigate(const ExperimentConfig& cfg, const std::string& requested) {
  const auto spec = pick_strategies(cfg, requested, false).front();
  TlsLandscape land = cfg.landscape.build(cfg.seed);
  ModulationStrategy strat = spec.build();
  strat.maybe_reoptimize(land);
  const int n = land.num_qubits();
  const ChainSetup chain = make_chain(n, cfg.floor_lambda);
  const ReadoutModel ro = cfg.readout();
  const double tau = cfg.gate_time_ns * 1e-9;
  const auto benchmark = mirror_circuit(n, cfg.mirror_reps);
  const auto obs =
      PauliString::from_text(std::string(static_cast<size_t>(n), 'Z'));

  LandscapeNoiseSource noise1(land, strat, tau, {chain.floor1},
                              cfg.shot_rate_hz);
  LandscapeNoiseSource noise2(land, strat, tau, {chain.floor2},
                              cfg.shot_rate_hz);
  const auto r1 =
      learn_sampled(chain.l1, chain.gs, noise1, ro,
                    detail::sub_seed(cfg.seed, 0, 1), cfg.learn,
                    cfg.learn_bootstrap);
  const auto r2 =
      learn_sampled(chain.l2, chain.gs, noise2, ro,
                    detail::sub_seed(cfg.seed, 0, 2), cfg.learn,
                    cfg.learn_bootstrap);
  const std::vector<LindbladModel> learned{r1.model, r2.model};

  const auto monitor =
      run_readout_monitor(ro, cfg.monitor_instances, cfg.monitor_shots,
                          detail::sub_seed(cfg.seed, 0, 3));
  LandscapeNoiseSource bench_noise(land, strat, tau,
                                   {chain.floor1, chain.floor2},
                                   cfg.shot_rate_hz);
  const auto mit = mitigate(benchmark, learned, bench_noise, ro, obs,
                            detail::sub_seed(cfg.seed, 0, 4), cfg.pec,
                            &monitor);
  LandscapeNoiseSource raw_noise(land, strat, tau,
                                 {chain.floor1, chain.floor2},
                                 cfg.shot_rate_hz);
  const auto raw = unmitigated(benchmark, raw_noise, ro, obs,
                               detail::sub_seed(cfg.seed, 0, 5), cfg.unmit,
                               &monitor);

  std::vector<double> k_ref(static_cast<size_t>(n));
  for (int q = 0; q < n; ++q)
    k_ref[static_cast<size_t>(q)] = strat.sample_k(q, 0, cfg.shot_rate_hz);
  const std::vector<LindbladModel> floors{chain.floor1, chain.floor2};
  const auto truth = realize_noise(land, k_ref, tau, floors);

  const double f_pred = predict_fidelity(benchmark, learned, obs);
  const double f_exp = exact_expectation(benchmark, truth.slot_models, obs);
  const double analytic =
      mitigate_analytic(benchmark, truth.slot_models, learned, obs);

  nlohmann::json report{
      {"strategy", spec.kind},
      {"mirror_reps", cfg.mirror_reps},
      {"gamma", circuit_gamma(benchmark, learned)},
      {"gamma_learned", {{"layer1", r1.gamma}, {"layer2", r2.gamma}}},
      {"f_pred", f_pred},
      {"f_exp", f_exp},
      {"analytic_mitigated", analytic},
      {"raw", {{"mean", raw.primary.mean}, {"se", raw.primary.se}}},
      {"mitigated",
       {{"mean", mit.primary.mean},
        {"se", mit.primary.se},
        {"bootstrap_p16", percentile(mit.primary.bootstrap, 0.16)},
        {"bootstrap_p50", percentile(mit.primary.bootstrap, 0.50)},
        {"bootstrap_p84", percentile(mit.primary.bootstrap, 0.84)}}},
      {"delta_pred", delta_pred(raw.primary.mean, f_pred)},
      {"delta_mit", mit.primary.mean - 1.0},
      {"monitor_c", monitor.c}};

  CsvTable weights(
      {"weight", "raw_mean", "raw_se", "mitigated_mean", "mitigated_se"});
  for (int w = 1; w <= n; ++w)
    weights.push_row(w, raw.by_weight[static_cast<size_t>(w - 1)].mean,
                     raw.by_weight[static_cast<size_t>(w - 1)].se,
                     mit.by_weight[static_cast<size_t>(w - 1)].mean,
                     mit.by_weight[static_cast<size_t>(w - 1)].se);

  Outputs out = open_outputs(cfg.out_dir);
  out.save("mitigate_report.json", report.dump(2) + "\n");
  out.save("mitigate_by_weight.csv", weights.str());
  save_rendered(out, render_mitigate_weights(parse_csv(weights.str())));
  std::printf("mitigate: raw %.4f +- %.4f, mitigated %.4f +- %.4f\n",
              raw.primary.mean, raw.primary.se, mit.primary.mean,
              mit.primary.se);
  seal(out, "mitigate", cfg.seed, cfg.fingerprint());
}

void cmd_stability(const ExperimentConfig& cfg, const std::string& requested) {
  const auto specs = pick_strategies(cfg, requested, /*all_by_default=*/true);
  CsvTable series({"cycle", "t_hr", "strategy", "lambda_hash", "gamma",
                   "f_pred", "f_exp", "raw", "raw_se", "mitigated",
                   "mitigated_se", "delta_pred", "delta_mit",
                   "cumulative_mean", "cumulative_se"});
  CsvTable scatter({"strategy", "cycle", "delta_pred", "delta_mit"});
  nlohmann::json summary = nlohmann::json::object();
  const ReadoutModel ro = cfg.readout();
  for (const auto& spec : specs) {
    TlsLandscape land = cfg.landscape.build(cfg.seed);
    ModulationStrategy strat = spec.build();
    const auto recs = stability_run(land, strat, ro, cfg.seed, cfg.stability());
    std::vector<double> gammas, dpred, dmit;
    for (const auto& r : recs) {
      series.push_row(r.cycle, r.t_hr, r.strategy, r.lambda_hash, r.gamma,
                      r.f_pred, r.f_exp, r.raw, r.raw_se, r.mitigated,
                      r.mitigated_se, r.delta_pred, r.delta_mit,
                      r.cumulative_mean, r.cumulative_se);
      scatter.push_row(r.strategy, r.cycle, r.delta_pred, r.delta_mit);
      gammas.push_back(r.gamma);
      dpred.push_back(r.delta_pred);
      dmit.push_back(r.delta_mit);
    }
    double abs_sum = 0;
    for (double d : dmit) abs_sum += std::fabs(d);
    summary[spec.kind] = {
        {"cycles", recs.size()},
        {"gamma", quartiles(gammas)},
        {"delta_mit_std", sample_stdev(dmit)},
        {"delta_mit_mean_abs", abs_sum / static_cast<double>(dmit.size())},
        {"delta_pred_std", sample_stdev(dpred)},
        {"pearson_r", pearson(dpred, dmit)},
        {"final_cumulative",
         {{"mean", recs.back().cumulative_mean},
          {"se", recs.back().cumulative_se}}}};
    std::printf("stability[%s]: %zu cycles, delta_mit std %.4f, r %.3f\n",
                spec.kind.c_str(), recs.size(), sample_stdev(dmit),
                pearson(dpred, dmit));
  }
  Outputs out = open_outputs(cfg.out_dir);
  out.save("stability_report.json", summary.dump(2) + "\n");
  out.save("stability_series.csv", series.str());
  out.save("stability_scatter.csv", scatter.str());
  save_rendered(out, render_stability(parse_csv(series.str())));
  save_rendered(out, render_stability_scatter(parse_csv(scatter.str())));
  seal(out, "stability", cfg.seed, cfg.fingerprint());
}

void cmd_theory(const ExperimentConfig& cfg) {
  const auto& th = cfg.theory;
  const double d_eff = effective_depth(th.schedule);
  const double tau = cfg.gate_time_ns * 1e-9;

  nlohmann::json cost = nlohmann::json::array();
  for (int p : th.cost_pairs)
    cost.push_back({{"pairs", p},
                    {"cost", relative_cost(th.cost_gamma_worse,
                                           th.cost_gamma_better, p)}});

  CsvTable bias({"sigma", "depth", "d_eff", "closed_form", "mc_bias",
                 "mc_se"});
  nlohmann::json bias_rows = nlohmann::json::array();
  for (double sigma : th.sigmas) {
    const double closed = quasi_static_bias(sigma, th.depth, d_eff);
    const auto mc = simulate_learn_mitigate(
        GaussianRate{th.mu, sigma}, th.schedule, th.depth, th.samples,
        detail::sub_seed(cfg.seed, 0, 10));
    bias.push_row(sigma, th.depth, d_eff, closed, mc.bias, mc.bias_se);
    bias_rows.push_back({{"sigma", sigma},
                         {"closed_form", closed},
                         {"mc_bias", mc.bias},
                         {"mc_se", mc.bias_se}});
  }

  // trial-averaged relaxation of a fluctuating-T1 ensemble
  const double mean_s = th.t1_mean_us * 1e-6, sd_s = th.t1_sd_us * 1e-6;
  const auto delays = linspace(0.0, 3.0 * mean_s, 31);
  const auto avg = averaged_t1_sim(mean_s, sd_s, delays, th.t1_trials,
                                   detail::sub_seed(cfg.seed, 0, 11));
  CsvTable t1curve({"delay_us", "survival"});
  for (size_t i = 0; i < delays.size(); ++i)
    t1curve.push_row(1e6 * delays[i], avg.curve[i]);

  // memoryless vs quasi-static decay of the same ensemble
  std::vector<double> t1_samples(static_cast<size_t>(th.t1_trials));
  for (int i = 0; i < th.t1_trials; ++i) {
    RngStream rng(detail::sub_seed(cfg.seed, 0, 12),
                  static_cast<uint64_t>(i), 0, Stream::kTheory);
    t1_samples[static_cast<size_t>(i)] =
        sample_truncated_normal(mean_s, sd_s, rng);
  }
  int d_max = 0;
  for (int d : th.schedule) d_max = std::max(d_max, d);
  std::vector<int> dense(static_cast<size_t>(d_max) + 1);
  for (int d = 0; d <= d_max; ++d) dense[static_cast<size_t>(d)] = d;
  const auto sim =
      quasi_static_learning_sim(t1_samples, th.step_us * 1e-6, dense);
  CsvTable curves({"d", "markov_curve", "quasi_static_curve"});
  for (size_t i = 0; i < dense.size(); ++i)
    curves.push_row(dense[i], sim.markov_curve[i], sim.quasi_curve[i]);

  // per-depth mitigated deviation distributions from paired T1 draws
  std::vector<std::vector<double>> t1_per_qubit(
      6, std::vector<double>(static_cast<size_t>(th.mitsim_samples)));
  for (int i = 0; i < th.mitsim_samples; ++i)
    for (int q = 0; q < 6; ++q) {
      RngStream rng(detail::sub_seed(cfg.seed, 0, 13),
                    static_cast<uint64_t>(i), static_cast<uint64_t>(q),
                    Stream::kTheory);
      t1_per_qubit[static_cast<size_t>(q)][static_cast<size_t>(i)] =
          sample_truncated_normal(mean_s, sd_s, rng);
    }
  CsvTable deviation({"depth", "deviation"});
  for (int d : th.schedule) {
    if (d == 0) continue;
    const auto ms = mitsim(t1_per_qubit, th.schedule, tau, d);
    for (double v : ms.deviations) deviation.push_row(d, v);
  }

  nlohmann::json report{
      {"schedule", th.schedule},
      {"d_eff", d_eff},
      {"relative_cost",
       {{"gamma_worse", th.cost_gamma_worse},
        {"gamma_better", th.cost_gamma_better},
        {"table", cost}}},
      {"bias", {{"mu", th.mu}, {"depth", th.depth}, {"rows", bias_rows}}},
      {"averaged_t1",
       {{"mean_us", th.t1_mean_us},
        {"sd_us", th.t1_sd_us},
        {"trials", th.t1_trials},
        {"fitted_t1_us", 1e6 * avg.fitted_t1},
        {"max_t1_us", 1e6 * avg.max_t1}}},
      {"learning_sim",
       {{"f_markov", sim.f_markov},
        {"f_fit", sim.f_fit},
        {"rel_diff", sim.rel_diff}}}};

  Outputs out = open_outputs(cfg.out_dir);
  out.save("theory_report.json", report.dump(2) + "\n");
  out.save("theory_bias.csv", bias.str());
  out.save("theory_curves.csv", curves.str());
  out.save("theory_deviation.csv", deviation.str());
  out.save("theory_t1_average.csv", t1curve.str());
  save_rendered(out, render_theory_bias(parse_csv(bias.str())));
  save_rendered(out, render_theory_curves(parse_csv(curves.str())));
  save_rendered(out, render_theory_deviation(parse_csv(deviation.str())));
  save_rendered(out, render_theory_t1(parse_csv(t1curve.str())));
  std::printf("theory: d_eff %.2f, fitted averaged T1 %.1f us\n", d_eff,
              1e6 * avg.fitted_t1);
  seal(out, "theory", cfg.seed, cfg.fingerprint());
}

void cmd_report(const std::string& dir) {
  if (dir.empty()) throw ConfigError("report: --out directory is required");
  if (!fs::is_directory(dir))
    throw ConfigError("report: " + dir + " is not a directory");
  Outputs out = open_outputs(dir);
  uint64_t hash = 14695981039346656037ull;
  int rendered = 0;
  for (const auto& [csv_name, renderer] : kRenderers) {
    const fs::path csv_path = out.dir / csv_name;
    if (!fs::exists(csv_path)) continue;
    const std::string text = read_text(csv_path);
    hash = fnv1a64(text, hash);
    save_rendered(out, renderer(parse_csv(text)));
    ++rendered;
  }
  if (rendered == 0)
    throw ConfigError("report: no known CSV files in " + dir);
  std::printf("report: rebuilt plots from %d CSV files\n", rendered);
  seal(out, "report", 0, hash);
}

// ------------------------------------------------------------------ main

struct Flags {
  std::string config_path;
  std::string out_dir;
  std::string strategy;
  uint64_t seed = 0;
  int cycles = 0;
  int depth = 0;
  bool force = false;
};

bool passed(const CLI::App* sub, const std::string& name) {
  const CLI::Option* opt =
      const_cast<CLI::App*>(sub)->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

ExperimentConfig effective_config(const CLI::App* sub, const Flags& f) {
  ExperimentConfig cfg;
  if (passed(sub, "--config")) cfg = ExperimentConfig::load(f.config_path);
  if (passed(sub, "--seed")) cfg.seed = f.seed;
  if (passed(sub, "--out")) cfg.out_dir = f.out_dir;
  if (passed(sub, "--cycles")) cfg.cycles = f.cycles;
  cfg.validate();
  return cfg;
}

// learning schedules are capped, benchmark and theory depths replaced
void apply_depth(const CLI::App* sub, const Flags& f, ExperimentConfig& cfg,
                 const char* target) {
  if (!passed(sub, "--depth")) return;
  const std::string what(target);
  if (what == "learning") {
    std::vector<int> kept;
    for (int d : cfg.learn.depths)
      if (d <= f.depth) kept.push_back(d);
    cfg.learn.depths = std::move(kept);
    try {
      cfg.learn.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: --depth leaves no usable "
                                    "schedule: ") +
                        e.what());
    }
  } else if (what == "benchmark") {
    cfg.mirror_reps = f.depth;
  } else {
    cfg.theory.depth = f.depth;
  }
  cfg.validate();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qsn: synthetic TLS landscapes, sparse noise-model learning, "
      "probabilistic error cancellation, and quasi-static noise theory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qsn::kLibraryVersion);
  Flags f;

  auto add_common = [&](CLI::App* sub, bool strategy, bool cycles,
                        const char* depth_help) {
    sub->add_option("--config", f.config_path,
                    "configuration file (JSON, comments allowed)");
    sub->add_option("--seed", f.seed, "override the master seed");
    sub->add_option("--out", f.out_dir, "override the output directory");
    if (strategy)
      sub->add_option("--strategy", f.strategy, "strategy kind to run")
          ->check(CLI::IsMember({"control", "optimized", "averaged"}));
    if (cycles)
      sub->add_option("--cycles", f.cycles, "override the cycle count");
    if (depth_help) sub->add_option("--depth", f.depth, depth_help);
  };

  auto* init = app.add_subcommand(
      "init", "write a commented default configuration file");
  init->add_option("--out", f.out_dir, "directory for experiment.jsonc");
  init->add_flag("--force", f.force, "overwrite an existing file");
  init->callback([&] { cmd_init(f.out_dir, f.force); });

  auto* landscape = app.add_subcommand(
      "landscape", "scan the synthetic T1 landscape over control and time");
  add_common(landscape, false, true, nullptr);
  landscape->callback([&] { cmd_landscape(effective_config(landscape, f)); });

  auto* t1 = app.add_subcommand(
      "t1", "effective-T1 time series per stabilization strategy");
  add_common(t1, true, true, nullptr);
  t1->callback([&] { cmd_t1(effective_config(t1, f), f.strategy); });

  auto* learn = app.add_subcommand(
      "learn", "repeated noise-model learning with rate and overhead series");
  add_common(learn, true, true, "cap the learning depth schedule");
  learn->callback([&] {
    ExperimentConfig cfg = effective_config(learn, f);
    apply_depth(learn, f, cfg, "learning");
    cmd_learn(cfg, f.strategy);
  });

  auto* mitigate = app.add_subcommand(
      "mitigate", "learn models and cancel noise on the mirror benchmark");
  add_common(mitigate, true, false, "mirror benchmark layer-pair count");
  mitigate->callback([&] {
    ExperimentConfig cfg = effective_config(mitigate, f);
    apply_depth(mitigate, f, cfg, "benchmark");
    cmd_mitigate(cfg, f.strategy);
  });

  auto* stability = app.add_subcommand(
      "stability", "cycled learn-and-mitigate study across strategies");
  add_common(stability, true, true, "mirror benchmark layer-pair count");
  stability->callback([&] {
    ExperimentConfig cfg = effective_config(stability, f);
    apply_depth(stability, f, cfg, "benchmark");
    cmd_stability(cfg, f.strategy);
  });

  auto* theory = app.add_subcommand(
      "theory", "closed-form tables against Monte Carlo checks");
  add_common(theory, false, false, "mitigation depth for the bias table");
  theory->callback([&] {
    ExperimentConfig cfg = effective_config(theory, f);
    apply_depth(theory, f, cfg, "theory");
    cmd_theory(cfg);
  });

  auto* report = app.add_subcommand(
      "report", "rebuild the SVG plots from the CSV files in a directory");
  report->add_option("--out", f.out_dir, "directory holding the CSV files");
  report->callback([&] { cmd_report(f.out_dir); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const qsn::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
