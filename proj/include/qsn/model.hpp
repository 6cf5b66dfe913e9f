#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsn/pauli.hpp"
#include "qsn/rng.hpp"

namespace qsn {

// Generator set for a sparse Pauli-Lindblad model on a qubit topology:
// all weight-1 Paulis plus all weight-2 Paulis supported on topology edges.
// Ordering is part of the contract (CSV columns, NNLS columns): weight-1
// first, qubit-major with X<Y<Z, then weight-2, edge-major with the nine
// letter pairs in lexicographic order.
struct GeneratorSet {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<PauliString> paulis;

  static std::shared_ptr<const GeneratorSet> make(
      int n, std::vector<std::pair<int, int>> edges) {
    if (n <= 0) throw std::invalid_argument("GeneratorSet: n must be positive");
    auto gs = std::make_shared<GeneratorSet>();
    gs->n = n;
    gs->edges = std::move(edges);
    static const char letters[3] = {'X', 'Y', 'Z'};
    for (int q = 0; q < n; ++q) {
      for (char c : letters) {
        PauliString p(n);
        p.set_letter(q, c);
        gs->paulis.push_back(std::move(p));
      }
    }
    for (auto [a, b] : gs->edges) {
      if (a < 0 || b < 0 || a >= n || b >= n || a == b)
        throw std::invalid_argument("GeneratorSet: edge out of range");
      for (char ca : letters) {
        for (char cb : letters) {
          PauliString p(n);
          p.set_letter(a, ca);
          p.set_letter(b, cb);
          gs->paulis.push_back(std::move(p));
        }
      }
    }
    return gs;
  }

  // nearest-neighbor path 0-1-...-(n-1)
  static std::shared_ptr<const GeneratorSet> chain(int n) {
    std::vector<std::pair<int, int>> e;
    for (int q = 0; q + 1 < n; ++q) e.emplace_back(q, q + 1);
    return make(n, std::move(e));
  }

  int size() const { return static_cast<int>(paulis.size()); }

  // index by bit pattern, sign ignored; -1 when absent
  int index_of(const PauliString& p) const {
    for (int k = 0; k < size(); ++k)
      if (paulis[k].bits_equal(p)) return k;
    return -1;
  }

  int edge_index(int a, int b) const {
    for (int e = 0; e < static_cast<int>(edges.size()); ++e)
      if ((edges[e].first == a && edges[e].second == b) ||
          (edges[e].first == b && edges[e].second == a))
        return e;
    return -1;
  }
};

// Sparse Pauli-Lindblad channel: Lambda = prod_k exp(lambda_k (P_k . P_k - id)).
// Pauli strings are eigenoperators: Lambda(P) = f(P) P with
// f(P) = exp(-2 sum_{k anticommuting with P} lambda_k).
class LindbladModel {
 public:
  static constexpr double kLambdaMax = 5.0;

  LindbladModel(std::shared_ptr<const GeneratorSet> gs,
                std::vector<double> lambda)
      : gs_(std::move(gs)), lambda_(std::move(lambda)) {
    if (!gs_) throw std::invalid_argument("LindbladModel: null generator set");
    if (static_cast<int>(lambda_.size()) != gs_->size())
      throw std::invalid_argument("LindbladModel: lambda size mismatch");
    for (double l : lambda_) {
      if (!(l >= 0.0))
        throw std::invalid_argument("LindbladModel: lambda must be >= 0");
      if (l > kLambdaMax)
        throw std::invalid_argument("LindbladModel: lambda above clamp 5.0");
    }
    for (int k = 0; k < gs_->size(); ++k) {
      if (lambda_[k] > 0.0) {
        const double prob = 0.5 * (1.0 - std::exp(-2.0 * lambda_[k]));
        active_.push_back({k, prob, RngStream::bernoulli_threshold(prob)});
      }
    }
  }

  static LindbladModel zero(std::shared_ptr<const GeneratorSet> gs) {
    const size_t m = static_cast<size_t>(gs->size());
    return LindbladModel(std::move(gs), std::vector<double>(m, 0.0));
  }

  const GeneratorSet& generators() const { return *gs_; }
  std::shared_ptr<const GeneratorSet> generators_ptr() const { return gs_; }
  const std::vector<double>& lambda() const { return lambda_; }

  double fidelity(const PauliString& p) const {
    double s = 0.0;
    for (const auto& g : active_) {
      if (symplectic_product(p, gs_->paulis[g.k])) s += lambda_[g.k];
    }
    return std::exp(-2.0 * s);
  }

  // total sampling overhead gamma = prod_k (2 w_k - 1)^-1 = exp(2 sum lambda)
  double gamma() const {
    double s = 0.0;
    for (double l : lambda_) s += l;
    return std::exp(2.0 * s);
  }

  // overhead of the three weight-1 generators on qubit q; together with the
  // per-edge scopes these partition the generator set, so the product of all
  // local gammas is gamma()
  double local_gamma_qubit(int q) const {
    if (q < 0 || q >= gs_->n)
      throw std::invalid_argument("local_gamma_qubit: qubit out of range");
    const double s = lambda_[3 * q] + lambda_[3 * q + 1] + lambda_[3 * q + 2];
    return std::exp(2.0 * s);
  }

  // overhead of the nine weight-2 generators supported exactly on the edge
  double local_gamma_edge(int edge_index) const {
    if (edge_index < 0 || edge_index >= static_cast<int>(gs_->edges.size()))
      throw std::invalid_argument("local_gamma_edge: edge out of range");
    double s = 0.0;
    const int base = 3 * gs_->n + 9 * edge_index;
    for (int j = 0; j < 9; ++j) s += lambda_[base + j];
    return std::exp(2.0 * s);
  }

  // w_k = (1 + exp(-2 lambda_k)) / 2, the identity weight of each factor
  std::vector<double> channel_weights() const {
    std::vector<double> w(lambda_.size());
    for (size_t k = 0; k < lambda_.size(); ++k)
      w[k] = 0.5 * (1.0 + std::exp(-2.0 * lambda_[k]));
    return w;
  }

  // one forward sample of the channel: each generator fires independently
  // with probability 1 - w_k; the product of fired generators is returned
  // with a + sign (a channel draw has no sign of its own)
  PauliString sample_error(RngStream& rng) const {
    PauliString e(gs_->n);
    for (const auto& g : active_) {
      if (rng.bernoulli_u32(g.threshold)) e.mul_from_right(gs_->paulis[g.k]);
    }
    e.set_negative(false);
    return e;
  }

  // unpacked variant for the shot loop: XORs fired generators into (x, z)
  // Consumes one 32-bit draw per active generator, the same cadence as
  // sample_error, so both walk a shared stream identically.
  void sample_error_bits(RngStream& rng, std::span<uint64_t> x,
                         std::span<uint64_t> z) const {
    for (const auto& g : active_) {
      if (rng.bernoulli_u32(g.threshold)) {
        auto px = gs_->paulis[g.k].x_words(), pz = gs_->paulis[g.k].z_words();
        for (size_t i = 0; i < px.size(); ++i) {
          x[i] ^= px[i];
          z[i] ^= pz[i];
        }
      }
    }
  }

  // one sample of the quasi-probability inverse: same per-generator firing
  // probability, but every firing flips the estimator sign. The overall
  // normalization gamma() is applied by the estimator, not here.
  std::pair<PauliString, int> sample_inverse(RngStream& rng) const {
    PauliString e(gs_->n);
    int sign = 1;
    for (const auto& g : active_) {
      if (rng.bernoulli_u32(g.threshold)) {
        e.mul_from_right(gs_->paulis[g.k]);
        sign = -sign;
      }
    }
    e.set_negative(false);
    return {std::move(e), sign};
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["n"] = gs_->n;
    j["edges"] = nlohmann::json::array();
    for (auto [a, b] : gs_->edges) j["edges"].push_back({a, b});
    j["generators"] = nlohmann::json::array();
    for (const auto& p : gs_->paulis) j["generators"].push_back(p.text());
    j["lambda"] = lambda_;
    return j;
  }

  static LindbladModel from_json(const nlohmann::json& j) {
    const int n = j.at("n").get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges"))
      edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    auto gs = GeneratorSet::make(n, std::move(edges));
    const auto& names = j.at("generators");
    if (static_cast<int>(names.size()) != gs->size())
      throw std::invalid_argument("model json: generator count mismatch");
    for (int k = 0; k < gs->size(); ++k) {
      if (!PauliString::from_text(names[k].get<std::string>())
               .bits_equal(gs->paulis[k]))
        throw std::invalid_argument("model json: generator order mismatch");
    }
    return LindbladModel(std::move(gs), j.at("lambda").get<std::vector<double>>());
  }

 private:
  std::shared_ptr<const GeneratorSet> gs_;
  std::vector<double> lambda_;
  struct ActiveGen {
    int k;               // generator index
    double prob;         // firing probability 1 - w_k
    uint64_t threshold;  // prob as a 32-bit Bernoulli threshold
  };
  std::vector<ActiveGen> active_;
};

// Pauli-twirled amplitude damping over duration tau:
// lambda_X = lambda_Y = tau / (4 T1) per qubit, everything else zero. This
// reproduces f_Z = exp(-tau/T1) and f_X = f_Y = sqrt(f_Z).
inline LindbladModel model_from_t1(std::span<const double> t1, double tau,
                                   std::shared_ptr<const GeneratorSet> gs) {
  if (static_cast<int>(t1.size()) != gs->n)
    throw std::invalid_argument("model_from_t1: need one T1 per qubit");
  if (!(tau > 0.0)) throw std::invalid_argument("model_from_t1: tau must be > 0");
  std::vector<double> lambda(static_cast<size_t>(gs->size()), 0.0);
  for (int q = 0; q < gs->n; ++q) {
    if (!(t1[q] > 0.0))
      throw std::invalid_argument("model_from_t1: T1 must be > 0");
    const double l = tau / (4.0 * t1[q]);
    lambda[3 * q + 0] = l;  // X
    lambda[3 * q + 1] = l;  // Y
  }
  return LindbladModel(std::move(gs), std::move(lambda));
}

// elementwise rate addition (channel composition of commuting factors)
inline LindbladModel add(const LindbladModel& a, const LindbladModel& b) {
  if (a.generators().size() != b.generators().size() ||
      a.generators().n != b.generators().n)
    throw std::invalid_argument("add: models on different generator sets");
  std::vector<double> lambda(a.lambda());
  for (size_t k = 0; k < lambda.size(); ++k) lambda[k] += b.lambda()[k];
  return LindbladModel(a.generators_ptr(), std::move(lambda));
}

// sampling-cost ratio of mitigating N noisy-identity pairs at overhead
// gamma_w per pair versus gamma_b per pair: (gamma_w^2 / gamma_b^2)^N
inline double relative_cost(double gamma_w, double gamma_b, int pairs) {
  if (!(gamma_w >= 1.0) || !(gamma_b >= 1.0))
    throw std::invalid_argument("relative_cost: gamma must be >= 1");
  if (pairs < 0) throw std::invalid_argument("relative_cost: pairs must be >= 0");
  return std::pow((gamma_w * gamma_w) / (gamma_b * gamma_b), pairs);
}

}  // namespace qsn
