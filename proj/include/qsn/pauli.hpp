#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qsn {

// n-qubit Pauli operator in the binary symplectic representation: per qubit a
// pair of bits (x, z) with I=(0,0), X=(1,0), Z=(0,1), Y=(1,1), plus one global
// sign in {+1, -1}. The site operator behind (1,1) is the Hermitian Y = i X Z.
// Signs are tracked modulo {+1,-1} only: group products that land on an odd
// power of i (anticommuting factors) drop one factor of i with the fixed
// convention i -> +1, -i -> -1. That convention is consistent (P*Q and Q*P
// still differ by exactly the symplectic sign), and everything conjugated in
// this library is Hermitian, so conjugation results are always phase-exact.
class PauliString {
 public:
  explicit PauliString(int n) : n_(n), x_(words(n), 0), z_(words(n), 0) {
    if (n <= 0) throw std::invalid_argument("PauliString: n must be positive");
  }

  static PauliString identity(int n) { return PauliString(n); }

  // qubit 0 is the leftmost character; optional leading '+' or '-'
  // (the UTF-8 minus sign is accepted too)
  static PauliString from_text(std::string_view s) {
    bool neg = false;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
      neg = s.front() == '-';
      s.remove_prefix(1);
    } else if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xE2 &&
               static_cast<unsigned char>(s[1]) == 0x88 &&
               static_cast<unsigned char>(s[2]) == 0x92) {
      neg = true;
      s.remove_prefix(3);
    }
    if (s.empty()) throw std::invalid_argument("PauliString: empty text");
    PauliString p(static_cast<int>(s.size()));
    p.neg_ = neg;
    for (size_t q = 0; q < s.size(); ++q) {
      switch (s[q]) {
        case 'I':
          break;
        case 'X':
          p.set_x(static_cast<int>(q), true);
          break;
        case 'Z':
          p.set_z(static_cast<int>(q), true);
          break;
        case 'Y':
          p.set_x(static_cast<int>(q), true);
          p.set_z(static_cast<int>(q), true);
          break;
        default:
          throw std::invalid_argument("PauliString: invalid letter in text");
      }
    }
    return p;
  }

  std::string text() const {
    std::string s;
    s.reserve(static_cast<size_t>(n_) + 1);
    if (neg_) s.push_back('-');
    for (int q = 0; q < n_; ++q) s.push_back(letter(q));
    return s;
  }

  int n() const { return n_; }
  bool negative() const { return neg_; }
  void set_negative(bool v) { neg_ = v; }

  bool x_bit(int q) const { return (x_[q >> 6] >> (q & 63)) & 1; }
  bool z_bit(int q) const { return (z_[q >> 6] >> (q & 63)) & 1; }

  void set_x(int q, bool v) { set_bit(x_, q, v); }
  void set_z(int q, bool v) { set_bit(z_, q, v); }

  char letter(int q) const {
    const bool x = x_bit(q), z = z_bit(q);
    return x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I');
  }

  void set_letter(int q, char c) {
    switch (c) {
      case 'I': set_x(q, false); set_z(q, false); break;
      case 'X': set_x(q, true); set_z(q, false); break;
      case 'Z': set_x(q, false); set_z(q, true); break;
      case 'Y': set_x(q, true); set_z(q, true); break;
      default: throw std::invalid_argument("PauliString: invalid letter");
    }
  }

  int weight() const {
    int w = 0;
    for (size_t i = 0; i < x_.size(); ++i)
      w += std::popcount(x_[i] | z_[i]);
    return w;
  }

  bool is_identity_bits() const {
    for (size_t i = 0; i < x_.size(); ++i)
      if (x_[i] | z_[i]) return false;
    return true;
  }

  // true when the operator is a product of Z's and I's only
  bool is_z_type() const {
    for (uint64_t w : x_)
      if (w) return false;
    return true;
  }

  bool bits_equal(const PauliString& o) const {
    return n_ == o.n_ && x_ == o.x_ && z_ == o.z_;
  }

  bool operator==(const PauliString& o) const {
    return bits_equal(o) && neg_ == o.neg_;
  }
  bool operator!=(const PauliString& o) const { return !(*this == o); }

  std::span<const uint64_t> x_words() const { return x_; }
  std::span<const uint64_t> z_words() const { return z_; }

  // multiplies `rhs` in from the right, XORing bits and folding sign bits;
  // returns the i-exponent (mod 4) of the site-wise word product so callers
  // that need phase-exact chains can accumulate it
  int mul_from_right(const PauliString& rhs) {
    check_same_n(rhs);
    int64_t g = 0;
    for (size_t i = 0; i < x_.size(); ++i) {
      const uint64_t x1 = x_[i], z1 = z_[i];
      const uint64_t x2 = rhs.x_[i], z2 = rhs.z_[i];
      const uint64_t x3 = x1 ^ x2, z3 = z1 ^ z2;
      g += std::popcount(x1 & z1) + std::popcount(x2 & z2) -
           std::popcount(x3 & z3) + 2 * std::popcount(z1 & x2);
      x_[i] = x3;
      z_[i] = z3;
    }
    neg_ ^= rhs.neg_;
    return static_cast<int>(((g % 4) + 4) % 4);
  }

 private:
  static size_t words(int n) { return static_cast<size_t>(n + 63) >> 6; }

  static void set_bit(std::vector<uint64_t>& v, int q, bool on) {
    if (on)
      v[q >> 6] |= uint64_t{1} << (q & 63);
    else
      v[q >> 6] &= ~(uint64_t{1} << (q & 63));
  }

  void check_same_n(const PauliString& o) const {
    if (n_ != o.n_)
      throw std::invalid_argument("PauliString: mismatched qubit counts");
  }

  friend int symplectic_product(const PauliString&, const PauliString&);

  int n_;
  bool neg_ = false;
  std::vector<uint64_t> x_, z_;
};

// 0 when P and Q commute, 1 when they anticommute
inline int symplectic_product(const PauliString& p, const PauliString& q) {
  p.check_same_n(q);
  uint64_t acc = 0;
  for (size_t i = 0; i < p.x_.size(); ++i)
    acc ^= static_cast<uint64_t>(std::popcount(p.x_[i] & q.z_[i]) ^
                                 std::popcount(p.z_[i] & q.x_[i]));
  return static_cast<int>(acc & 1);
}

inline bool commutes(const PauliString& p, const PauliString& q) {
  return symplectic_product(p, q) == 0;
}

// group product with the documented sign convention (one i dropped when the
// operands anticommute): i^g -> +1 for g in {0,1}, -1 for g in {2,3}
inline PauliString multiply(const PauliString& p, const PauliString& q) {
  PauliString r = p;
  const int g = r.mul_from_right(q);
  if (g >= 2) r.set_negative(!r.negative());
  return r;
}

// Clifford layer given by its conjugation tableau: the images L X_q L^dag and
// L Z_q L^dag for every qubit. Covers CZ layers, Hadamard layers and
// single-qubit basis changes; inverse() handles the non-self-inverse ones.
class CliffordLayer {
 public:
  static CliffordLayer identity(int n) {
    CliffordLayer l(n);
    for (int q = 0; q < n; ++q) {
      l.img_x_[q].set_x(q, true);
      l.img_z_[q].set_z(q, true);
    }
    return l;
  }

  // one CZ per edge; edges must be pairwise disjoint
  static CliffordLayer cz_layer(int n,
                                std::span<const std::pair<int, int>> edges) {
    CliffordLayer l = identity(n);
    std::vector<char> used(static_cast<size_t>(n), 0);
    for (auto [a, b] : edges) {
      if (a < 0 || b < 0 || a >= n || b >= n || a == b)
        throw std::invalid_argument("cz_layer: edge out of range");
      if (used[a] || used[b])
        throw std::invalid_argument("cz_layer: edges must be disjoint");
      used[a] = used[b] = 1;
      // CZ: X_a -> X_a Z_b, X_b -> Z_a X_b, Z's unchanged
      l.img_x_[a].set_z(b, true);
      l.img_x_[b].set_z(a, true);
    }
    return l;
  }

  static CliffordLayer hadamard_layer(int n) {
    CliffordLayer l(n);
    for (int q = 0; q < n; ++q) {
      l.img_x_[q].set_z(q, true);
      l.img_z_[q].set_x(q, true);
    }
    return l;
  }

  // single-qubit layer V with V b_q V^dag = Z_q for each basis letter b_q;
  // measuring Z after V is measuring b before it. Per letter:
  //   Z: identity, X: Hadamard, Y: the cycle X->Y->Z->X.
  static CliffordLayer basis_change_to_z(std::string_view letters) {
    CliffordLayer l(static_cast<int>(letters.size()));
    for (int q = 0; q < l.n_; ++q) {
      switch (letters[q]) {
        case 'Z':
          l.img_x_[q].set_x(q, true);
          l.img_z_[q].set_z(q, true);
          break;
        case 'X':
          l.img_x_[q].set_z(q, true);
          l.img_z_[q].set_x(q, true);
          break;
        case 'Y':
          l.img_x_[q].set_x(q, true);  // X -> Y
          l.img_x_[q].set_z(q, true);
          l.img_z_[q].set_x(q, true);  // Z -> X
          break;
        default:
          throw std::invalid_argument("basis_change_to_z: letter not in XYZ");
      }
    }
    return l;
  }

  static CliffordLayer from_images(std::vector<PauliString> img_x,
                                   std::vector<PauliString> img_z) {
    if (img_x.empty() || img_x.size() != img_z.size())
      throw std::invalid_argument("from_images: bad image count");
    CliffordLayer l(static_cast<int>(img_x.size()));
    l.img_x_ = std::move(img_x);
    l.img_z_ = std::move(img_z);
    if (!l.valid_tableau())
      throw std::invalid_argument("from_images: images break commutation");
    return l;
  }

  int n() const { return n_; }
  const PauliString& image_of_x(int q) const { return img_x_[q]; }
  const PauliString& image_of_z(int q) const { return img_z_[q]; }

  // commutation structure of the images must match that of X_q, Z_q
  bool valid_tableau() const {
    for (int q = 0; q < n_; ++q) {
      if (symplectic_product(img_x_[q], img_z_[q]) != 1) return false;
      for (int p = q + 1; p < n_; ++p) {
        if (symplectic_product(img_x_[q], img_x_[p]) != 0) return false;
        if (symplectic_product(img_z_[q], img_z_[p]) != 0) return false;
        if (symplectic_product(img_x_[q], img_z_[p]) != 0) return false;
        if (symplectic_product(img_z_[q], img_x_[p]) != 0) return false;
      }
    }
    return true;
  }

  CliffordLayer inverse() const;

  // symplectic bit action only (signs dropped); in/out may not alias
  void apply_to_bits(std::span<const uint64_t> x, std::span<const uint64_t> z,
                     std::span<uint64_t> ox, std::span<uint64_t> oz) const {
    for (auto& w : ox) w = 0;
    for (auto& w : oz) w = 0;
    for (int q = 0; q < n_; ++q) {
      const size_t wi = static_cast<size_t>(q) >> 6;
      const uint64_t bit = uint64_t{1} << (q & 63);
      if (x[wi] & bit) xor_words(img_x_[q], ox, oz);
      if (z[wi] & bit) xor_words(img_z_[q], ox, oz);
    }
  }

 private:
  explicit CliffordLayer(int n)
      : n_(n),
        img_x_(static_cast<size_t>(n), PauliString(n)),
        img_z_(static_cast<size_t>(n), PauliString(n)) {
    if (n <= 0) throw std::invalid_argument("CliffordLayer: n must be positive");
  }

  static void xor_words(const PauliString& p, std::span<uint64_t> ox,
                        std::span<uint64_t> oz) {
    auto px = p.x_words(), pz = p.z_words();
    for (size_t i = 0; i < px.size(); ++i) {
      ox[i] ^= px[i];
      oz[i] ^= pz[i];
    }
  }

  int n_;
  std::vector<PauliString> img_x_, img_z_;
};

// L P L^dag, phase-exact. P is decomposed into its site factors; Y sites
// contribute i * (image of X) * (image of Z). The accumulated i-exponent is
// always even because Clifford conjugation preserves Hermiticity.
inline PauliString conjugate(const CliffordLayer& l, const PauliString& p) {
  if (l.n() != p.n())
    throw std::invalid_argument("conjugate: mismatched qubit counts");
  PauliString out = PauliString::identity(p.n());
  int64_t g = 0;
  for (int q = 0; q < p.n(); ++q) {
    const bool x = p.x_bit(q), z = p.z_bit(q);
    if (x && z) g += 1;
    if (x) g += out.mul_from_right(l.image_of_x(q));
    if (z) g += out.mul_from_right(l.image_of_z(q));
  }
  g = ((g % 4) + 4) % 4;
  if (g & 1)
    throw std::logic_error("conjugate: non-Hermitian result (invalid tableau)");
  out.set_negative(out.negative() ^ p.negative() ^ (g == 2));
  return out;
}

inline CliffordLayer CliffordLayer::inverse() const {
  // The bit action is linear over GF(2): v_out = A v_in on stacked (x, z)
  // vectors of length 2n. Invert A by Gauss-Jordan, then fix each preimage
  // sign with one forward conjugation.
  const int m = 2 * n_;
  const size_t wpr = static_cast<size_t>(m + 63) >> 6;
  std::vector<std::vector<uint64_t>> rows(static_cast<size_t>(m)),
      inv(static_cast<size_t>(m));
  auto get = [&](std::vector<uint64_t>& r, int j) -> bool {
    return (r[j >> 6] >> (j & 63)) & 1;
  };
  auto flip = [&](std::vector<uint64_t>& r, int j) {
    r[j >> 6] ^= uint64_t{1} << (j & 63);
  };
  // rows of A: row i = coordinate i of all images; column j = image of basis
  // element j (X_j for j < n, Z_{j-n} otherwise)
  for (int i = 0; i < m; ++i) {
    rows[i].assign(wpr, 0);
    inv[i].assign(wpr, 0);
    flip(inv[i], i);
    for (int j = 0; j < m; ++j) {
      const PauliString& img = j < n_ ? img_x_[j] : img_z_[j - n_];
      const bool bit = i < n_ ? img.x_bit(i) : img.z_bit(i - n_);
      if (bit) flip(rows[i], j);
    }
  }
  for (int col = 0; col < m; ++col) {
    int pivot = -1;
    for (int r = col; r < m; ++r)
      if (get(rows[r], col)) {
        pivot = r;
        break;
      }
    if (pivot < 0)
      throw std::logic_error("CliffordLayer::inverse: singular tableau");
    std::swap(rows[col], rows[pivot]);
    std::swap(inv[col], inv[pivot]);
    for (int r = 0; r < m; ++r) {
      if (r != col && get(rows[r], col)) {
        for (size_t w = 0; w < wpr; ++w) {
          rows[r][w] ^= rows[col][w];
          inv[r][w] ^= inv[col][w];
        }
      }
    }
  }
  // column j of A^-1 is the preimage of basis element j
  std::vector<PauliString> ix(static_cast<size_t>(n_), PauliString(n_));
  std::vector<PauliString> iz(static_cast<size_t>(n_), PauliString(n_));
  for (int j = 0; j < m; ++j) {
    PauliString pre(n_);
    for (int i = 0; i < m; ++i) {
      if (get(inv[i], j)) {
        if (i < n_)
          pre.set_x(i, true);
        else
          pre.set_z(i - n_, true);
      }
    }
    // forward map of the unsigned preimage is +-(basis element); flip the
    // preimage sign so the forward map lands exactly on +basis
    pre.set_negative(conjugate(*this, pre).negative());
    if (j < n_)
      ix[j] = std::move(pre);
    else
      iz[j - n_] = std::move(pre);
  }
  return from_images(std::move(ix), std::move(iz));
}

}  // namespace qsn
