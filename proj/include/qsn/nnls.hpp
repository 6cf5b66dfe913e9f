#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qsn {

// Dense column-major least squares matrix for the non-negative solver.
struct NnlsProblem {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> a;  // rows * cols, column-major
  std::vector<double> b;  // rows

  double& at(size_t r, size_t c) { return a[c * rows + r]; }
  double at(size_t r, size_t c) const { return a[c * rows + r]; }
};

struct NnlsResult {
  std::vector<double> x;
  double residual_norm = 0.0;
  int iterations = 0;
  double max_projected_gradient = 0.0;
};

namespace detail {

// Solve the unconstrained least squares restricted to `passive` columns via
// normal equations and Cholesky. Returns false when the restricted Gram
// matrix is numerically singular.
inline bool solve_passive(const NnlsProblem& p, const std::vector<size_t>& passive,
                          std::vector<double>& z) {
  const size_t k = passive.size();
  std::vector<double> g(k * k, 0.0), rhs(k, 0.0);
  for (size_t i = 0; i < k; ++i) {
    const double* ci = &p.a[passive[i] * p.rows];
    for (size_t j = i; j < k; ++j) {
      const double* cj = &p.a[passive[j] * p.rows];
      double s = 0;
      for (size_t r = 0; r < p.rows; ++r) s += ci[r] * cj[r];
      g[i * k + j] = s;
      g[j * k + i] = s;
    }
    double s = 0;
    for (size_t r = 0; r < p.rows; ++r) s += ci[r] * p.b[r];
    rhs[i] = s;
  }
  // in-place Cholesky g = L L^T
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j <= i; ++j) {
      double s = g[i * k + j];
      for (size_t m = 0; m < j; ++m) s -= g[i * k + m] * g[j * k + m];
      if (i == j) {
        if (s <= 0) return false;
        g[i * k + i] = std::sqrt(s);
      } else {
        g[i * k + j] = s / g[j * k + j];
      }
    }
  }
  // forward then back substitution
  for (size_t i = 0; i < k; ++i) {
    double s = rhs[i];
    for (size_t m = 0; m < i; ++m) s -= g[i * k + m] * rhs[m];
    rhs[i] = s / g[i * k + i];
  }
  for (size_t ii = k; ii-- > 0;) {
    double s = rhs[ii];
    for (size_t m = ii + 1; m < k; ++m) s -= g[m * k + ii] * rhs[m];
    rhs[ii] = s / g[ii * k + ii];
  }
  z = rhs;
  return true;
}

}  // namespace detail

// Lawson-Hanson active-set solver for min ||Ax - b|| subject to x >= 0.
// Terminates when every zero coordinate has projected gradient below `tol`.
// Ties in the entering-variable choice break toward the lowest index so the
// result is deterministic.
inline NnlsResult nnls_solve(const NnlsProblem& p, double tol = 1e-10,
                             int max_iter = 0) {
  if (p.a.size() != p.rows * p.cols || p.b.size() != p.rows)
    throw std::invalid_argument("nnls: inconsistent problem dimensions");
  if (max_iter <= 0) max_iter = 10 * static_cast<int>(p.cols) + 30;

  NnlsResult out;
  out.x.assign(p.cols, 0.0);
  std::vector<bool> in_passive(p.cols, false);
  std::vector<size_t> passive;
  std::vector<double> resid = p.b;  // b - A x, x starts at zero
  std::vector<double> w(p.cols), z;

  for (int iter = 0; iter < max_iter; ++iter) {
    out.iterations = iter;
    // gradient of -0.5||Ax-b||^2, i.e. A^T (b - A x)
    double wmax = -std::numeric_limits<double>::infinity();
    size_t enter = p.cols;
    for (size_t j = 0; j < p.cols; ++j) {
      const double* cj = &p.a[j * p.rows];
      double s = 0;
      for (size_t r = 0; r < p.rows; ++r) s += cj[r] * resid[r];
      w[j] = s;
      if (!in_passive[j] && s > wmax) {
        wmax = s;
        enter = j;
      }
    }
    out.max_projected_gradient = (enter == p.cols) ? 0.0 : wmax;
    if (enter == p.cols || wmax <= tol) break;

    in_passive[enter] = true;
    passive.push_back(enter);

    for (;;) {
      if (!detail::solve_passive(p, passive, z)) {
        // singular restricted system: drop the variable that just entered
        in_passive[passive.back()] = false;
        passive.pop_back();
        break;
      }
      bool all_positive = true;
      for (double v : z)
        if (v <= 0) all_positive = false;
      if (all_positive) {
        for (size_t i = 0; i < passive.size(); ++i) out.x[passive[i]] = z[i];
        break;
      }
      // step toward z until the first passive coordinate hits zero
      double alpha = 1.0;
      for (size_t i = 0; i < passive.size(); ++i) {
        if (z[i] <= 0) {
          const double xi = out.x[passive[i]];
          const double a = xi / (xi - z[i]);
          if (a < alpha) alpha = a;
        }
      }
      for (size_t i = 0; i < passive.size(); ++i) {
        const size_t j = passive[i];
        out.x[j] += alpha * (z[i] - out.x[j]);
      }
      std::vector<size_t> kept;
      for (size_t j : passive) {
        if (out.x[j] <= 1e-14) {
          out.x[j] = 0.0;
          in_passive[j] = false;
        } else {
          kept.push_back(j);
        }
      }
      passive = kept;
      if (passive.empty()) break;
    }

    for (size_t r = 0; r < p.rows; ++r) {
      double s = p.b[r];
      for (size_t j : passive) s -= p.at(r, j) * out.x[j];
      resid[r] = s;
    }
  }

  double rn = 0;
  for (size_t r = 0; r < p.rows; ++r) {
    double s = p.b[r];
    for (size_t j = 0; j < p.cols; ++j) s -= p.at(r, j) * out.x[j];
    rn += s * s;
  }
  out.residual_norm = std::sqrt(rn);
  return out;
}

}  // namespace qsn
