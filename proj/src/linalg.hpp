#pragma once

// Tiny dense helpers for the k x k ridge systems solved during ALS sweeps.

#include <cmath>
#include <cstddef>
#include <vector>

namespace dsearch::detail {

inline double dot(const double* a, const double* b, int k) {
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += a[i] * b[i];
  return s;
}

// A += w * v v^T (A row-major k x k, symmetric fill)
inline void add_outer(std::vector<double>& A, const double* v, int k, double w) {
  for (int i = 0; i < k; ++i) {
    const double wi = w * v[i];
    for (int j = 0; j < k; ++j) A[static_cast<std::size_t>(i) * k + j] += wi * v[j];
  }
}

inline void add_scaled(std::vector<double>& x, const double* v, int k, double w) {
  for (int i = 0; i < k; ++i) x[static_cast<std::size_t>(i)] += w * v[i];
}

// Solves A x = b for symmetric positive definite A via Cholesky; A and b are
// clobbered, the solution lands in b. Returns false when a pivot degenerates.
inline bool cholesky_solve(std::vector<double>& A, std::vector<double>& b, int k) {
  auto at = [&](int i, int j) -> double& { return A[static_cast<std::size_t>(i) * k + j]; };
  for (int j = 0; j < k; ++j) {
    double d = at(j, j);
    for (int p = 0; p < j; ++p) d -= at(j, p) * at(j, p);
    if (!(d > 1e-300)) return false;
    const double l = std::sqrt(d);
    at(j, j) = l;
    for (int i = j + 1; i < k; ++i) {
      double s = at(i, j);
      for (int p = 0; p < j; ++p) s -= at(i, p) * at(j, p);
      at(i, j) = s / l;
    }
  }
  // forward substitution L y = b
  for (int i = 0; i < k; ++i) {
    double s = b[static_cast<std::size_t>(i)];
    for (int p = 0; p < i; ++p) s -= at(i, p) * b[static_cast<std::size_t>(p)];
    b[static_cast<std::size_t>(i)] = s / at(i, i);
  }
  // back substitution L^T x = y
  for (int i = k - 1; i >= 0; --i) {
    double s = b[static_cast<std::size_t>(i)];
    for (int p = i + 1; p < k; ++p) s -= at(p, i) * b[static_cast<std::size_t>(p)];
    b[static_cast<std::size_t>(i)] = s / at(i, i);
  }
  return true;
}

}  // namespace dsearch::detail
