#pragma once

#include <cmath>
#include <vector>

#include "finsler/error.hpp"
#include "finsler/taylor.hpp"

namespace finsler {

using Vec = std::vector<double>;

// Small dense row-major matrix; the models here have dim 2..4, so nothing
// fancier than Gauss elimination is warranted.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(int i, int j) {
    return a[static_cast<size_t>(i) * cols + j];
  }
  double operator()(int i, int j) const {
    return a[static_cast<size_t>(i) * cols + j];
  }
};

Mat mat_mul(const Mat& x, const Mat& y);
Vec mat_vec(const Mat& m, const Vec& v);
Mat transpose(const Mat& m);

// Gauss elimination with partial pivoting; throws DomainError when singular.
Vec solve(Mat m, Vec rhs);
Mat inverse(const Mat& m);

// Cholesky-based test; true iff the symmetric matrix is positive definite.
bool positive_definite(const Mat& m);

// g-inner product u^T g v.
double inner(const Mat& g, const Vec& u, const Vec& v);

inline double g_norm(const Mat& g, const Vec& u) {
  const double q = inner(g, u, u);
  return q > 0.0 ? std::sqrt(q) : 0.0;
}

inline double pivot_magnitude(double x) { return std::fabs(x); }
inline double pivot_magnitude(const Taylor& x) { return std::fabs(x.value()); }

// Solves A * X = B for X, where A is n x n and B is n x nrhs, both stored
// row-major. Works for double and for truncated Taylor entries.
template <typename T>
std::vector<T> solve_system(std::vector<T> A, std::vector<T> B, int n,
                            int nrhs) {
  auto at = [&](std::vector<T>& m, int i, int j, int stride) -> T& {
    return m[static_cast<size_t>(i) * stride + j];
  };
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = pivot_magnitude(at(A, col, col, n));
    for (int r = col + 1; r < n; ++r) {
      const double mag = pivot_magnitude(at(A, r, col, n));
      if (mag > best) {
        best = mag;
        pivot = r;
      }
    }
    if (best == 0.0) throw DomainError("singular linear system");
    if (pivot != col) {
      for (int j = 0; j < n; ++j) std::swap(at(A, col, j, n), at(A, pivot, j, n));
      for (int j = 0; j < nrhs; ++j) {
        std::swap(at(B, col, j, nrhs), at(B, pivot, j, nrhs));
      }
    }
    const T inv = inverse(at(A, col, col, n));
    for (int j = col; j < n; ++j) at(A, col, j, n) = at(A, col, j, n) * inv;
    for (int j = 0; j < nrhs; ++j) {
      at(B, col, j, nrhs) = at(B, col, j, nrhs) * inv;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const T factor = at(A, r, col, n);
      if (pivot_magnitude(factor) == 0.0) continue;
      for (int j = col; j < n; ++j) {
        at(A, r, j, n) = at(A, r, j, n) - factor * at(A, col, j, n);
      }
      for (int j = 0; j < nrhs; ++j) {
        at(B, r, j, nrhs) = at(B, r, j, nrhs) - factor * at(B, col, j, nrhs);
      }
    }
  }
  return B;
}

}  // namespace finsler
