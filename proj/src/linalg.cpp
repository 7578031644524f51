#include "finsler/linalg.hpp"

#include <algorithm>

namespace finsler {

Mat mat_mul(const Mat& x, const Mat& y) {
  if (x.cols != y.rows) throw PreconditionError("matrix shape mismatch");
  Mat out(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i) {
    for (int k = 0; k < x.cols; ++k) {
      const double v = x(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < y.cols; ++j) out(i, j) += v * y(k, j);
    }
  }
  return out;
}

Vec mat_vec(const Mat& m, const Vec& v) {
  if (m.cols != static_cast<int>(v.size())) {
    throw PreconditionError("matrix/vector shape mismatch");
  }
  Vec out(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) out[i] += m(i, j) * v[j];
  }
  return out;
}

Mat transpose(const Mat& m) {
  Mat out(m.cols, m.rows);
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
  }
  return out;
}

Vec solve(Mat m, Vec rhs) {
  if (m.rows != m.cols || m.rows != static_cast<int>(rhs.size())) {
    throw PreconditionError("solve expects a square system");
  }
  auto x = solve_system<double>(std::move(m.a), std::move(rhs), m.rows, 1);
  return x;
}

Mat inverse(const Mat& m) {
  if (m.rows != m.cols) throw PreconditionError("inverse expects square");
  Mat id = Mat::identity(m.rows);
  Mat out(m.rows, m.cols);
  out.a = solve_system<double>(m.a, id.a, m.rows, m.rows);
  return out;
}

bool positive_definite(const Mat& m) {
  if (m.rows != m.cols) return false;
  const int n = m.rows;
  Mat l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = m(i, j);
      for (int k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      if (i == j) {
        if (sum <= 0.0) return false;
        l(i, i) = std::sqrt(sum);
      } else {
        l(i, j) = sum / l(j, j);
      }
    }
  }
  return true;
}

double inner(const Mat& g, const Vec& u, const Vec& v) {
  if (g.rows != static_cast<int>(u.size()) ||
      g.cols != static_cast<int>(v.size())) {
    throw PreconditionError("inner product shape mismatch");
  }
  double total = 0.0;
  for (int i = 0; i < g.rows; ++i) {
    for (int j = 0; j < g.cols; ++j) total += u[i] * g(i, j) * v[j];
  }
  return total;
}

}  // namespace finsler
