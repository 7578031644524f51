#include "finsler/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace finsler {

namespace {

std::vector<int> idx1(int n, int k) {
  std::vector<int> idx(n, 0);
  idx[k] += 1;
  return idx;
}

std::vector<int> idx2(int n, int k, int l) {
  std::vector<int> idx(n, 0);
  idx[k] += 1;
  idx[l] += 1;
  return idx;
}

}  // namespace

// ---------------------------------------------------------------------------
// VectorFieldExpr

VectorFieldExpr VectorFieldExpr::zero(const CoordsPtr& coords) {
  VectorFieldExpr f;
  for (size_t i = 0; i < coords->size(); ++i) {
    f.components.push_back(ScalarExpr::number(0.0, coords));
  }
  return f;
}

VectorFieldExpr VectorFieldExpr::constant(const CoordsPtr& coords,
                                          std::span<const double> values) {
  if (values.size() != coords->size()) {
    throw PreconditionError("component count does not match dimension");
  }
  VectorFieldExpr f;
  for (const double v : values) {
    f.components.push_back(ScalarExpr::number(v, coords));
  }
  return f;
}

VectorFieldExpr VectorFieldExpr::axis(const CoordsPtr& coords, int index) {
  VectorFieldExpr f;
  for (size_t i = 0; i < coords->size(); ++i) {
    f.components.push_back(
        ScalarExpr::number(static_cast<int>(i) == index ? 1.0 : 0.0, coords));
  }
  return f;
}

Vec VectorFieldExpr::operator()(std::span<const double> x) const {
  Vec out(components.size());
  for (size_t i = 0; i < components.size(); ++i) out[i] = components[i](x);
  return out;
}

// ---------------------------------------------------------------------------
// GeometryModel

bool GeometryModel::in_domain(std::span<const double> x, double margin) const {
  for (const auto& constraint : domain) {
    if (!(constraint(x) > margin)) return false;
  }
  return true;
}

GeometryModel GeometryModel::from_metric(
    std::string name, std::vector<std::string> coord_names,
    const std::vector<std::string>& entries) {
  GeometryModel m;
  m.name = std::move(name);
  m.coords = make_coords(std::move(coord_names));
  const int n = m.dim();
  if (static_cast<int>(entries.size()) != n * n) {
    throw PreconditionError("metric needs dim*dim entries");
  }
  for (const auto& text : entries) {
    m.metric.push_back(ScalarExpr::parse(text, m.coords));
  }
  m.box.assign(n, {-1.25, 1.25});
  return m;
}

GeometryModel GeometryModel::euclidean(int n) {
  if (n < 2 || n > 4) throw PreconditionError("dimension must be 2..4");
  GeometryModel m;
  m.name = "euclidean" + std::to_string(n);
  std::vector<std::string> names;
  const char* base[] = {"x", "y", "z", "w"};
  for (int i = 0; i < n; ++i) names.emplace_back(base[i]);
  m.coords = make_coords(std::move(names));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      m.metric.push_back(ScalarExpr::number(i == j ? 1.0 : 0.0, m.coords));
    }
  }
  m.box.assign(n, {-1.25, 1.25});
  return m;
}

// ---------------------------------------------------------------------------
// Expression-level small-matrix algebra

namespace {

ScalarExpr minor_det(const std::vector<ScalarExpr>& m, int n,
                     std::vector<int> rows, std::vector<int> cols) {
  const int k = static_cast<int>(rows.size());
  if (k == 1) return m[static_cast<size_t>(rows[0]) * n + cols[0]];
  ScalarExpr acc = ScalarExpr::number(0.0, m[0].coords_ptr());
  for (int c = 0; c < k; ++c) {
    std::vector<int> sub_rows(rows.begin() + 1, rows.end());
    std::vector<int> sub_cols;
    for (int j = 0; j < k; ++j) {
      if (j != c) sub_cols.push_back(cols[j]);
    }
    ScalarExpr term = m[static_cast<size_t>(rows[0]) * n + cols[c]] *
                      minor_det(m, n, sub_rows, sub_cols);
    acc = (c % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

}  // namespace

ScalarExpr expr_det(const std::vector<ScalarExpr>& m, int n) {
  if (n < 1 || n > 4 || static_cast<int>(m.size()) != n * n) {
    throw PreconditionError("expression determinant supports 1x1..4x4");
  }
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  return minor_det(m, n, all, all);
}

std::vector<ScalarExpr> expr_inverse(const std::vector<ScalarExpr>& m, int n) {
  if (n < 1 || n > 4 || static_cast<int>(m.size()) != n * n) {
    throw PreconditionError("expression inverse supports 1x1..4x4");
  }
  const ScalarExpr det = expr_det(m, n);
  std::vector<ScalarExpr> out;
  out.reserve(static_cast<size_t>(n) * n);
  if (n == 1) {
    out.push_back(ScalarExpr::number(1.0, m[0].coords_ptr()) / det);
    return out;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // adj(M)_ij = (-1)^{i+j} * minor with row j and column i removed.
      std::vector<int> rows;
      std::vector<int> cols;
      for (int r = 0; r < n; ++r) {
        if (r != j) rows.push_back(r);
      }
      for (int c = 0; c < n; ++c) {
        if (c != i) cols.push_back(c);
      }
      ScalarExpr cof = minor_det(m, n, rows, cols);
      if ((i + j) % 2 == 1) cof = -cof;
      out.push_back(cof / det);
    }
  }
  return out;
}

std::vector<ScalarExpr> metric_from_orthonormal_frame(
    const std::vector<VectorFieldExpr>& frame) {
  const int n = static_cast<int>(frame.size());
  if (n < 1 || n > 4) {
    throw PreconditionError("frame-derived metrics support dim 1..4");
  }
  const CoordsPtr coords = frame[0].components[0].coords_ptr();
  std::vector<ScalarExpr> gram;
  gram.reserve(static_cast<size_t>(n) * n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      ScalarExpr acc = ScalarExpr::number(0.0, coords);
      for (int i = 0; i < n; ++i) {
        acc = acc + frame[i].components[k] * frame[i].components[l];
      }
      gram.push_back(std::move(acc));
    }
  }
  return expr_inverse(gram, n);
}

// ---------------------------------------------------------------------------
// Metric evaluation

double MetricJets::g(int i, int j) const {
  return entries[static_cast<size_t>(i) * n + j].value();
}

double MetricJets::dg(int i, int j, int k) const {
  return entries[static_cast<size_t>(i) * n + j].partial(idx1(n, k));
}

double MetricJets::d2g(int i, int j, int k, int l) const {
  return entries[static_cast<size_t>(i) * n + j].partial(idx2(n, k, l));
}

Mat MetricJets::values() const {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = g(i, j);
  }
  return m;
}

MetricJets metric_jets(const GeometryModel& model, std::span<const double> x,
                       int order) {
  MetricJets out;
  out.n = model.dim();
  out.entries.reserve(static_cast<size_t>(out.n) * out.n);
  for (int i = 0; i < out.n; ++i) {
    for (int j = 0; j < out.n; ++j) {
      out.entries.push_back(model.metric_entry(i, j).jet(x, order));
    }
  }
  return out;
}

Mat metric_at(const GeometryModel& model, std::span<const double> x) {
  const int n = model.dim();
  Mat g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = model.metric_entry(i, j)(x);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::fabs(g(i, j) - g(j, i)) > 1e-10 * (1.0 + std::fabs(g(i, j)))) {
        throw DomainError("metric is not symmetric at the evaluation point");
      }
    }
  }
  if (!positive_definite(g)) {
    throw DomainError("metric is not positive definite at the point");
  }
  return g;
}

Mat metric_inverse_at(const GeometryModel& model, std::span<const double> x) {
  return inverse(metric_at(model, x));
}

// ---------------------------------------------------------------------------
// Connection and curvature

std::vector<double> christoffel(const GeometryModel& model,
                                std::span<const double> x) {
  const int n = model.dim();
  const MetricJets mj = metric_jets(model, x, 1);
  const Mat ginv = inverse(mj.values());
  std::vector<double> gamma(static_cast<size_t>(n) * n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        double sum = 0.0;
        for (int l = 0; l < n; ++l) {
          sum += ginv(i, l) *
                 (mj.dg(l, k, j) + mj.dg(j, l, k) - mj.dg(j, k, l));
        }
        sum *= 0.5;
        gamma[(static_cast<size_t>(i) * n + j) * n + k] = sum;
        gamma[(static_cast<size_t>(i) * n + k) * n + j] = sum;
      }
    }
  }
  return gamma;
}

void christoffel_with_derivatives(const GeometryModel& model,
                                  std::span<const double> x,
                                  std::vector<double>& gamma,
                                  std::vector<double>& dgamma) {
  const int n = model.dim();
  const MetricJets mj = metric_jets(model, x, 2);
  const Mat g = mj.values();
  const Mat ginv = inverse(g);

  gamma.assign(static_cast<size_t>(n) * n * n, 0.0);
  dgamma.assign(static_cast<size_t>(n) * n * n * n, 0.0);

  // d_m g^{il} = -g^{ia} (d_m g_ab) g^{bl}
  std::vector<double> dginv(static_cast<size_t>(n) * n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < n; ++l) {
      for (int m = 0; m < n; ++m) {
        double sum = 0.0;
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) {
            sum -= ginv(i, a) * mj.dg(a, b, m) * ginv(b, l);
          }
        }
        dginv[(static_cast<size_t>(i) * n + l) * n + m] = sum;
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        double value = 0.0;
        for (int l = 0; l < n; ++l) {
          value += ginv(i, l) *
                   (mj.dg(l, k, j) + mj.dg(j, l, k) - mj.dg(j, k, l));
        }
        value *= 0.5;
        gamma[(static_cast<size_t>(i) * n + j) * n + k] = value;
        gamma[(static_cast<size_t>(i) * n + k) * n + j] = value;
        for (int m = 0; m < n; ++m) {
          double d = 0.0;
          for (int l = 0; l < n; ++l) {
            d += dginv[(static_cast<size_t>(i) * n + l) * n + m] *
                 (mj.dg(l, k, j) + mj.dg(j, l, k) - mj.dg(j, k, l));
            d += ginv(i, l) *
                 (mj.d2g(l, k, j, m) + mj.d2g(j, l, k, m) -
                  mj.d2g(j, k, l, m));
          }
          d *= 0.5;
          dgamma[((static_cast<size_t>(i) * n + j) * n + k) * n + m] = d;
          dgamma[((static_cast<size_t>(i) * n + k) * n + j) * n + m] = d;
        }
      }
    }
  }
}

Vec covariant_derivative(const GeometryModel& model, const VectorFieldExpr& Y,
                         const VectorFieldExpr& X, std::span<const double> x) {
  const int n = model.dim();
  if (Y.dim() != n || X.dim() != n) {
    throw PreconditionError("field dimension mismatch");
  }
  const auto gamma = christoffel(model, x);
  const Vec yv = Y(x);
  const Vec xv = X(x);
  Vec out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const Jet xi = X.components[i].jet(x, 1);
    for (int j = 0; j < n; ++j) {
      double term = xi.partial(idx1(n, j));
      for (int k = 0; k < n; ++k) {
        term += gamma[(static_cast<size_t>(i) * n + j) * n + k] * xv[k];
      }
      out[i] += yv[j] * term;
    }
  }
  return out;
}

std::vector<double> curvature_tensor(const GeometryModel& model,
                                     std::span<const double> x) {
  const int n = model.dim();
  std::vector<double> gamma;
  std::vector<double> dgamma;
  christoffel_with_derivatives(model, x, gamma, dgamma);
  auto G = [&](int i, int j, int k) {
    return gamma[(static_cast<size_t>(i) * n + j) * n + k];
  };
  auto dG = [&](int i, int j, int k, int m) {
    return dgamma[((static_cast<size_t>(i) * n + j) * n + k) * n + m];
  };
  std::vector<double> R(static_cast<size_t>(n) * n * n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          double v = dG(i, l, j, k) - dG(i, k, j, l);
          for (int m = 0; m < n; ++m) {
            v += G(i, k, m) * G(m, l, j) - G(i, l, m) * G(m, k, j);
          }
          R[((static_cast<size_t>(i) * n + j) * n + k) * n + l] = v;
        }
      }
    }
  }
  return R;
}

double sectional_curvature(const GeometryModel& model,
                           std::span<const double> x, const Vec& u,
                           const Vec& v) {
  const int n = model.dim();
  const Mat g = metric_at(model, x);
  const double denom =
      inner(g, u, u) * inner(g, v, v) - inner(g, u, v) * inner(g, u, v);
  if (std::fabs(denom) < 1e-12) {
    throw DomainError("degenerate plane: u and v are linearly dependent");
  }
  const auto R = curvature_tensor(model, x);
  // (R(u,v)v)^i = R^i_{jkl} v^j u^k v^l
  Vec ruv(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          sum += R[((static_cast<size_t>(i) * n + j) * n + k) * n + l] * v[j] *
                 u[k] * v[l];
        }
      }
    }
    ruv[i] = sum;
  }
  return inner(g, ruv, u) / denom;
}

Vec gradient(const GeometryModel& model, const ScalarExpr& f,
             std::span<const double> x) {
  const int n = model.dim();
  const Mat ginv = metric_inverse_at(model, x);
  const Jet fj = f.jet(x, 1);
  Vec out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out[i] += ginv(i, j) * fj.partial(idx1(n, j));
    }
  }
  return out;
}

Vec spray_alpha(const GeometryModel& model, std::span<const double> x,
                std::span<const double> y) {
  const int n = model.dim();
  const auto gamma = christoffel(model, x);
  Vec out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        sum += gamma[(static_cast<size_t>(i) * n + j) * n + k] * y[j] * y[k];
      }
    }
    out[i] = 0.5 * sum;
  }
  return out;
}

Vec lowered_field(const GeometryModel& model, const VectorFieldExpr& X,
                  std::span<const double> x) {
  const Mat g = metric_at(model, x);
  return mat_vec(g, X(x));
}

Mat one_form_covariant_derivative(const GeometryModel& model,
                                  const VectorFieldExpr& X,
                                  std::span<const double> x) {
  const int n = model.dim();
  const MetricJets mj = metric_jets(model, x, 1);
  const auto gamma = christoffel(model, x);
  const Vec xv = X(x);
  const Vec b = mat_vec(mj.values(), xv);

  std::vector<Jet> xjets;
  xjets.reserve(n);
  for (int l = 0; l < n; ++l) xjets.push_back(X.components[l].jet(x, 1));

  Mat out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double dbi = 0.0;  // d_j b_i
      for (int l = 0; l < n; ++l) {
        dbi += mj.dg(i, l, j) * xv[l] + mj.g(i, l) * xjets[l].partial(idx1(n, j));
      }
      double corr = 0.0;
      for (int k = 0; k < n; ++k) {
        corr += gamma[(static_cast<size_t>(k) * n + i) * n + j] * b[k];
      }
      out(i, j) = dbi - corr;
    }
  }
  return out;
}

double parallel_residual(const GeometryModel& model, const VectorFieldExpr& X,
                         std::span<const std::vector<double>> points) {
  double worst = 0.0;
  for (const auto& x : points) {
    const Mat d = one_form_covariant_derivative(model, X, x);
    for (const double v : d.a) worst = std::max(worst, std::fabs(v));
  }
  return worst;
}

double field_apply(const ScalarExpr& f, const VectorFieldExpr& Y,
                   std::span<const double> x) {
  const int n = Y.dim();
  const Jet fj = f.jet(x, 1);
  const Vec yv = Y(x);
  double out = 0.0;
  for (int i = 0; i < n; ++i) out += yv[i] * fj.partial(idx1(n, i));
  return out;
}

Vec lie_bracket_value(const VectorFieldExpr& A, const VectorFieldExpr& B,
                      std::span<const double> x) {
  const int n = A.dim();
  if (B.dim() != n) throw PreconditionError("field dimension mismatch");
  const Vec av = A(x);
  const Vec bv = B(x);
  Vec out(n, 0.0);
  for (int k = 0; k < n; ++k) {
    const Jet bk = B.components[k].jet(x, 1);
    const Jet ak = A.components[k].jet(x, 1);
    for (int l = 0; l < n; ++l) {
      out[k] += av[l] * bk.partial(idx1(n, l)) - bv[l] * ak.partial(idx1(n, l));
    }
  }
  return out;
}

VectorFieldExpr chart_field_from_frame(const GeometryModel& model,
                                       std::span<const ScalarExpr> coeffs) {
  if (!model.has_frame()) {
    throw PreconditionError("model '" + model.name + "' declares no frame");
  }
  const int n = model.dim();
  if (static_cast<int>(coeffs.size()) != n) {
    throw PreconditionError("frame coefficient count must equal dimension");
  }
  VectorFieldExpr out;
  for (int k = 0; k < n; ++k) {
    ScalarExpr acc = ScalarExpr::number(0.0, model.coords);
    for (int i = 0; i < n; ++i) {
      acc = acc + coeffs[i] * model.frame[i].components[k];
    }
    out.components.push_back(std::move(acc));
  }
  return out;
}

VectorFieldExpr chart_field_from_frame(const GeometryModel& model,
                                       std::span<const double> coeffs) {
  std::vector<ScalarExpr> exprs;
  exprs.reserve(coeffs.size());
  for (const double c : coeffs) {
    exprs.push_back(ScalarExpr::number(c, model.coords));
  }
  return chart_field_from_frame(model, exprs);
}

Mat frame_matrix_at(const GeometryModel& model, std::span<const double> x) {
  if (!model.has_frame()) {
    throw PreconditionError("model '" + model.name + "' declares no frame");
  }
  const int n = model.dim();
  Mat e(n, n);
  for (int i = 0; i < n; ++i) {
    const Vec row = model.frame[i](x);
    for (int k = 0; k < n; ++k) e(i, k) = row[k];
  }
  return e;
}

// ---------------------------------------------------------------------------
// Group multiplication

namespace {

std::vector<double> combined_point(const GeometryModel& model,
                                   std::span<const double> a,
                                   std::span<const double> p) {
  const int n = model.dim();
  if (!model.has_multiplication()) {
    throw PreconditionError("model '" + model.name +
                            "' has no multiplication law");
  }
  if (static_cast<int>(a.size()) != n || static_cast<int>(p.size()) != n) {
    throw PreconditionError("group element dimension mismatch");
  }
  std::vector<double> z(2 * static_cast<size_t>(n));
  std::copy(a.begin(), a.end(), z.begin());
  std::copy(p.begin(), p.end(), z.begin() + n);
  return z;
}

}  // namespace

Vec multiply(const GeometryModel& model, std::span<const double> a,
             std::span<const double> p) {
  const auto z = combined_point(model, a, p);
  Vec out(model.dim());
  for (int i = 0; i < model.dim(); ++i) out[i] = model.multiplication[i](z);
  return out;
}

Mat multiplication_jacobian(const GeometryModel& model,
                            std::span<const double> a,
                            std::span<const double> p) {
  const int n = model.dim();
  const auto z = combined_point(model, a, p);
  Mat jac(n, n);
  for (int i = 0; i < n; ++i) {
    const Jet ji = model.multiplication[i].jet(z, 1);
    for (int k = 0; k < n; ++k) {
      jac(i, k) = ji.partial(idx1(2 * n, n + k));
    }
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<std::vector<double>> sample_points(const GeometryModel& model,
                                               std::uint64_t seed, int count) {
  if (count < 1) throw PreconditionError("sample count must be >= 1");
  const int n = model.dim();
  if (static_cast<int>(model.box.size()) != n) {
    throw PreconditionError("model '" + model.name + "' has no sampling box");
  }
  HaltonSource source(n, mix_seed(seed, "points/" + model.name));
  std::vector<std::vector<double>> out;
  out.reserve(count);
  const int max_attempts = 64 * count + 64;
  for (int attempt = 0;
       attempt < max_attempts && static_cast<int>(out.size()) < count;
       ++attempt) {
    const auto unit = source.next();
    std::vector<double> x(n);
    for (int d = 0; d < n; ++d) {
      x[d] = model.box[d].first +
             (model.box[d].second - model.box[d].first) * unit[d];
    }
    if (!model.in_domain(x, 1e-3)) continue;
    out.push_back(std::move(x));
  }
  if (static_cast<int>(out.size()) < count) {
    throw Error("sampling box for model '" + model.name +
                "' rejected too many points");
  }
  return out;
}

}  // namespace finsler
