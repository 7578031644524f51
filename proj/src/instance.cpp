#include "finsler/instance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "finsler/error.hpp"

namespace finsler {
namespace {

void require_dim(std::span<const double> v, int n, const char* what) {
  if (static_cast<int>(v.size()) != n) {
    std::ostringstream msg;
    msg << what << " has dimension " << v.size() << ", expected " << n;
    throw PreconditionError(msg.str());
  }
}

void require_nonzero(std::span<const double> y) {
  for (double c : y) {
    if (c != 0.0) return;
  }
  throw PreconditionError("the fiber vector y must be nonzero");
}

}  // namespace

FinslerInstance::FinslerInstance(GeometryModel geometry, VectorFieldExpr X,
                                 PhiFamily phi, std::optional<ScalarExpr> f)
    : base_geometry_(std::move(geometry)),
      base_field_(std::move(X)),
      phi_(std::move(phi)),
      factor_(std::move(f)) {
  if (static_cast<int>(base_field_.components.size()) != base_geometry_.dim()) {
    throw PreconditionError("vector field dimension does not match the model");
  }
  if (factor_) {
    ConformalPair pair =
        conformal_transform(base_geometry_, base_field_, *factor_);
    geometry_ = std::move(pair.transformed);
    field_ = std::move(pair.transformed_field);
  } else {
    geometry_ = base_geometry_;
    field_ = base_field_;
  }
}

void FinslerInstance::check_field_norm(std::span<const double> x) const {
  const double w = b_squared(x);
  const double b = std::sqrt(std::max(w, 0.0));
  if (!(b < phi_.b0())) {
    std::ostringstream msg;
    msg << "the field norm " << b << " at the base point is not below the phi "
        << "validity radius b0 = " << phi_.b0();
    throw PreconditionError(msg.str());
  }
}

double FinslerInstance::b_squared(std::span<const double> x) const {
  const Mat g = metric_at(geometry_, x);
  const Vec xc = field_(x);
  return inner(g, xc, xc);
}

double FinslerInstance::alpha(std::span<const double> x,
                              std::span<const double> y) const {
  const int n = dim();
  require_dim(x, n, "base point");
  require_dim(y, n, "fiber vector");
  require_nonzero(y);
  const Mat g = metric_at(geometry_, x);
  const Vec yv(y.begin(), y.end());
  const double a2 = inner(g, yv, yv);
  if (!(a2 > 0.0)) {
    throw DomainError("the metric is not positive on the fiber vector");
  }
  return std::sqrt(a2);
}

double FinslerInstance::beta(std::span<const double> x,
                             std::span<const double> y) const {
  const int n = dim();
  require_dim(x, n, "base point");
  require_dim(y, n, "fiber vector");
  const Mat g = metric_at(geometry_, x);
  const Vec yv(y.begin(), y.end());
  return inner(g, field_(x), yv);
}

double FinslerInstance::eval(std::span<const double> x,
                             std::span<const double> y) const {
  check_field_norm(x);
  const double a = alpha(x, y);
  const double s = beta(x, y) / a;
  return a * phi_.value(b_squared(x), s);
}

Mat FinslerInstance::fundamental_tensor_formula(std::span<const double> x,
                                                std::span<const double> y) const {
  check_field_norm(x);
  const int n = dim();
  const double a = alpha(x, y);
  const Mat g = metric_at(geometry_, x);
  const Vec xc = field_(x);
  const Vec b = lowered_field(geometry_, field_, x);
  const double w = inner(g, xc, xc);

  double beta_v = 0.0;
  Vec ay(n, 0.0);  // α_{y^i} = g_ij y^j / α
  for (int i = 0; i < n; ++i) {
    double gy = 0.0;
    for (int j = 0; j < n; ++j) gy += g(i, j) * y[j];
    ay[i] = gy / a;
    beta_v += b[i] * y[i];
  }
  const double s = beta_v / a;
  const FundamentalCoefficients c = phi_.coefficients(w, s);

  Mat out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out(i, j) = c.rho * g(i, j) + c.rho0 * b[i] * b[j] +
                  c.rho1 * (b[i] * ay[j] + b[j] * ay[i]) -
                  s * c.rho1 * ay[i] * ay[j];
    }
  }
  return out;
}

Taylor FinslerInstance::f_squared_jet(std::span<const Taylor> xt,
                                      std::span<const Taylor> yt) const {
  const int n = dim();
  std::vector<Taylor> g;
  g.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j < i) {
        g.push_back(g[static_cast<size_t>(j) * n + i]);
      } else {
        g.push_back(geometry_.metric_entry(i, j)(xt));
      }
    }
  }
  std::vector<Taylor> xc;
  xc.reserve(n);
  for (int i = 0; i < n; ++i) xc.push_back(field_.components[i](xt));

  Taylor w = make_constant_like(xt[0], 0.0);
  std::vector<Taylor> b;
  b.reserve(n);
  for (int i = 0; i < n; ++i) {
    Taylor bi = make_constant_like(xt[0], 0.0);
    for (int j = 0; j < n; ++j) bi = bi + g[static_cast<size_t>(i) * n + j] * xc[j];
    b.push_back(bi);
    w = w + bi * xc[i];
  }

  Taylor alpha2 = make_constant_like(xt[0], 0.0);
  Taylor beta_t = make_constant_like(xt[0], 0.0);
  for (int i = 0; i < n; ++i) {
    Taylor row = make_constant_like(xt[0], 0.0);
    for (int j = 0; j < n; ++j) row = row + g[static_cast<size_t>(i) * n + j] * yt[j];
    alpha2 = alpha2 + row * yt[i];
    beta_t = beta_t + b[i] * yt[i];
  }
  const Taylor alpha_t = sqrt(alpha2);
  const Taylor s = beta_t / alpha_t;
  const Taylor phi_t = phi_.value(w, s);
  return alpha2 * phi_t * phi_t;
}

Mat FinslerInstance::fundamental_tensor_hessian(std::span<const double> x,
                                                std::span<const double> y) const {
  check_field_norm(x);
  const int n = dim();
  require_dim(x, n, "base point");
  require_dim(y, n, "fiber vector");
  require_nonzero(y);

  const TaylorContextPtr ctx = TaylorContext::get(n, 2);
  std::vector<Taylor> xt;
  std::vector<Taylor> yt;
  for (int i = 0; i < n; ++i) {
    xt.push_back(Taylor::constant(ctx, x[i]));
    yt.push_back(Taylor::variable(ctx, i, y[i]));
  }
  const Taylor f2 = f_squared_jet(xt, yt);

  Mat out(n, n);
  std::vector<int> idx(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      idx.assign(n, 0);
      idx[i] += 1;
      idx[j] += 1;
      const double h = 0.5 * f2.partial(idx);
      out(i, j) = h;
      out(j, i) = h;
    }
  }
  return out;
}

SprayJets FinslerInstance::spray(std::span<const double> x,
                                 std::span<const double> y, int order) const {
  check_field_norm(x);
  const int n = dim();
  require_dim(x, n, "base point");
  require_dim(y, n, "fiber vector");
  require_nonzero(y);
  if (order < 0) throw PreconditionError("spray order must be nonnegative");

  const TaylorContextPtr ctx = TaylorContext::get(2 * n, order + 2);
  std::vector<Taylor> xt;
  std::vector<Taylor> yt;
  for (int i = 0; i < n; ++i) xt.push_back(Taylor::variable(ctx, i, x[i]));
  for (int i = 0; i < n; ++i) yt.push_back(Taylor::variable(ctx, n + i, y[i]));
  const Taylor f2 = f_squared_jet(xt, yt);

  // A = ½ ∂²F²/∂y∂y, the fundamental tensor as a jet in (x, y).
  std::vector<Taylor> A;
  A.reserve(static_cast<size_t>(n) * n);
  for (int l = 0; l < n; ++l) {
    for (int j = 0; j < n; ++j) {
      if (j < l) {
        A.push_back(A[static_cast<size_t>(j) * n + l]);
      } else {
        A.push_back(f2.derivative(n + l).derivative(n + j) * 0.5);
      }
    }
  }

  std::vector<Taylor> B;
  B.reserve(n);
  for (int l = 0; l < n; ++l) {
    Taylor rhs = make_constant_like(f2, 0.0) - f2.derivative(l);
    for (int k = 0; k < n; ++k) {
      rhs = rhs + f2.derivative(k).derivative(n + l) * yt[k];
    }
    B.push_back(rhs * 0.25);
  }

  SprayJets out;
  out.n = n;
  out.order = order;
  out.G = solve_system<Taylor>(std::move(A), std::move(B), n, 1);
  return out;
}

Vec FinslerInstance::spray_values(std::span<const double> x,
                                  std::span<const double> y) const {
  const SprayJets s = spray(x, y, 0);
  Vec out(s.n, 0.0);
  for (int i = 0; i < s.n; ++i) out[i] = s.G[i].value();
  return out;
}

Mat FinslerInstance::riemann_curvature(std::span<const double> x,
                                       std::span<const double> y) const {
  const SprayJets s = spray(x, y, 2);
  const int n = s.n;
  std::vector<int> idx(2 * n, 0);
  const auto d1 = [&](const Taylor& t, int a) {
    idx.assign(2 * n, 0);
    idx[a] = 1;
    return t.partial(idx);
  };
  const auto d2 = [&](const Taylor& t, int a, int b) {
    idx.assign(2 * n, 0);
    idx[a] += 1;
    idx[b] += 1;
    return t.partial(idx);
  };

  Mat r(n, n);
  for (int i = 0; i < n; ++i) {
    const Taylor& gi = s.G[i];
    for (int k = 0; k < n; ++k) {
      double acc = 2.0 * d1(gi, k);
      for (int j = 0; j < n; ++j) {
        acc -= y[j] * d2(gi, j, n + k);
        acc += 2.0 * s.G[j].value() * d2(gi, n + j, n + k);
        acc -= d1(gi, n + j) * d1(s.G[j], n + k);
      }
      r(i, k) = acc;
    }
  }
  return r;
}

double FinslerInstance::flag_curvature(std::span<const double> x,
                                       std::span<const double> y,
                                       std::span<const double> u) const {
  const int n = dim();
  require_dim(u, n, "flag edge");
  const Mat gf = fundamental_tensor_hessian(x, y);
  const Mat r = riemann_curvature(x, y);
  const double f = eval(x, y);

  const Vec yv(y.begin(), y.end());
  const Vec uv(u.begin(), u.end());
  double num = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double rij = 0.0;
      for (int m = 0; m < n; ++m) rij += gf(i, m) * r(m, j);
      num += rij * uv[i] * uv[j];
    }
  }
  const double den = f * f * inner(gf, uv, uv) - inner(gf, yv, uv) * inner(gf, yv, uv);
  if (std::abs(den) < 1e-12) {
    throw DomainError("degenerate flag: the edge is parallel to the pole");
  }
  return num / den;
}

ClosedFormFlag FinslerInstance::flag_curvature_closed_form(
    std::span<const double> x, std::span<const double> y,
    std::span<const double> u) const {
  check_field_norm(x);
  const int n = dim();
  require_dim(u, n, "flag edge");

  const std::vector<std::vector<double>> pts = {
      std::vector<double>(x.begin(), x.end())};
  const double par = parallel_residual(geometry_, field_, pts);
  if (par > 1e-8) {
    std::ostringstream msg;
    msg << "the closed-form flag curvature needs a parallel field, but the "
        << "parallelism residual at this point is " << par;
    throw PreconditionError(msg.str());
  }

  ScalarExpr b2_expr = ScalarExpr::number(0.0, geometry_.coords);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      b2_expr = b2_expr + geometry_.metric_entry(i, j) *
                              field_.components[i] * field_.components[j];
    }
  }
  Jet b2_jet = b2_expr.jet(x, 1);
  std::vector<int> idx(n, 0);
  for (int k = 0; k < n; ++k) {
    idx.assign(n, 0);
    idx[k] = 1;
    const double dk = b2_jet.partial(idx);
    if (std::abs(dk) > 1e-8) {
      std::ostringstream msg;
      msg << "the squared field norm is not constant near this point "
          << "(gradient component " << dk << ")";
      throw PreconditionError(msg.str());
    }
  }

  const Mat g = metric_at(geometry_, x);
  const Vec yv(y.begin(), y.end());
  const Vec uv(u.begin(), u.end());
  const Vec xc = field_(x);
  const Vec b = lowered_field(geometry_, field_, x);
  const double a2 = inner(g, yv, yv);
  const double a = std::sqrt(a2);
  double beta_v = 0.0;
  for (int i = 0; i < n; ++i) beta_v += b[i] * yv[i];
  const double s = beta_v / a;
  const double w = inner(g, xc, xc);

  const double kg = sectional_curvature(geometry_, x, uv, yv);
  const FundamentalCoefficients c = phi_.coefficients(w, s);
  const PhiDerivs d = phi_.derivs(w, s);
  const double f = a * d.phi;

  const Mat gf = fundamental_tensor_formula(x, y);
  const double num = a2 * inner(g, uv, uv) - inner(g, yv, uv) * inner(g, yv, uv);
  const double den =
      f * f * inner(gf, uv, uv) - inner(gf, yv, uv) * inner(gf, yv, uv);
  if (std::abs(den) < 1e-12) {
    throw DomainError("degenerate flag: the edge is parallel to the pole");
  }

  ClosedFormFlag out;
  out.value = c.rho * kg * num / den;
  out.riemannian_curvature = kg;

  const bool orthonormal = std::abs(inner(g, yv, yv) - 1.0) <= 1e-9 &&
                           std::abs(inner(g, uv, uv) - 1.0) <= 1e-9 &&
                           std::abs(inner(g, yv, uv)) <= 1e-9;
  if (orthonormal) {
    const double gxu = inner(g, xc, uv);
    const double reduced =
        kg / (d.phi * d.phi * (1.0 + gxu * gxu * c.dcoef));
    if (std::abs(reduced - out.value) >
        1e-10 * std::max(1.0, std::abs(out.value))) {
      std::ostringstream msg;
      msg << "flag curvature routes disagree: " << out.value << " vs "
          << reduced;
      throw Error(msg.str());
    }
    out.orthonormal_value = reduced;
  }
  return out;
}

double FinslerInstance::berwald_witness(std::span<const double> x,
                                        std::span<const double> y) const {
  const SprayJets s = spray(x, y, 3);
  const int n = s.n;
  double worst = 0.0;
  std::vector<int> idx(2 * n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        for (int l = k; l < n; ++l) {
          idx.assign(2 * n, 0);
          idx[n + j] += 1;
          idx[n + k] += 1;
          idx[n + l] += 1;
          worst = std::max(worst, std::abs(s.G[i].partial(idx)));
        }
      }
    }
  }
  return worst;
}

}  // namespace finsler
