#include "finsler/conformal.hpp"

#include <cmath>
#include <sstream>

#include "finsler/error.hpp"
#include "finsler/linalg.hpp"

namespace finsler {
namespace {

// b_i = Σ_l g_il X^l as expressions over the model coordinates.
std::vector<ScalarExpr> lowered_field_exprs(const GeometryModel& model,
                                            const VectorFieldExpr& X) {
  const int n = model.dim();
  std::vector<ScalarExpr> b;
  b.reserve(n);
  for (int i = 0; i < n; ++i) {
    ScalarExpr bi = ScalarExpr::number(0.0, model.coords);
    for (int l = 0; l < n; ++l) {
      bi = bi + model.metric_entry(i, l) * X.components[l];
    }
    b.push_back(bi);
  }
  return b;
}

// Entries of the Jacobian ∂_j b_i at x via first-order jets.
Mat one_form_jacobian(const std::vector<ScalarExpr>& b,
                      std::span<const double> x) {
  const int n = static_cast<int>(b.size());
  Mat out(n, n);
  std::vector<int> idx(n, 0);
  for (int i = 0; i < n; ++i) {
    Jet jet = b[i].jet(x, 1);
    for (int j = 0; j < n; ++j) {
      idx.assign(n, 0);
      idx[j] = 1;
      out(i, j) = jet.partial(idx);
    }
  }
  return out;
}

}  // namespace

ConformalPair conformal_transform(const GeometryModel& model,
                                  const VectorFieldExpr& X,
                                  const ScalarExpr& f) {
  const int n = model.dim();
  if (static_cast<int>(X.components.size()) != n) {
    throw PreconditionError("vector field dimension does not match the model");
  }
  ConformalPair pair{model, X, f, model, X};

  const ScalarExpr scale =
      ScalarExpr::apply(CallFunc::kExp, ScalarExpr::number(2.0, model.coords) * f);
  const ScalarExpr inv_scale = ScalarExpr::apply(CallFunc::kExp, -f);

  GeometryModel scaled = model;
  scaled.name = model.name + "/conformal";
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      scaled.metric[i * n + j] = scale * model.metric_entry(i, j);
    }
  }
  // The declared frame is orthonormal for g, not for g̃; drop it so that
  // downstream consumers never mistake it for a g̃-orthonormal frame.
  scaled.frame.clear();
  scaled.frame_orthonormal = false;
  pair.transformed = std::move(scaled);

  VectorFieldExpr scaled_field = X;
  for (int i = 0; i < n; ++i) {
    scaled_field.components[i] = inv_scale * X.components[i];
  }
  pair.transformed_field = std::move(scaled_field);
  return pair;
}

Vec conformal_connection(const ConformalPair& pair, const VectorFieldExpr& Y,
                         const VectorFieldExpr& W, std::span<const double> x) {
  const GeometryModel& model = pair.base;
  const int n = model.dim();
  Vec result = covariant_derivative(model, Y, W, x);
  const double yf = field_apply(pair.factor, Y, x);
  const double wf = field_apply(pair.factor, W, x);
  const Vec yv = Y(x);
  const Vec wv = W(x);
  const Mat g = metric_at(model, x);
  const double gwy = inner(g, wv, yv);
  const Vec grad_f = gradient(model, pair.factor, x);
  for (int i = 0; i < n; ++i) {
    result[i] += yf * wv[i] + wf * yv[i] - gwy * grad_f[i];
  }
  return result;
}

double berwald_residual(const ConformalPair& pair,
                        std::span<const std::vector<double>> points) {
  const GeometryModel& model = pair.base;
  const int n = model.dim();

  std::vector<VectorFieldExpr> basis;
  if (model.has_frame()) {
    basis = model.frame;
  } else {
    for (int i = 0; i < n; ++i) {
      basis.push_back(VectorFieldExpr::axis(model.coords, i));
    }
  }

  double worst = 0.0;
  for (const auto& x : points) {
    const Mat g = metric_at(model, x);
    const Vec grad_f = gradient(model, pair.factor, x);
    const Vec xv = pair.base_field(x);
    const double xf = field_apply(pair.factor, pair.base_field, x);
    for (const auto& Y : basis) {
      Vec r = covariant_derivative(model, Y, pair.base_field, x);
      const Vec yv = Y(x);
      const double gxy = inner(g, xv, yv);
      for (int i = 0; i < n; ++i) {
        r[i] += -gxy * grad_f[i] + xf * yv[i];
      }
      worst = std::max(worst, g_norm(g, r));
    }
  }
  return worst;
}

double douglas_residual(const ConformalPair& pair, const VectorFieldExpr& Y,
                        const VectorFieldExpr& Z, std::span<const double> x) {
  const GeometryModel& model = pair.base;
  const std::vector<ScalarExpr> b = lowered_field_exprs(model, pair.base_field);

  const auto beta_of = [&](const VectorFieldExpr& V) {
    ScalarExpr out = ScalarExpr::number(0.0, model.coords);
    for (int i = 0; i < model.dim(); ++i) {
      out = out + b[i] * V.components[i];
    }
    return out;
  };

  const double y_beta_z = field_apply(beta_of(Z), Y, x);
  const double z_beta_y = field_apply(beta_of(Y), Z, x);

  const Vec bracket = lie_bracket_value(Y, Z, x);
  const Mat g = metric_at(model, x);
  const Vec xv = pair.base_field(x);
  const double beta_bracket = inner(g, xv, bracket);

  const double d_beta = y_beta_z - z_beta_y - beta_bracket;
  const double yf = field_apply(pair.factor, Y, x);
  const double zf = field_apply(pair.factor, Z, x);
  const double gxz = inner(g, xv, Z(x));
  const double gxy = inner(g, xv, Y(x));
  return d_beta + yf * gxz - zf * gxy;
}

double beta_closedness_residual(const GeometryModel& model,
                                const VectorFieldExpr& X,
                                std::span<const std::vector<double>> points) {
  const std::vector<ScalarExpr> b = lowered_field_exprs(model, X);
  double worst = 0.0;
  for (const auto& x : points) {
    const Mat db = one_form_jacobian(b, x);
    for (int i = 0; i < model.dim(); ++i) {
      for (int j = i + 1; j < model.dim(); ++j) {
        worst = std::max(worst, std::abs(db(i, j) - db(j, i)));
      }
    }
  }
  return worst;
}

double gradient_proportionality(const ConformalPair& pair,
                                std::span<const std::vector<double>> points) {
  const GeometryModel& model = pair.base;
  const int n = model.dim();
  const double closed =
      beta_closedness_residual(model, pair.base_field, points);
  if (closed > 1e-8) {
    std::ostringstream msg;
    msg << "the lowered field is not closed (residual " << closed
        << "), so the gradient-proportionality criterion does not apply";
    throw PreconditionError(msg.str());
  }

  double worst = 0.0;
  std::vector<int> idx(n, 0);
  for (const auto& x : points) {
    const Vec b = lowered_field(model, pair.base_field, x);
    Jet jet = pair.factor.jet(x, 1);
    Vec df(n, 0.0);
    for (int i = 0; i < n; ++i) {
      idx.assign(n, 0);
      idx[i] = 1;
      df[i] = jet.partial(idx);
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        worst = std::max(worst, std::abs(df[i] * b[j] - df[j] * b[i]));
      }
    }
  }
  return worst;
}

}  // namespace finsler
