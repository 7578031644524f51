#include "finsler/groups.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "finsler/conformal.hpp"
#include "finsler/error.hpp"

namespace finsler {
namespace {

std::vector<VectorFieldExpr> parse_frame(
    const CoordsPtr& coords,
    const std::vector<std::vector<std::string>>& rows) {
  std::vector<VectorFieldExpr> frame;
  for (const auto& row : rows) {
    VectorFieldExpr field;
    for (const auto& comp : row) {
      field.components.push_back(ScalarExpr::parse(comp, coords));
    }
    frame.push_back(std::move(field));
  }
  return frame;
}

LieModel make_heisenberg() {
  LieModel m;
  m.geometry.name = "heisenberg";
  m.geometry.coords = make_coords({"x", "y", "z"});
  m.geometry.frame = parse_frame(m.geometry.coords, {
                                                        {"1", "0", "-y/2"},
                                                        {"0", "1", "x/2"},
                                                        {"0", "0", "1"},
                                                    });
  m.geometry.frame_orthonormal = true;
  m.geometry.metric = metric_from_orthonormal_frame(m.geometry.frame);
  m.geometry.product_coords = make_coords({"x'", "y'", "z'", "x", "y", "z"});
  m.geometry.multiplication = {
      ScalarExpr::parse("x' + x", m.geometry.product_coords),
      ScalarExpr::parse("y' + y", m.geometry.product_coords),
      ScalarExpr::parse("z' + z + (1/2)*y*x' - (1/2)*y'*x",
                        m.geometry.product_coords),
  };
  m.geometry.box = {{-1.2, 1.2}, {-1.2, 1.2}, {-1.2, 1.2}};
  m.frame_names = {"e1", "e2", "e3"};
  m.brackets = {
      {0, 1, {0.0, 0.0, 1.0}},
      {0, 2, {0.0, 0.0, 0.0}},
      {1, 2, {0.0, 0.0, 0.0}},
  };
  m.builtin = BuiltinGroup::kHeisenberg;
  m.identity = {0.0, 0.0, 0.0};
  return m;
}

LieModel make_sol2() {
  LieModel m;
  m.geometry.name = "sol2";
  m.geometry.coords = make_coords({"x", "y"});
  m.geometry.frame = parse_frame(m.geometry.coords, {
                                                        {"0", "y"},
                                                        {"y", "0"},
                                                    });
  m.geometry.frame_orthonormal = true;
  m.geometry.metric = metric_from_orthonormal_frame(m.geometry.frame);
  m.geometry.product_coords = make_coords({"x'", "y'", "x", "y"});
  m.geometry.multiplication = {
      ScalarExpr::parse("x' + y'*x", m.geometry.product_coords),
      ScalarExpr::parse("y'*y", m.geometry.product_coords),
  };
  m.geometry.domain = {ScalarExpr::parse("y", m.geometry.coords)};
  m.geometry.box = {{-1.2, 1.2}, {0.4, 2.2}};
  m.frame_names = {"e1", "e2"};
  m.brackets = {
      {0, 1, {0.0, 1.0}},
  };
  m.builtin = BuiltinGroup::kSol2;
  m.identity = {0.0, 1.0};
  return m;
}

LieModel make_sol3() {
  LieModel m;
  m.geometry.name = "sol3";
  m.geometry.coords = make_coords({"x", "y", "z"});
  m.geometry.frame = parse_frame(m.geometry.coords, {
                                                        {"0", "0", "z"},
                                                        {"z", "0", "0"},
                                                        {"0", "z", "0"},
                                                    });
  m.geometry.frame_orthonormal = true;
  m.geometry.metric = metric_from_orthonormal_frame(m.geometry.frame);
  m.geometry.product_coords =
      make_coords({"x'", "y'", "z'", "x", "y", "z"});
  m.geometry.multiplication = {
      ScalarExpr::parse("x' + z'*x", m.geometry.product_coords),
      ScalarExpr::parse("y' + z'*y", m.geometry.product_coords),
      ScalarExpr::parse("z'*z", m.geometry.product_coords),
  };
  m.geometry.domain = {ScalarExpr::parse("z", m.geometry.coords)};
  m.geometry.box = {{-1.2, 1.2}, {-1.2, 1.2}, {0.4, 2.2}};
  m.frame_names = {"e1", "e2", "e3"};
  m.brackets = {
      {0, 1, {0.0, 1.0, 0.0}},
      {0, 2, {0.0, 0.0, 1.0}},
      {1, 2, {0.0, 0.0, 0.0}},
  };
  m.builtin = BuiltinGroup::kSol3;
  m.identity = {0.0, 0.0, 1.0};
  return m;
}

}  // namespace

VectorFieldExpr InvariantField::chart_field(
    const GeometryModel& geometry) const {
  if (static_cast<int>(coeffs.size()) != geometry.dim()) {
    throw PreconditionError(
        "invariant field coefficient count does not match the frame");
  }
  return chart_field_from_frame(geometry, coeffs);
}

LieModel builtin_model(const std::string& name) {
  if (name == "heisenberg") return make_heisenberg();
  if (name == "sol2") return make_sol2();
  if (name == "sol3") return make_sol3();
  throw Error("unknown builtin model '" + name + "'");
}

std::vector<std::string> builtin_model_names() {
  return {"heisenberg", "sol2", "sol3"};
}

Vec lie_bracket(const LieModel& model, int i, int j,
                std::span<const double> x) {
  const int n = model.dim();
  if (i < 0 || j < 0 || i >= n || j >= n) {
    throw PreconditionError("frame index out of range");
  }
  return lie_bracket_value(model.geometry.frame[i], model.geometry.frame[j], x);
}

double structure_constant_residual(
    const LieModel& model, std::span<const std::vector<double>> points) {
  if (!model.geometry.has_frame()) {
    throw PreconditionError("structure constants need a declared frame");
  }
  const int n = model.dim();
  double worst = 0.0;
  for (const auto& x : points) {
    const Mat frame = frame_matrix_at(model.geometry, x);
    for (const auto& br : model.brackets) {
      const Vec computed = lie_bracket(model, br.i, br.j, x);
      for (int k = 0; k < n; ++k) {
        double expected = 0.0;
        for (int l = 0; l < n; ++l) expected += br.coeffs[l] * frame(l, k);
        worst = std::max(worst, std::abs(computed[k] - expected));
      }
    }
  }
  return worst;
}

double left_invariance_residual(const LieModel& model, std::uint64_t seed,
                                int samples) {
  const GeometryModel& geo = model.geometry;
  if (!geo.has_multiplication()) {
    throw PreconditionError("left invariance needs the group multiplication");
  }
  const int n = model.dim();
  const auto left = sample_points(geo, mix_seed(seed, "invariance-left"), samples);
  const auto right =
      sample_points(geo, mix_seed(seed, "invariance-right"), samples);
  Sampler vectors(mix_seed(seed, "invariance-vectors"));

  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Vec& a = left[k];
    const Vec& p = right[k];
    const Vec ap = multiply(geo, a, p);
    if (!geo.in_domain(ap)) continue;
    const Mat jac = multiplication_jacobian(geo, a, p);
    const Mat gp = metric_at(geo, p);
    const Mat gap = metric_at(geo, ap);

    const Vec u = vectors.direction(n);
    const Vec v = vectors.direction(n);
    const Vec ju = mat_vec(jac, u);
    const Vec jv = mat_vec(jac, v);
    worst = std::max(worst, std::abs(inner(gap, ju, jv) - inner(gp, u, v)));

    if (geo.has_frame()) {
      const Mat ep = frame_matrix_at(geo, p);
      const Mat eap = frame_matrix_at(geo, ap);
      for (int i = 0; i < n; ++i) {
        Vec ei(n, 0.0);
        for (int c = 0; c < n; ++c) ei[c] = ep(i, c);
        const Vec moved = mat_vec(jac, ei);
        for (int c = 0; c < n; ++c) {
          worst = std::max(worst, std::abs(moved[c] - eap(i, c)));
        }
      }
    }
  }
  return worst;
}

double b_squared_spread(const LieModel& model, const InvariantField& X,
                        std::span<const std::vector<double>> points) {
  const GeometryModel& geo = model.geometry;
  const VectorFieldExpr field = X.chart_field(geo);

  Vec base = model.identity;
  if (base.empty()) {
    base.resize(geo.dim());
    for (int i = 0; i < geo.dim(); ++i) {
      base[i] = 0.5 * (geo.box[i].first + geo.box[i].second);
    }
  }
  const Vec base_val = field(base);
  const double b2_base = inner(metric_at(geo, base), base_val, base_val);

  double worst = 0.0;
  for (const auto& x : points) {
    const Vec val = field(x);
    const double b2 = inner(metric_at(geo, x), val, val);
    worst = std::max(worst, std::abs(b2 - b2_base));
  }
  return worst;
}

DouglasFrameResiduals left_invariant_douglas(const LieModel& model,
                                             const InvariantField& X,
                                             const ScalarExpr& f,
                                             std::span<const double> x) {
  const GeometryModel& geo = model.geometry;
  if (!geo.has_frame()) {
    throw PreconditionError("the frame-level criterion needs a declared frame");
  }
  const int n = model.dim();
  const VectorFieldExpr field = X.chart_field(geo);
  const Mat g = metric_at(geo, x);
  const Vec xv = field(x);

  Vec ef(n, 0.0);
  Vec gxe(n, 0.0);
  const Mat frame = frame_matrix_at(geo, x);
  for (int i = 0; i < n; ++i) {
    ef[i] = field_apply(f, geo.frame[i], x);
    Vec ei(n, 0.0);
    for (int c = 0; c < n; ++c) ei[c] = frame(i, c);
    gxe[i] = inner(g, xv, ei);
  }

  const ConformalPair pair = conformal_transform(geo, field, f);

  DouglasFrameResiduals out;
  out.frame = Mat(n, n);
  out.chart = Mat(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const Vec rev = lie_bracket(model, j, i, x);
      out.frame(i, j) = inner(g, xv, rev) + ef[i] * gxe[j] - ef[j] * gxe[i];
      out.chart(i, j) = douglas_residual(pair, geo.frame[i], geo.frame[j], x);
    }
  }
  return out;
}

std::vector<NamedResidual> pde_residuals(const LieModel& model,
                                         std::span<const double> coeffs,
                                         const ScalarExpr& f,
                                         std::span<const double> x) {
  if (!model.builtin) {
    throw PreconditionError("the reduced system is only known for builtins");
  }
  const int n = model.dim();
  if (static_cast<int>(coeffs.size()) != n) {
    throw PreconditionError(
        "invariant field coefficient count does not match the frame");
  }
  Jet jet = f.jet(x, 1);
  std::vector<int> idx(n, 0);
  Vec df(n, 0.0);
  for (int k = 0; k < n; ++k) {
    idx.assign(n, 0);
    idx[k] = 1;
    df[k] = jet.partial(idx);
  }

  std::vector<NamedResidual> out;
  switch (*model.builtin) {
    case BuiltinGroup::kHeisenberg: {
      const double a = coeffs[0], b = coeffs[1], c = coeffs[2];
      const double fx = df[0], fy = df[1], fz = df[2];
      const double px = x[0], py = x[1];
      out.push_back({"pair-12",
                     b * fx - a * fy - (b * py + a * px / 2.0) * fz - c});
      out.push_back({"pair-13", c * fx - (c * py + a) * fz});
      out.push_back({"pair-23", c * fy + (c * px / 2.0 - b) * fz});
      break;
    }
    case BuiltinGroup::kSol2: {
      const double a = coeffs[0], b = coeffs[1];
      const double fx = df[0], fy = df[1];
      const double py = x[1];
      out.push_back({"pair-12", b * py * fy - a * py * fx - b});
      break;
    }
    case BuiltinGroup::kSol3: {
      const double a = coeffs[0], b = coeffs[1], c = coeffs[2];
      const double fx = df[0], fy = df[1], fz = df[2];
      const double pz = x[2];
      out.push_back({"pair-12", b * pz * fz - a * pz * fx - b});
      out.push_back({"pair-13", c * pz * fz - a * pz * fy - c});
      out.push_back({"pair-23", c * pz * fx - b * pz * fy});
      break;
    }
  }
  return out;
}

}  // namespace finsler
