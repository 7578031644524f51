#include <doctest.h>

#include <cmath>
#include <vector>

#include "finsler/conformal.hpp"
#include "finsler/error.hpp"
#include "finsler/geometry.hpp"
#include "finsler/groups.hpp"
#include "test_util.hpp"

using namespace finsler;

namespace {

ConformalPair make_pair(const GeometryModel& geo,
                        const std::vector<double>& frame_coeffs,
                        const std::string& f) {
  const VectorFieldExpr X = chart_field_from_frame(geo, frame_coeffs);
  return conformal_transform(geo, X, ScalarExpr::parse(f, geo.coords));
}

}  // namespace

TEST_CASE("transformed metric and field scale correctly") {
  const GeometryModel geo = builtin_model("sol2").geometry;
  const ConformalPair pair = make_pair(geo, {0.4, 0.2}, "x + ln(y)");

  for (const auto& x : sample_points(geo, 9u, 8)) {
    const double f = pair.factor(x);
    const Mat g = metric_at(pair.base, x);
    const Mat gt = metric_at(pair.transformed, x);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        CHECK(gt(i, j) ==
              doctest::Approx(std::exp(2 * f) * g(i, j)).epsilon(1e-12));
      }
    }

    const Vec xv = pair.base_field(x);
    const Vec xt = pair.transformed_field(x);
    for (int i = 0; i < 2; ++i) {
      CHECK(xt[i] == doctest::Approx(std::exp(-f) * xv[i]).epsilon(1e-12));
    }

    // The norm of the field is conformally invariant under this pairing.
    const double norm_base = inner(g, xv, xv);
    const double norm_scaled = inner(gt, xt, xt);
    CHECK(norm_scaled == doctest::Approx(norm_base).epsilon(1e-12));
  }
}

TEST_CASE("transformed model drops the orthonormal frame declaration") {
  const GeometryModel geo = builtin_model("sol2").geometry;
  REQUIRE(geo.has_frame());
  const ConformalPair pair = make_pair(geo, {0.4, 0.0}, "x");
  CHECK_FALSE(pair.transformed.has_frame());
}

TEST_CASE("conformal connection matches the rescaled christoffel symbols") {
  const GeometryModel geo = builtin_model("heisenberg").geometry;
  const ConformalPair pair = make_pair(geo, {0.3, 0.1, 0.2}, "x - y/2");

  for (const auto& x : sample_points(geo, 21u, 6)) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const VectorFieldExpr Y = VectorFieldExpr::axis(geo.coords, i);
        const VectorFieldExpr W = VectorFieldExpr::axis(geo.coords, j);
        const Vec via_formula = conformal_connection(pair, Y, W, x);
        const Vec direct =
            covariant_derivative(pair.transformed, Y, W, x);
        for (int k = 0; k < 3; ++k) {
          CHECK(testutil::rel_err(via_formula[k], direct[k]) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("berwald residual detects the rescaled-parallel pairs") {
  const GeometryModel geo = builtin_model("sol2").geometry;
  const auto points = sample_points(geo, 13u, 20);

  const ConformalPair good = make_pair(geo, {1.0, 0.0}, "ln(y)");
  CHECK(berwald_residual(good, points) < 1e-10);

  const ConformalPair good2 = make_pair(geo, {-2.0, 0.0}, "ln(y)");
  CHECK(berwald_residual(good2, points) < 1e-10);

  const ConformalPair flat = make_pair(geo, {1.0, 0.0}, "0");
  CHECK(berwald_residual(flat, points) == doctest::Approx(1.0).epsilon(1e-9));

  const GeometryModel sol3 = builtin_model("sol3").geometry;
  const auto pts3 = sample_points(sol3, 13u, 20);
  const VectorFieldExpr e1 = chart_field_from_frame(sol3, std::vector<double>{1.0, 0.0, 0.0});
  const ConformalPair good3 = conformal_transform(
      sol3, e1, ScalarExpr::parse("ln(z)", sol3.coords));
  CHECK(berwald_residual(good3, pts3) < 1e-10);

  const ConformalPair flat3 =
      conformal_transform(sol3, e1, ScalarExpr::parse("0", sol3.coords));
  CHECK(berwald_residual(flat3, pts3) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("douglas residual is the signed pair obstruction") {
  const GeometryModel geo = builtin_model("heisenberg").geometry;

  // A field and factor solving the pair system exactly.
  const ConformalPair good = make_pair(geo, {2.0, 1.0, 0.0}, "x + y/2");
  const std::vector<double> x{0.2, -0.4, 0.3};
  const Mat frame = frame_matrix_at(geo, x);
  std::vector<VectorFieldExpr> frame_fields;
  for (int i = 0; i < 3; ++i) {
    frame_fields.push_back(geo.frame[i]);
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      CHECK(std::abs(douglas_residual(good, frame_fields[i], frame_fields[j],
                                      x)) < 1e-10);
    }
  }
  (void)frame;

  // The center field with no rescaling: dβ(e₁, e₂) = −β([e₁, e₂]) = −1.
  const ConformalPair center = make_pair(geo, {0.0, 0.0, 1.0}, "0");
  CHECK(douglas_residual(center, frame_fields[0], frame_fields[1], x) ==
        doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(douglas_residual(center, frame_fields[1], frame_fields[0], x) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(douglas_residual(center, frame_fields[0], frame_fields[2],
                                  x)) < 1e-10);
}

TEST_CASE("douglas residual is antisymmetric in its two directions") {
  const GeometryModel geo = builtin_model("sol3").geometry;
  const ConformalPair pair = make_pair(geo, {0.5, -0.2, 0.4}, "x*z");
  const std::vector<double> x{0.3, -0.1, 1.4};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double rij =
          douglas_residual(pair, geo.frame[i], geo.frame[j], x);
      const double rji =
          douglas_residual(pair, geo.frame[j], geo.frame[i], x);
      CHECK(rij == doctest::Approx(-rji).epsilon(1e-10));
    }
  }
}

TEST_CASE("closedness residual separates exact from non-exact one-forms") {
  const GeometryModel geo = GeometryModel::euclidean(2);
  const auto points = sample_points(geo, 31u, 10);

  // b = (y², 2xy) = d(xy²) is exact.
  VectorFieldExpr exact;
  exact.components = {ScalarExpr::parse("y^2", geo.coords),
                      ScalarExpr::parse("2*x*y", geo.coords)};
  CHECK(beta_closedness_residual(geo, exact, points) < 1e-12);

  // b = (−y, x) has db = 2 dx∧dy.
  VectorFieldExpr spin;
  spin.components = {ScalarExpr::parse("-y", geo.coords),
                     ScalarExpr::parse("x", geo.coords)};
  CHECK(beta_closedness_residual(geo, spin, points) ==
        doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("gradient proportionality measures alignment with the one-form") {
  const GeometryModel geo = GeometryModel::euclidean(2);
  const auto points = sample_points(geo, 11u, 10);

  // X = (1, 0): b = dx. f = x gives ∇f = (1, 0) aligned with b.
  const std::vector<double> ex{1.0, 0.0};
  const VectorFieldExpr X = VectorFieldExpr::constant(geo.coords, ex);
  const ConformalPair aligned =
      conformal_transform(geo, X, ScalarExpr::parse("x", geo.coords));
  CHECK(gradient_proportionality(aligned, points) < 1e-12);

  // f = y gives ∇f = (0, 1): the cross term f_y·b_x has magnitude one.
  const ConformalPair crossed =
      conformal_transform(geo, X, ScalarExpr::parse("y", geo.coords));
  CHECK(gradient_proportionality(crossed, points) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // A non-closed b refuses the computation.
  VectorFieldExpr spin;
  spin.components = {ScalarExpr::parse("-y", geo.coords),
                     ScalarExpr::parse("x", geo.coords)};
  const ConformalPair bad =
      conformal_transform(geo, spin, ScalarExpr::parse("x", geo.coords));
  CHECK_THROWS_AS(gradient_proportionality(bad, points), PreconditionError);
}
