#include <doctest.h>

#include <cmath>
#include <vector>

#include "finsler/error.hpp"
#include "finsler/groups.hpp"
#include "test_util.hpp"

using namespace finsler;

TEST_CASE("the built-in catalogue") {
  const auto names = builtin_model_names();
  REQUIRE(names.size() == 3);
  CHECK(names[0] == "heisenberg");
  CHECK(names[1] == "sol2");
  CHECK(names[2] == "sol3");
  CHECK_THROWS_AS(builtin_model("nope"), Error);
}

TEST_CASE("frame fields evaluate to their defining components") {
  const LieModel model = builtin_model("heisenberg");
  const std::vector<double> x{0.7, -0.4, 0.2};

  const InvariantField center{{0.0, 0.0, 1.0}};
  const Vec e3 = center.chart_field(model.geometry)(x);
  CHECK(e3[0] == doctest::Approx(0.0));
  CHECK(e3[1] == doctest::Approx(0.0));
  CHECK(e3[2] == doctest::Approx(1.0));

  const InvariantField first{{1.0, 0.0, 0.0}};
  const Vec e1 = first.chart_field(model.geometry)(x);
  CHECK(e1[0] == doctest::Approx(1.0));
  CHECK(e1[1] == doctest::Approx(0.0));
  CHECK(e1[2] == doctest::Approx(0.2));  // -y/2 at y = -0.4
}

TEST_CASE("computed brackets match the declared structure constants") {
  for (const auto& name : builtin_model_names()) {
    const LieModel model = builtin_model(name);
    const auto points = sample_points(model.geometry, 17u, 10);
    CHECK(structure_constant_residual(model, points) < 1e-12);
  }
}

TEST_CASE("pinned bracket values") {
  const LieModel h = builtin_model("heisenberg");
  const std::vector<double> x{0.3, -0.5, 0.1};

  const Vec b12 = lie_bracket(h, 0, 1, x);
  CHECK(b12[0] == doctest::Approx(0.0));
  CHECK(b12[1] == doctest::Approx(0.0));
  CHECK(b12[2] == doctest::Approx(1.0));

  const Vec b13 = lie_bracket(h, 0, 2, x);
  for (double v : b13) CHECK(std::abs(v) < 1e-14);

  const LieModel s2 = builtin_model("sol2");
  const std::vector<double> p{0.4, 1.7};
  const Vec b = lie_bracket(s2, 0, 1, p);
  // [e₁, e₂] = e₂ = y∂x.
  CHECK(b[0] == doctest::Approx(1.7));
  CHECK(b[1] == doctest::Approx(0.0));

  CHECK_THROWS_AS(lie_bracket(h, 0, 3, x), Error);
}

TEST_CASE("a perturbed frame breaks the structure constants") {
  LieModel model = builtin_model("heisenberg");
  const CoordsPtr coords = model.geometry.coords;
  for (auto& comp : model.geometry.frame[1].components) {
    comp = comp * ScalarExpr::number(1.1, coords);
  }
  const auto points = sample_points(model.geometry, 17u, 10);
  CHECK(structure_constant_residual(model, points) > 0.05);
}

TEST_CASE("group laws have the declared identity and are associative") {
  for (const auto& name : builtin_model_names()) {
    const LieModel model = builtin_model(name);
    REQUIRE(model.geometry.has_multiplication());

    const auto points = sample_points(model.geometry, 23u, 6);
    for (const auto& p : points) {
      const Vec left = multiply(model.geometry, model.identity, p);
      const Vec right = multiply(model.geometry, p, model.identity);
      for (int i = 0; i < model.dim(); ++i) {
        CHECK(left[i] == doctest::Approx(p[i]).epsilon(1e-12));
        CHECK(right[i] == doctest::Approx(p[i]).epsilon(1e-12));
      }
    }

    for (size_t k = 0; k + 2 < points.size(); ++k) {
      const auto& a = points[k];
      const auto& b = points[k + 1];
      const auto& c = points[k + 2];
      const Vec ab_c = multiply(model.geometry, multiply(model.geometry, a, b), c);
      const Vec a_bc = multiply(model.geometry, a, multiply(model.geometry, b, c));
      for (int i = 0; i < model.dim(); ++i) {
        CHECK(ab_c[i] == doctest::Approx(a_bc[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("metric and frame are invariant under left translations") {
  for (const auto& name : builtin_model_names()) {
    const LieModel model = builtin_model(name);
    CHECK(left_invariance_residual(model, 42u, 40) < 1e-10);
  }
}

TEST_CASE("a skewed frame entry breaks left invariance") {
  LieModel model = builtin_model("heisenberg");
  const CoordsPtr coords = model.geometry.coords;
  const ScalarExpr bump = ScalarExpr::parse("1 + x/4", coords);
  for (auto& comp : model.geometry.frame[2].components) {
    comp = comp * bump;
  }
  CHECK(left_invariance_residual(model, 42u, 40) > 1e-3);
}

TEST_CASE("frame-constant fields have constant norm") {
  for (const auto& name : builtin_model_names()) {
    const LieModel model = builtin_model(name);
    std::vector<double> coeffs(model.dim(), 0.0);
    coeffs[0] = 0.7;
    coeffs[1] = -0.3;
    const InvariantField X{coeffs};
    const auto points = sample_points(model.geometry, 29u, 15);
    CHECK(b_squared_spread(model, X, points) < 1e-12);
  }

  LieModel bent = builtin_model("heisenberg");
  const ScalarExpr bump = ScalarExpr::parse("1 + x/4", bent.geometry.coords);
  for (auto& comp : bent.geometry.frame[2].components) {
    comp = comp * bump;
  }
  const InvariantField center{{0.0, 0.0, 1.0}};
  const auto points = sample_points(bent.geometry, 29u, 15);
  CHECK(b_squared_spread(bent, center, points) > 1e-3);
}

TEST_CASE("frame-level and chart-level pair obstructions agree") {
  const LieModel model = builtin_model("heisenberg");
  const InvariantField X{{0.8, -0.4, 0.6}};
  const ScalarExpr f =
      ScalarExpr::parse("x - y/2 + x*y/4", model.geometry.coords);
  const std::vector<double> at{0.3, 0.2, -0.5};

  const DouglasFrameResiduals out = left_invariant_douglas(model, X, f, at);
  REQUIRE(out.frame.rows == 3);
  REQUIRE(out.chart.rows == 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(out.frame(i, j) ==
            doctest::Approx(out.chart(i, j)).epsilon(1e-9));
      CHECK(out.frame(i, j) ==
            doctest::Approx(-out.frame(j, i)).epsilon(1e-12));
    }
  }
}

TEST_CASE("pinned pair obstructions for the center field") {
  const LieModel model = builtin_model("heisenberg");
  const InvariantField center{{0.0, 0.0, 1.0}};
  const ScalarExpr zero = ScalarExpr::parse("0", model.geometry.coords);
  const std::vector<double> at{0.3, 0.2, -0.5};

  const DouglasFrameResiduals out =
      left_invariant_douglas(model, center, zero, at);
  CHECK(out.frame(0, 1) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(out.frame(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(out.frame(0, 2)) < 1e-12);
  CHECK(std::abs(out.frame(1, 2)) < 1e-12);
}

TEST_CASE("reduced pair systems vanish exactly on the known solutions") {
  const LieModel h = builtin_model("heisenberg");
  {
    const std::vector<double> coeffs{2.0, 1.0, 0.0};
    const ScalarExpr f = ScalarExpr::parse("x + y/2", h.geometry.coords);
    const std::vector<double> at{0.4, -0.3, 0.6};
    const auto res = pde_residuals(h, coeffs, f, at);
    REQUIRE(res.size() == 3);
    CHECK(res[0].name == "pair-12");
    CHECK(res[1].name == "pair-13");
    CHECK(res[2].name == "pair-23");
    for (const auto& r : res) CHECK(std::abs(r.value) < 1e-12);
  }
  {
    const std::vector<double> coeffs{0.0, 0.0, 1.0};
    const ScalarExpr f = ScalarExpr::parse("0", h.geometry.coords);
    const std::vector<double> at{0.4, -0.3, 0.6};
    const auto res = pde_residuals(h, coeffs, f, at);
    CHECK(res[0].value == doctest::Approx(-1.0));
    CHECK(std::abs(res[1].value) < 1e-12);
    CHECK(std::abs(res[2].value) < 1e-12);
  }

  const LieModel s2 = builtin_model("sol2");
  {
    const std::vector<double> coeffs{0.0, 1.0};
    const ScalarExpr f = ScalarExpr::parse("ln(y) + x", s2.geometry.coords);
    const std::vector<double> at{0.3, 1.6};
    const auto res = pde_residuals(s2, coeffs, f, at);
    REQUIRE(res.size() == 1);
    CHECK(res[0].name == "pair-12");
    CHECK(std::abs(res[0].value) < 1e-12);
  }

  const LieModel s3 = builtin_model("sol3");
  {
    const std::vector<double> coeffs{0.5, 0.0, 0.4};
    const ScalarExpr f = ScalarExpr::parse("ln(z) + 0.7", s3.geometry.coords);
    const std::vector<double> at{0.2, -0.4, 1.3};
    const auto res = pde_residuals(s3, coeffs, f, at);
    REQUIRE(res.size() == 3);
    for (const auto& r : res) CHECK(std::abs(r.value) < 1e-12);
  }
}
