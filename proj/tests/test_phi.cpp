#include <doctest.h>

#include <cmath>
#include <vector>

#include "finsler/error.hpp"
#include "finsler/phi.hpp"
#include "test_util.hpp"

using namespace finsler;

namespace {

// Derivatives of the built-in defining functions, written independently of
// the library's closed forms.
double randers_d2(double s, int k) {
  if (k == 0) return 1.0 + s;
  return k == 1 ? 1.0 : 0.0;
}

double matsumoto_d2(double s, int k) {
  const double t = 1.0 - s;
  if (k == 0) return 1.0 / t;
  if (k == 1) return 1.0 / (t * t);
  return 2.0 / (t * t * t);
}

double kropina_d2(double s, int k) {
  if (k == 0) return 1.0 / s;
  if (k == 1) return -1.0 / (s * s);
  return 2.0 / (s * s * s);
}

}  // namespace

TEST_CASE("built-in derivatives match their independent closed forms") {
  const double w = 0.49;
  const std::vector<double> svals{0.11, 0.37, 0.6};
  for (double s : svals) {
    const PhiDerivs r = PhiFamily::randers().derivs(w, s);
    CHECK(r.phi == doctest::Approx(randers_d2(s, 0)).epsilon(1e-14));
    CHECK(r.phi2 == doctest::Approx(randers_d2(s, 1)).epsilon(1e-14));
    CHECK(r.phi22 == doctest::Approx(randers_d2(s, 2)).epsilon(1e-14));

    const PhiDerivs m = PhiFamily::matsumoto().derivs(w, s);
    CHECK(m.phi == doctest::Approx(matsumoto_d2(s, 0)).epsilon(1e-13));
    CHECK(m.phi2 == doctest::Approx(matsumoto_d2(s, 1)).epsilon(1e-13));
    CHECK(m.phi22 == doctest::Approx(matsumoto_d2(s, 2)).epsilon(1e-13));

    const PhiDerivs k = PhiFamily::kropina().derivs(w, s);
    CHECK(k.phi == doctest::Approx(kropina_d2(s, 0)).epsilon(1e-13));
    CHECK(k.phi2 == doctest::Approx(kropina_d2(s, 1)).epsilon(1e-13));
    CHECK(k.phi22 == doctest::Approx(kropina_d2(s, 2)).epsilon(1e-13));
  }
}

TEST_CASE("custom families agree with the matching built-in") {
  const PhiFamily builtin = PhiFamily::matsumoto();
  const PhiFamily custom = PhiFamily::from_string("custom:1/(1 - s)", 1.0);
  const PhiFamily general =
      PhiFamily::from_string("custom-general:1/(1 - s) + 0*w", 1.0);

  const double w = 0.16;
  for (double s : {-0.3, 0.05, 0.35}) {
    const PhiDerivs a = builtin.derivs(w, s);
    const PhiDerivs b = custom.derivs(w, s);
    const PhiDerivs c = general.derivs(w, s);
    CHECK(b.phi == doctest::Approx(a.phi).epsilon(1e-12));
    CHECK(b.phi2 == doctest::Approx(a.phi2).epsilon(1e-12));
    CHECK(b.phi22 == doctest::Approx(a.phi22).epsilon(1e-12));
    CHECK(c.phi == doctest::Approx(a.phi).epsilon(1e-12));
    CHECK(c.phi2 == doctest::Approx(a.phi2).epsilon(1e-12));
    CHECK(c.phi22 == doctest::Approx(a.phi22).epsilon(1e-12));
  }
}

TEST_CASE("general families see the w argument") {
  const PhiFamily general =
      PhiFamily::from_string("custom-general:1 + s + w*s^2", 2.0);
  const double s = 0.3;
  const PhiDerivs at_w0 = general.derivs(0.0, s);
  const PhiDerivs at_w1 = general.derivs(1.0, s);
  CHECK(at_w0.phi == doctest::Approx(1.3).epsilon(1e-14));
  CHECK(at_w1.phi == doctest::Approx(1.3 + 0.09).epsilon(1e-14));
  CHECK(at_w1.phi22 == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("fundamental coefficients satisfy their defining identities") {
  const std::vector<PhiFamily> families{
      PhiFamily::randers(), PhiFamily::matsumoto(),
      PhiFamily::from_string("custom:1 + s/2 + s^2/8", 1.0)};
  const double w = 0.36;
  for (const PhiFamily& phi : families) {
    for (double s : {-0.25, 0.1, 0.45}) {
      const PhiDerivs d = phi.derivs(w, s);
      const FundamentalCoefficients co = phi.coefficients(w, s);
      CHECK(co.rho ==
            doctest::Approx(d.phi * (d.phi - s * d.phi2)).epsilon(1e-12));
      CHECK(co.rho0 ==
            doctest::Approx(d.phi * d.phi22 + d.phi2 * d.phi2).epsilon(1e-12));
      CHECK(co.rho1 == doctest::Approx((d.phi - s * d.phi2) * d.phi2 -
                                       s * d.phi * d.phi22)
                           .epsilon(1e-12));
      CHECK(co.dcoef ==
            doctest::Approx(d.phi22 / (d.phi - s * d.phi2)).epsilon(1e-12));
      CHECK(s * co.rho0 + co.rho1 ==
            doctest::Approx(d.phi * d.phi2).epsilon(1e-12));
    }
  }
}

TEST_CASE("riemannian family is constant one") {
  const PhiFamily phi = PhiFamily::riemannian();
  CHECK(phi.is_riemannian());
  const PhiDerivs d = phi.derivs(0.5, 0.2);
  CHECK(d.phi == 1.0);
  CHECK(d.phi2 == 0.0);
  CHECK(d.phi22 == 0.0);
  const FundamentalCoefficients co = phi.coefficients(0.5, 0.2);
  CHECK(co.rho == 1.0);
  CHECK(co.rho0 == 0.0);
  CHECK(co.rho1 == 0.0);
}

TEST_CASE("taylor evaluation agrees with the scalar route") {
  const PhiFamily phi = PhiFamily::matsumoto();
  const TaylorContextPtr ctx = TaylorContext::get(2, 2);
  const double w0 = 0.25;
  const double s0 = 0.3;
  const Taylor w = Taylor::variable(ctx, 0, w0);
  const Taylor s = Taylor::variable(ctx, 1, s0);
  const Taylor val = phi.value(w, s);

  const PhiDerivs d = phi.derivs(w0, s0);
  const std::vector<int> ds{0, 1};
  const std::vector<int> dss{0, 2};
  CHECK(val.value() == doctest::Approx(d.phi).epsilon(1e-13));
  CHECK(val.partial(ds) == doctest::Approx(d.phi2).epsilon(1e-13));
  CHECK(val.partial(dss) == doctest::Approx(d.phi22).epsilon(1e-13));
}

TEST_CASE("positivity is enforced at evaluation") {
  const PhiFamily phi = PhiFamily::from_string("custom:s", 2.0);
  CHECK_THROWS_AS(phi.value(0.25, -0.5), DomainError);
  CHECK(phi.value(0.25, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("kropina evaluation is restricted to its cone") {
  const PhiFamily phi = PhiFamily::kropina();
  CHECK(phi.is_kropina());
  CHECK_THROWS_AS(phi.value(0.25, -0.1), DomainError);
  CHECK_THROWS_AS(phi.value(0.25, 0.0001), DomainError);
  CHECK(phi.value(0.25, 0.3) == doctest::Approx(1.0 / 0.3).epsilon(1e-14));
}

TEST_CASE("from_string accepts the documented spellings only") {
  CHECK(PhiFamily::from_string("randers").kind() == PhiKind::kRanders);
  CHECK(PhiFamily::from_string("kropina").kind() == PhiKind::kKropina);
  CHECK(PhiFamily::from_string("matsumoto").kind() == PhiKind::kMatsumoto);
  CHECK(PhiFamily::from_string("riemannian").is_riemannian());
  CHECK(PhiFamily::from_string("custom:1 + s/4", 4.0).kind() ==
        PhiKind::kCustomClassic);
  CHECK(PhiFamily::from_string("custom-general:1 + w + s", 1.0).kind() ==
        PhiKind::kCustomGeneral);
  CHECK_THROWS_AS(PhiFamily::from_string("fancy"), Error);
  CHECK_THROWS_AS(PhiFamily::from_string("custom:1 + q"), Error);
}

TEST_CASE("randers admissibility holds on the whole open unit band") {
  for (double b : {0.1, 0.5, 0.9, 0.99}) {
    const AdmissibilityReport rep =
        phi_admissible(PhiFamily::randers(), b, 3);
    CHECK(rep.admissible);
    CHECK(rep.min_phi > 0.0);
    CHECK(rep.min_margin_rank > 0.0);
    CHECK(rep.min_margin_convex > 0.0);
  }
  CHECK_THROWS_AS(phi_admissible(PhiFamily::randers(), 1.0, 3), Error);
}

TEST_CASE("matsumoto admissibility boundary sits at one half") {
  const AdmissibilityReport ok =
      phi_admissible(PhiFamily::matsumoto(), 0.4, 3);
  CHECK(ok.admissible);

  const AdmissibilityReport bad =
      phi_admissible(PhiFamily::matsumoto(), 0.6, 3);
  CHECK_FALSE(bad.admissible);
  CHECK(bad.min_margin_rank < 0.0);
}

TEST_CASE("on symmetric bands the convexity margin binds first") {
  // At s = ±b the two margins coincide and an interior minimum of φ − sφ₂
  // forces φ₂₂ = 0 there, so a positive convexity margin implies a positive
  // rank margin. The grid evaluation must respect that implication.
  const std::vector<PhiFamily> families{
      PhiFamily::randers(), PhiFamily::matsumoto(),
      PhiFamily::from_string("custom:1 + s/2 + s^2/4 - s^3/10", 1.0)};
  for (const PhiFamily& phi : families) {
    for (double b : {0.2, 0.45, 0.7, 0.95}) {
      const AdmissibilityReport rep = phi_admissible(phi, b, 3);
      if (rep.min_phi > 0.0 && rep.min_margin_convex > 0.0) {
        CHECK(rep.min_margin_rank > 0.0);
      }
      CHECK(rep.dim == 3);
      CHECK(rep.grid >= 2);
    }
  }

  // The same margins decide both dimensions; only the rank requirement is
  // waived on surfaces.
  const AdmissibilityReport d2 = phi_admissible(PhiFamily::matsumoto(), 0.6, 2);
  const AdmissibilityReport d3 = phi_admissible(PhiFamily::matsumoto(), 0.6, 3);
  CHECK(d2.min_margin_rank == doctest::Approx(d3.min_margin_rank));
  CHECK(d2.min_margin_convex == doctest::Approx(d3.min_margin_convex));
  CHECK(d2.admissible == (d2.min_phi > 0.0 && d2.min_margin_convex > 0.0));
}

TEST_CASE("kropina band respects its cone") {
  const AdmissibilityReport rep =
      phi_admissible(PhiFamily::kropina(), 0.8, 3);
  CHECK(rep.admissible);
  CHECK(rep.s_lo == doctest::Approx(0.05));
  CHECK(rep.s_hi == doctest::Approx(0.8));
  CHECK_THROWS_AS(phi_admissible(PhiFamily::kropina(), 0.0, 3), Error);
}

TEST_CASE("admissibility rejects bad arguments") {
  CHECK_THROWS_AS(phi_admissible(PhiFamily::randers(), -0.1, 3), Error);
  CHECK_THROWS_AS(phi_admissible(PhiFamily::randers(), 0.5, 1), Error);
}
