#include "finsler/phi.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "finsler/error.hpp"

namespace finsler {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kKropinaConeFraction = 0.02;

CoordsPtr phi_coords() {
  static const CoordsPtr coords = make_coords({"w", "s"});
  return coords;
}

template <typename T>
T eval_builtin(PhiKind kind, const T& s) {
  switch (kind) {
    case PhiKind::kRanders:
      return make_constant_like(s, 1.0) + s;
    case PhiKind::kKropina:
      return make_constant_like(s, 1.0) / s;
    case PhiKind::kMatsumoto:
      return make_constant_like(s, 1.0) / (make_constant_like(s, 1.0) - s);
    default:
      throw Error("eval_builtin called on a custom phi family");
  }
}

}  // namespace

PhiFamily PhiFamily::randers() {
  return PhiFamily(PhiKind::kRanders, 1.0, std::nullopt);
}

PhiFamily PhiFamily::kropina() {
  return PhiFamily(PhiKind::kKropina, kInf, std::nullopt);
}

PhiFamily PhiFamily::matsumoto() {
  return PhiFamily(PhiKind::kMatsumoto, 1.0, std::nullopt);
}

PhiFamily PhiFamily::riemannian() {
  return custom(ScalarExpr::number(1.0, phi_coords()), kInf);
}

PhiFamily PhiFamily::custom(const ScalarExpr& phi_of_s, double b0) {
  if (!(b0 > 0.0)) throw PreconditionError("phi validity radius b0 must be positive");
  ScalarExpr expr = ScalarExpr::parse(phi_of_s.str(), phi_coords());
  return PhiFamily(PhiKind::kCustomClassic, b0, std::move(expr));
}

PhiFamily PhiFamily::custom_general(const ScalarExpr& phi_of_w_s, double b0) {
  if (!(b0 > 0.0)) throw PreconditionError("phi validity radius b0 must be positive");
  ScalarExpr expr = ScalarExpr::parse(phi_of_w_s.str(), phi_coords());
  return PhiFamily(PhiKind::kCustomGeneral, b0, std::move(expr));
}

PhiFamily PhiFamily::from_string(const std::string& text, double custom_b0) {
  if (text == "randers") return randers();
  if (text == "kropina") return kropina();
  if (text == "matsumoto") return matsumoto();
  if (text == "riemannian") return riemannian();
  const std::string classic_prefix = "custom:";
  const std::string general_prefix = "custom-general:";
  if (text.rfind(classic_prefix, 0) == 0) {
    return custom(ScalarExpr::parse(text.substr(classic_prefix.size()), phi_coords()),
                  custom_b0);
  }
  if (text.rfind(general_prefix, 0) == 0) {
    return custom_general(
        ScalarExpr::parse(text.substr(general_prefix.size()), phi_coords()),
        custom_b0);
  }
  throw Error("unknown phi family '" + text + "'");
}

bool PhiFamily::is_riemannian() const {
  return expr_.has_value() && expr_->is_literal(1.0);
}

std::string PhiFamily::describe() const {
  switch (kind_) {
    case PhiKind::kRanders:
      return "randers";
    case PhiKind::kKropina:
      return "kropina";
    case PhiKind::kMatsumoto:
      return "matsumoto";
    case PhiKind::kCustomClassic:
      return "custom:" + expr_->str();
    case PhiKind::kCustomGeneral:
      return "custom-general:" + expr_->str();
  }
  return "unknown";
}

void PhiFamily::check_domain(double w, double s) const {
  if (!(w >= 0.0)) {
    throw DomainError("negative squared norm passed to a phi family");
  }
  if (kind_ == PhiKind::kKropina) {
    const double b = std::sqrt(w);
    if (!(s >= kKropinaConeFraction * b) || s <= 0.0) {
      std::ostringstream msg;
      msg << "kropina metric is only defined on the forward cone: "
          << "got s = " << s << " with b = " << b;
      throw DomainError(msg.str());
    }
  }
}

double PhiFamily::value(double w, double s) const {
  check_domain(w, s);
  double v = 0.0;
  switch (kind_) {
    case PhiKind::kRanders:
    case PhiKind::kKropina:
    case PhiKind::kMatsumoto:
      v = eval_builtin(kind_, s);
      break;
    case PhiKind::kCustomClassic:
    case PhiKind::kCustomGeneral: {
      const std::array<double, 2> args = {w, s};
      v = (*expr_)(args);
      break;
    }
  }
  if (!(v > 0.0)) {
    std::ostringstream msg;
    msg << "phi is not positive at (w, s) = (" << w << ", " << s << ")";
    throw DomainError(msg.str());
  }
  return v;
}

Taylor PhiFamily::value(const Taylor& w, const Taylor& s) const {
  check_domain(w.value(), s.value());
  Taylor v = s;
  switch (kind_) {
    case PhiKind::kRanders:
    case PhiKind::kKropina:
    case PhiKind::kMatsumoto:
      v = eval_builtin(kind_, s);
      break;
    case PhiKind::kCustomClassic:
    case PhiKind::kCustomGeneral: {
      const std::array<Taylor, 2> args = {w, s};
      v = (*expr_)(args);
      break;
    }
  }
  if (!(v.value() > 0.0)) {
    std::ostringstream msg;
    msg << "phi is not positive at (w, s) = (" << w.value() << ", "
        << s.value() << ")";
    throw DomainError(msg.str());
  }
  return v;
}

PhiDerivs PhiFamily::derivs(double w, double s) const {
  check_domain(w, s);
  PhiDerivs d{};
  switch (kind_) {
    case PhiKind::kRanders:
      d = {1.0 + s, 1.0, 0.0};
      break;
    case PhiKind::kKropina:
      d = {1.0 / s, -1.0 / (s * s), 2.0 / (s * s * s)};
      break;
    case PhiKind::kMatsumoto: {
      const double r = 1.0 - s;
      if (std::abs(r) < 1e-14) {
        throw DomainError("matsumoto metric has a pole at s = 1");
      }
      d = {1.0 / r, 1.0 / (r * r), 2.0 / (r * r * r)};
      break;
    }
    case PhiKind::kCustomClassic:
    case PhiKind::kCustomGeneral: {
      const std::array<double, 2> point = {w, s};
      Jet jet = expr_->jet(point, 2);
      const std::array<int, 2> ds1 = {0, 1};
      const std::array<int, 2> ds2 = {0, 2};
      d = {jet.value(), jet.partial(ds1), jet.partial(ds2)};
      break;
    }
  }
  if (!(d.phi > 0.0)) {
    std::ostringstream msg;
    msg << "phi is not positive at (w, s) = (" << w << ", " << s << ")";
    throw DomainError(msg.str());
  }
  return d;
}

FundamentalCoefficients PhiFamily::coefficients(double w, double s) const {
  const PhiDerivs d = derivs(w, s);
  const double rank = d.phi - s * d.phi2;
  if (std::abs(rank) < 1e-14) {
    throw DomainError("degenerate phi family: phi - s*phi' vanishes");
  }
  FundamentalCoefficients c{};
  c.rho = d.phi * rank;
  c.rho0 = d.phi * d.phi22 + d.phi2 * d.phi2;
  c.rho1 = rank * d.phi2 - s * d.phi * d.phi22;
  c.dcoef = d.phi22 / rank;
  return c;
}

AdmissibilityReport phi_admissible(const PhiFamily& phi, double b, int dim,
                                   int grid) {
  if (!(b >= 0.0)) throw PreconditionError("admissibility check needs b >= 0");
  if (dim < 2) throw PreconditionError("admissibility check needs dim >= 2");
  if (!(b < phi.b0())) {
    std::ostringstream msg;
    msg << "field norm b = " << b << " is not below the phi validity radius b0 = "
        << phi.b0();
    throw PreconditionError(msg.str());
  }
  if (grid < 2) grid = 2;

  AdmissibilityReport rep{};
  rep.grid = grid;
  rep.dim = dim;
  if (phi.is_kropina()) {
    if (!(b > 0.0)) {
      throw PreconditionError("kropina admissibility needs a nonzero field");
    }
    rep.s_lo = std::min(0.05, 0.5 * b);
    rep.s_hi = b;
  } else {
    rep.s_lo = -b;
    rep.s_hi = b;
  }

  const double w = b * b;
  rep.min_phi = kInf;
  rep.min_margin_rank = kInf;
  rep.min_margin_convex = kInf;
  for (int k = 0; k < grid; ++k) {
    const double t = static_cast<double>(k) / (grid - 1);
    const double s = rep.s_lo + t * (rep.s_hi - rep.s_lo);
    PhiDerivs d{};
    try {
      d = phi.derivs(w, s);
    } catch (const DomainError&) {
      rep.min_phi = -kInf;
      rep.min_margin_rank = -kInf;
      rep.min_margin_convex = -kInf;
      break;
    }
    const double rank = d.phi - s * d.phi2;
    const double convex = rank + (w - s * s) * d.phi22;
    rep.min_phi = std::min(rep.min_phi, d.phi);
    rep.min_margin_rank = std::min(rep.min_margin_rank, rank);
    rep.min_margin_convex = std::min(rep.min_margin_convex, convex);
  }

  rep.admissible = rep.min_phi > 0.0 && rep.min_margin_convex > 0.0 &&
                   (dim < 3 || rep.min_margin_rank > 0.0);
  return rep;
}

}  // namespace finsler
