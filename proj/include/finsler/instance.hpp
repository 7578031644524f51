#pragma once

#include <optional>
#include <span>
#include <vector>

#include "finsler/conformal.hpp"
#include "finsler/geometry.hpp"
#include "finsler/linalg.hpp"
#include "finsler/phi.hpp"

namespace finsler {

// Spray coefficients G^i as truncated jets in the 2n variables (x, y):
// variables 0..n−1 are chart coordinates, n..2n−1 are fiber coordinates.
struct SprayJets {
  int n = 0;
  int order = 0;  // validity order of each entry
  std::vector<Taylor> G;
};

struct ClosedFormFlag {
  double value = 0.0;
  // Set when (y, u) is g-orthonormal: the reduced expression
  // K^g / (φ²·(1 + g(X,u)²·D)).
  std::optional<double> orthonormal_value;
  double riemannian_curvature = 0.0;  // K^g of the flag plane
};

// A Finsler metric F = α·φ(b², β/α) assembled from a Riemannian model, a
// vector field, a φ family and an optional conformal rescaling e^f applied
// as g → e^{2f}g, X → e^{−f}X (so that F → e^f·F).
class FinslerInstance {
 public:
  FinslerInstance(GeometryModel geometry, VectorFieldExpr X, PhiFamily phi,
                  std::optional<ScalarExpr> f = std::nullopt);

  int dim() const { return geometry_.dim(); }
  const GeometryModel& base_geometry() const { return base_geometry_; }
  const VectorFieldExpr& base_field() const { return base_field_; }
  const GeometryModel& geometry() const { return geometry_; }
  const VectorFieldExpr& field() const { return field_; }
  const PhiFamily& phi() const { return phi_; }
  const std::optional<ScalarExpr>& conformal_factor() const { return factor_; }
  bool rescaled() const { return factor_.has_value(); }

  double b_squared(std::span<const double> x) const;
  double alpha(std::span<const double> x, std::span<const double> y) const;
  double beta(std::span<const double> x, std::span<const double> y) const;
  double eval(std::span<const double> x, std::span<const double> y) const;

  // g^F via the rank-two correction of the Riemannian metric
  // (ρ, ρ₀, ρ₁ route).
  Mat fundamental_tensor_formula(std::span<const double> x,
                                 std::span<const double> y) const;
  // g^F as the fiber Hessian ½·∂²F²/∂y∂y, computed with jets.
  Mat fundamental_tensor_hessian(std::span<const double> x,
                                 std::span<const double> y) const;

  // Geodesic spray through the fundamental tensor:
  // G^i = ¼ g^{F,il}([F²]_{x^k y^l} y^k − [F²]_{x^l}).
  SprayJets spray(std::span<const double> x, std::span<const double> y,
                  int order) const;
  Vec spray_values(std::span<const double> x, std::span<const double> y) const;

  // Riemann curvature of the spray,
  // R^i_k = 2∂_{x^k}G^i − y^j ∂²G^i/∂x^j∂y^k + 2G^j ∂²G^i/∂y^j∂y^k
  //         − ∂G^i/∂y^j · ∂G^j/∂y^k.
  Mat riemann_curvature(std::span<const double> x,
                        std::span<const double> y) const;

  // Flag curvature from the spray curvature and the fiber Hessian.
  double flag_curvature(std::span<const double> x, std::span<const double> y,
                        std::span<const double> u) const;

  // Flag curvature through the Riemannian sectional curvature of the flag
  // plane. Requires the (rescaled) field to be parallel; refuses with the
  // measured residual otherwise.
  ClosedFormFlag flag_curvature_closed_form(std::span<const double> x,
                                            std::span<const double> y,
                                            std::span<const double> u) const;

  // Max fiber third derivative |∂³G^i/∂y^j∂y^k∂y^l|; zero iff the spray is
  // quadratic in y at this point.
  double berwald_witness(std::span<const double> x,
                         std::span<const double> y) const;

 private:
  void check_field_norm(std::span<const double> x) const;
  Taylor f_squared_jet(std::span<const Taylor> xt,
                       std::span<const Taylor> yt) const;

  GeometryModel base_geometry_;
  VectorFieldExpr base_field_;
  PhiFamily phi_;
  std::optional<ScalarExpr> factor_;
  GeometryModel geometry_;
  VectorFieldExpr field_;
};

}  // namespace finsler
