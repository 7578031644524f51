#pragma once

#include <span>
#include <vector>

#include "finsler/geometry.hpp"

namespace finsler {

// A Riemannian metric g with a vector field X, together with the rescaled
// data g̃ = e^{2f}·g and X̃ = e^{−f}·X. The rescaling keeps the g̃-norm of X̃
// equal to the g-norm of X.
struct ConformalPair {
  GeometryModel base;
  VectorFieldExpr base_field;
  ScalarExpr factor;  // f, over the base coordinates
  GeometryModel transformed;
  VectorFieldExpr transformed_field;
};

ConformalPair conformal_transform(const GeometryModel& model,
                                  const VectorFieldExpr& X,
                                  const ScalarExpr& f);

// Levi-Civita connection of g̃ expressed through base data:
// ∇̃_Y W = ∇_Y W + (Yf)·W + (Wf)·Y − g(W, Y)·∇f.
Vec conformal_connection(const ConformalPair& pair, const VectorFieldExpr& Y,
                         const VectorFieldExpr& W, std::span<const double> x);

// Max over the sample points and basis directions Y of the g-norm of
//   ∇_Y X − g(X, Y)·∇f + (Xf)·Y,
// which vanishes exactly when X̃ is parallel for g̃. The basis is the model
// frame when one is declared and the coordinate axes otherwise.
double berwald_residual(const ConformalPair& pair,
                        std::span<const std::vector<double>> points);

// Signed value of dβ(Y, Z) + (Yf)·g(X, Z) − (Zf)·g(X, Y) at x, with
// dβ(Y, Z) = Y·β(Z) − Z·β(Y) − β([Y, Z]) and β = g(X, ·).
double douglas_residual(const ConformalPair& pair, const VectorFieldExpr& Y,
                        const VectorFieldExpr& Z, std::span<const double> x);

// Max over points and index pairs of |∂_i b_j − ∂_j b_i| for b = g(X, ·).
double beta_closedness_residual(const GeometryModel& model,
                                const VectorFieldExpr& X,
                                std::span<const std::vector<double>> points);

// Max over points and index pairs of |f_i·b_j − f_j·b_i|, the obstruction to
// ∇f being proportional to b. Requires β closed and reports the closedness
// residual otherwise.
double gradient_proportionality(const ConformalPair& pair,
                                std::span<const std::vector<double>> points);

}  // namespace finsler
