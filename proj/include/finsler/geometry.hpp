#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "finsler/expr.hpp"
#include "finsler/linalg.hpp"
#include "finsler/sampling.hpp"

namespace finsler {

// A vector field given by chart-coordinate component expressions.
struct VectorFieldExpr {
  std::vector<ScalarExpr> components;

  int dim() const { return static_cast<int>(components.size()); }

  static VectorFieldExpr zero(const CoordsPtr& coords);
  static VectorFieldExpr constant(const CoordsPtr& coords,
                                  std::span<const double> values);
  static VectorFieldExpr axis(const CoordsPtr& coords, int index);

  Vec operator()(std::span<const double> x) const;
};

// One chart: coordinates, metric entry expressions, optional frame fields,
// optional group multiplication, optional open-domain constraints, and a
// sampling box for seeded point generation.
struct GeometryModel {
  std::string name;
  CoordsPtr coords;
  std::vector<ScalarExpr> metric;  // dim*dim, row-major, symmetric
  std::vector<VectorFieldExpr> frame;
  bool frame_orthonormal = false;
  std::vector<ScalarExpr> multiplication;  // dim exprs over product_coords
  CoordsPtr product_coords;                // left factor primed, then right
  std::vector<ScalarExpr> domain;          // each must evaluate > 0
  std::vector<std::pair<double, double>> box;

  int dim() const { return static_cast<int>(coords->size()); }
  const ScalarExpr& metric_entry(int i, int j) const {
    return metric[static_cast<size_t>(i) * dim() + j];
  }
  bool has_frame() const { return !frame.empty(); }
  bool has_multiplication() const { return !multiplication.empty(); }
  bool in_domain(std::span<const double> x, double margin = 0.0) const;

  static GeometryModel from_metric(std::string name,
                                   std::vector<std::string> coord_names,
                                   const std::vector<std::string>& entries);
  static GeometryModel euclidean(int n);
};

// Expression-level determinant and inverse for small symbolic matrices
// (used to derive metric entries from an orthonormal frame).
ScalarExpr expr_det(const std::vector<ScalarExpr>& m, int n);
std::vector<ScalarExpr> expr_inverse(const std::vector<ScalarExpr>& m, int n);

// Metric entries from a frame declared orthonormal: inverse of E^T E where
// row i of E holds the chart components of frame field i.
std::vector<ScalarExpr> metric_from_orthonormal_frame(
    const std::vector<VectorFieldExpr>& frame);

// Metric entry values and partials up to `order` at a point.
struct MetricJets {
  int n = 0;
  std::vector<Jet> entries;  // n*n

  double g(int i, int j) const;
  double dg(int i, int j, int k) const;        // d_k g_ij
  double d2g(int i, int j, int k, int l) const;  // d_k d_l g_ij
  Mat values() const;
};

MetricJets metric_jets(const GeometryModel& model, std::span<const double> x,
                       int order);

// Metric value at x; throws DomainError when not positive definite there.
Mat metric_at(const GeometryModel& model, std::span<const double> x);
Mat metric_inverse_at(const GeometryModel& model, std::span<const double> x);

// Christoffel symbols of the Levi-Civita connection, flattened with
// gamma[(i*n + j)*n + k] = Γ^i_{jk}.
std::vector<double> christoffel(const GeometryModel& model,
                                std::span<const double> x);

// Γ^i_{jk} and their first partials d_m Γ^i_{jk}; the derivative array is
// indexed ((i*n + j)*n + k)*n + m.
void christoffel_with_derivatives(const GeometryModel& model,
                                  std::span<const double> x,
                                  std::vector<double>& gamma,
                                  std::vector<double>& dgamma);

// (∇_Y X)^i = Y^j (∂_j X^i + Γ^i_{jk} X^k) at x.
Vec covariant_derivative(const GeometryModel& model, const VectorFieldExpr& Y,
                         const VectorFieldExpr& X, std::span<const double> x);

// Curvature tensor R^i_{jkl} (component i of R(∂_k, ∂_l) ∂_j), flattened
// ((i*n + j)*n + k)*n + l, for R(u,v)w = ∇_u∇_v w − ∇_v∇_u w − ∇_{[u,v]} w.
std::vector<double> curvature_tensor(const GeometryModel& model,
                                     std::span<const double> x);

// K(span{u,v}) = g(R(u,v)v, u) / (g(u,u)g(v,v) − g(u,v)^2).
double sectional_curvature(const GeometryModel& model,
                           std::span<const double> x, const Vec& u,
                           const Vec& v);

// (grad f)^i = g^{ij} ∂_j f.
Vec gradient(const GeometryModel& model, const ScalarExpr& f,
             std::span<const double> x);

// Riemannian spray G^i = ½ Γ^i_{jk} y^j y^k.
Vec spray_alpha(const GeometryModel& model, std::span<const double> x,
                std::span<const double> y);

// Covariant derivative of the 1-form b = g(X, ·): b_{i;j} = ∂_j b_i − Γ^k_{ij} b_k,
// returned as an n×n matrix with rows i, columns j.
Mat one_form_covariant_derivative(const GeometryModel& model,
                                  const VectorFieldExpr& X,
                                  std::span<const double> x);

// max over samples and index pairs of |b_{i;j}|; zero iff b is parallel
// on the sampled set.
double parallel_residual(const GeometryModel& model, const VectorFieldExpr& X,
                         std::span<const std::vector<double>> points);

// Lowered field b_i = g_ij X^j at x.
Vec lowered_field(const GeometryModel& model, const VectorFieldExpr& X,
                  std::span<const double> x);

// Directional derivative (Yf)(x) = Y^i ∂_i f.
double field_apply(const ScalarExpr& f, const VectorFieldExpr& Y,
                   std::span<const double> x);

// [A,B]^k = A^l ∂_l B^k − B^l ∂_l A^k at x.
Vec lie_bracket_value(const VectorFieldExpr& A, const VectorFieldExpr& B,
                      std::span<const double> x);

// Chart components of Σ_i c_i(x)·e_i(x), built at expression level.
VectorFieldExpr chart_field_from_frame(const GeometryModel& model,
                                       std::span<const ScalarExpr> coeffs);
VectorFieldExpr chart_field_from_frame(const GeometryModel& model,
                                       std::span<const double> coeffs);

// Frame component matrix at x: row i holds the components of frame field i.
Mat frame_matrix_at(const GeometryModel& model, std::span<const double> x);

// Group multiplication value μ(a, p) and its Jacobian in the right factor.
Vec multiply(const GeometryModel& model, std::span<const double> a,
             std::span<const double> p);
Mat multiplication_jacobian(const GeometryModel& model,
                            std::span<const double> a,
                            std::span<const double> p);

// Deterministic in-domain sample points from the model's box.
std::vector<std::vector<double>> sample_points(const GeometryModel& model,
                                               std::uint64_t seed, int count);

}  // namespace finsler
