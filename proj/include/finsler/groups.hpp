#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finsler/geometry.hpp"

namespace finsler {

enum class BuiltinGroup {
  kHeisenberg,  // nilpotent, dim 3
  kSol2,        // solvable, dim 2: the hyperbolic plane as a group
  kSol3,        // solvable, dim 3: hyperbolic 3-space as a group
};

// A Lie group chart: geometry with a declared left-invariant frame, the
// frame's structure constants, and (when available) the group law.
struct LieModel {
  GeometryModel geometry;
  std::vector<std::string> frame_names;
  // [e_i, e_j] = Σ_k coeffs[k]·e_k for i < j.
  struct Bracket {
    int i = 0;
    int j = 0;
    std::vector<double> coeffs;
  };
  std::vector<Bracket> brackets;
  std::optional<BuiltinGroup> builtin;
  Vec identity;

  int dim() const { return geometry.dim(); }
};

// A left-invariant field written in the declared frame with constant
// coefficients.
struct InvariantField {
  std::vector<double> coeffs;

  VectorFieldExpr chart_field(const GeometryModel& geometry) const;
};

LieModel builtin_model(const std::string& name);
std::vector<std::string> builtin_model_names();

// [e_i, e_j] evaluated at x from the chart expressions.
Vec lie_bracket(const LieModel& model, int i, int j,
                std::span<const double> x);

// Max over points and declared pairs of the chart-component gap between the
// computed bracket and the declared combination of frame fields.
double structure_constant_residual(const LieModel& model,
                                   std::span<const std::vector<double>> points);

// Max over random (a, p, u, v) of the defects of left invariance:
// |g_{ap}(dL_a u, dL_a v) − g_p(u, v)| and |dL_a·e_i(p) − e_i(a·p)|.
// Needs the group law.
double left_invariance_residual(const LieModel& model, std::uint64_t seed,
                                int samples);

// Max over points of |g(X, X) − g(X, X)|_base-point| for a field constant in
// the frame; zero when the frame is left-invariant and orthonormal.
double b_squared_spread(const LieModel& model, const InvariantField& X,
                        std::span<const std::vector<double>> points);

// Frame-level and chart-level Douglas obstructions for the pair
// (g, X) rescaled by e^f, one entry per frame pair (i, j):
//   frame: g(X, [e_j, e_i]) + (e_i f)·g(X, e_j) − (e_j f)·g(X, e_i)
//   chart: dβ(e_i, e_j) + (e_i f)·g(X, e_j) − (e_j f)·g(X, e_i).
// The two agree identically; both are exposed so that tests can confirm it.
struct DouglasFrameResiduals {
  Mat frame;
  Mat chart;
};
DouglasFrameResiduals left_invariant_douglas(const LieModel& model,
                                             const InvariantField& X,
                                             const ScalarExpr& f,
                                             std::span<const double> x);

struct NamedResidual {
  std::string name;
  double value = 0.0;
};

// The Douglas system for a built-in group, one scalar residual per frame
// pair, with the field written as frame coefficients. The expressions are
// the chart-reduced forms of the frame obstructions above.
std::vector<NamedResidual> pde_residuals(const LieModel& model,
                                         std::span<const double> coeffs,
                                         const ScalarExpr& f,
                                         std::span<const double> x);

}  // namespace finsler
