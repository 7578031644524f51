#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "finsler/expr.hpp"
#include "finsler/geometry.hpp"
#include "finsler/groups.hpp"
#include "finsler/phi.hpp"

namespace finsler {

// Per-check tolerance bundle; a model file may override any entry.
struct Tolerances {
  double algebraic = 1e-10;
  double oracle = 1e-8;
  double pipeline = 1e-6;
  double berwald = 1e-9;
  double douglas = 1e-9;
  double parallel = 1e-10;
  double conformal = 1e-12;
  double curvature = 1e-9;
  double invariance = 1e-9;
};

// A fully described problem setup: geometry (with optional frame, group law
// and brackets), the defining field, the phi family, an optional conformal
// exponent, and reproducibility settings.
struct ModelFile {
  LieModel model;
  std::optional<VectorFieldExpr> field;      // chart components
  std::optional<std::vector<double>> frame_coefficients;
  PhiFamily phi = PhiFamily::randers();
  std::optional<ScalarExpr> factor;
  std::uint64_t seed = 42;
  int sample_count = 50;
  Tolerances tolerances;
  std::string source;
  std::string digest;

  int dim() const { return model.dim(); }
};

// Accepts "builtin:heisenberg" / "builtin:sol2" / "builtin:sol3" or a path
// to a model file.
ModelFile load_model(const std::string& spec);

ModelFile parse_model_text(const std::string& text, const std::string& source);

// Canonical serialized form; parse_model_text(serialize_model(m)) reproduces
// the model, and serializing again gives identical bytes.
std::string serialize_model(const ModelFile& mf);

// The canonical file content for a built-in model, as written by emit-model.
std::string builtin_model_text(const std::string& name);

}  // namespace finsler
