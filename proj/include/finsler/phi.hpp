#pragma once

#include <optional>
#include <string>

#include "finsler/expr.hpp"

namespace finsler {

enum class PhiKind {
  kRanders,    // φ(s) = 1 + s
  kKropina,    // φ(s) = 1/s, conic: only β > 0
  kMatsumoto,  // φ(s) = 1/(1 − s)
  kCustomClassic,
  kCustomGeneral,  // φ(w, s) with w = b²
};

// ρ, ρ₀, ρ₁ from the fundamental-tensor expansion, plus D = φ₂₂/(φ − sφ₂).
struct FundamentalCoefficients {
  double rho;
  double rho0;
  double rho1;
  double dcoef;
};

struct PhiDerivs {
  double phi;
  double phi2;   // ∂φ/∂s
  double phi22;  // ∂²φ/∂s²
};

// The defining function of an (α,β)- or general (α,β)-metric together with
// its validity radius b0. Built-ins use closed forms; custom families carry
// an expression in (w, s), where w = b² (classic customs simply ignore w).
class PhiFamily {
 public:
  static PhiFamily randers();
  static PhiFamily kropina();
  static PhiFamily matsumoto();
  static PhiFamily riemannian();  // φ ≡ 1, reduces F to α
  static PhiFamily custom(const ScalarExpr& phi_of_s, double b0);
  static PhiFamily custom_general(const ScalarExpr& phi_of_w_s, double b0);

  // Parses "randers" | "kropina" | "matsumoto" | "riemannian" |
  // "custom:<expr in s>" | "custom-general:<expr in w,s>".
  static PhiFamily from_string(const std::string& text,
                               double custom_b0 = 1.0);

  PhiKind kind() const { return kind_; }
  double b0() const { return b0_; }
  bool is_general() const { return kind_ == PhiKind::kCustomGeneral; }
  bool is_kropina() const { return kind_ == PhiKind::kKropina; }
  bool is_riemannian() const;
  std::string describe() const;
  const std::optional<ScalarExpr>& expression() const { return expr_; }

  // Rejects evaluation outside the family's (w, s) domain: Kropina is
  // restricted to the cone s ≥ 0.02·b.
  void check_domain(double w, double s) const;

  double value(double w, double s) const;
  Taylor value(const Taylor& w, const Taylor& s) const;

  PhiDerivs derivs(double w, double s) const;
  FundamentalCoefficients coefficients(double w, double s) const;

 private:
  PhiFamily(PhiKind kind, double b0, std::optional<ScalarExpr> expr)
      : kind_(kind), b0_(b0), expr_(std::move(expr)) {}

  PhiKind kind_;
  double b0_;
  std::optional<ScalarExpr> expr_;
};

struct AdmissibilityReport {
  bool admissible = false;
  double min_phi = 0.0;
  // min over the grid of φ − sφ₂ (binding for dim ≥ 3).
  double min_margin_rank = 0.0;
  // min over the grid of φ − sφ₂ + (b² − s²)φ₂₂ (binding in all dims).
  double min_margin_convex = 0.0;
  double s_lo = 0.0;
  double s_hi = 0.0;
  int grid = 0;
  int dim = 0;
};

// Grid evaluation of the two positivity conditions on s ∈ [−b, b]
// (Kropina: on [min(0.05, b/2), b]).
AdmissibilityReport phi_admissible(const PhiFamily& phi, double b, int dim,
                                   int grid = 201);

}  // namespace finsler
