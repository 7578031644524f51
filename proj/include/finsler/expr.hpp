#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "finsler/taylor.hpp"

namespace finsler {

enum class NodeKind { kNumber, kVar, kNeg, kAdd, kSub, kMul, kDiv, kPow, kCall };
enum class CallFunc { kExp, kLn, kSqrt, kSin, kCos };

struct ExprNode {
  NodeKind kind;
  double number = 0.0;               // kNumber
  int var = -1;                      // kVar
  std::string name;                  // kVar
  CallFunc func = CallFunc::kExp;    // kCall
  long long pow_num = 1;             // kPow exponent numerator
  long long pow_den = 1;             // kPow exponent denominator (>= 1)
  std::shared_ptr<const ExprNode> a;
  std::shared_ptr<const ExprNode> b;
};

using CoordsPtr = std::shared_ptr<const std::vector<std::string>>;

// The value and partial derivatives of a scalar expression at a point,
// up to a total order. Wraps the underlying truncated expansion.
class Jet {
 public:
  Jet(std::vector<double> point, Taylor taylor)
      : point_(std::move(point)), taylor_(std::move(taylor)) {}

  int order() const { return taylor_.order(); }
  int dim() const { return static_cast<int>(point_.size()); }
  const std::vector<double>& point() const { return point_; }
  const TaylorContextPtr& context() const { return taylor_.context(); }

  double value() const { return taylor_.value(); }
  // True mixed partial for a multi-index (one entry per coordinate).
  double partial(std::span<const int> index) const {
    return taylor_.partial(index);
  }

 private:
  std::vector<double> point_;
  Taylor taylor_;
};

// An immutable scalar expression over a named coordinate list. Values are
// shared-pointer handles; copying is cheap.
class ScalarExpr {
 public:
  ScalarExpr() = default;

  // Parses expression text. Errors carry a 1-based line/column position.
  static ScalarExpr parse(std::string_view text, CoordsPtr coords);
  static ScalarExpr parse(std::string_view text,
                          std::vector<std::string> coords);

  static ScalarExpr number(double value, CoordsPtr coords);
  static ScalarExpr coordinate(int index, CoordsPtr coords);
  static ScalarExpr apply(CallFunc func, const ScalarExpr& arg);

  bool valid() const { return root_ != nullptr; }
  int dim() const { return static_cast<int>(coords_->size()); }
  const std::vector<std::string>& coords() const { return *coords_; }
  const CoordsPtr& coords_ptr() const { return coords_; }
  const std::shared_ptr<const ExprNode>& root() const { return root_; }

  // Canonical text form; parsing it back yields a structurally equal tree.
  std::string str() const;

  double operator()(std::span<const double> x) const;
  Taylor operator()(std::span<const Taylor> x) const;

  // Value and partials at x up to total order `order` (0..4).
  Jet jet(std::span<const double> x, int order) const;

  // True when the expression is the literal `value`.
  bool is_literal(double value) const;

  // Structural algebra with light identity cleanup (x+0, 1*x, x*0, x/1).
  friend ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b);
  friend ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b);
  friend ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b);
  friend ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b);
  ScalarExpr operator-() const;
  ScalarExpr pow(long long num, long long den = 1) const;

 private:
  ScalarExpr(std::shared_ptr<const ExprNode> root, CoordsPtr coords)
      : root_(std::move(root)), coords_(std::move(coords)) {}

  std::shared_ptr<const ExprNode> root_;
  CoordsPtr coords_;
};

bool structurally_equal(const ScalarExpr& a, const ScalarExpr& b);

CoordsPtr make_coords(std::vector<std::string> names);

}  // namespace finsler
