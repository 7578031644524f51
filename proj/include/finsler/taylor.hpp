#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "finsler/error.hpp"

namespace finsler {

// Shared immutable tables for dense truncated Taylor arithmetic in a fixed
// number of variables up to a fixed total order. Multi-indices are stored in
// graded lexicographic order, so every coefficient array is indexed by rank.
class TaylorContext {
 public:
  struct Triple {
    int a;  // rank of left factor index
    int b;  // rank of right factor index
    int c;  // rank of the sum index
  };

  // Contexts are cached: repeated requests for the same shape return the
  // same object, so coefficient tables are built once.
  static std::shared_ptr<const TaylorContext> get(int nvars, int order);

  int nvars() const { return nvars_; }
  int order() const { return order_; }

  // Number of multi-indices with total degree <= order().
  int size() const { return static_cast<int>(degree_.size()); }

  int degree(int rank) const { return degree_[rank]; }
  std::span<const int> index(int rank) const {
    return {indices_.data() + static_cast<size_t>(rank) * nvars_,
            static_cast<size_t>(nvars_)};
  }

  // Rank of a multi-index, or -1 if its degree exceeds order().
  int rank(std::span<const int> index) const;

  // First rank whose degree is deg (ranks are sorted by degree).
  int degree_offset(int deg) const { return degree_offset_[deg]; }

  // All (a, b, c) with degree(a) + degree(b) <= cap, for truncated products.
  std::span<const Triple> triples_up_to(int cap) const {
    return {triples_.data(), static_cast<size_t>(triple_offset_[cap + 1])};
  }

  // Product of factorials of the entries of the multi-index at `rank`.
  double index_factorial(int rank) const { return index_factorial_[rank]; }

  // Rank of index(rank) + e_var; requires degree(rank) < order().
  int bump(int rank, int var) const {
    return bump_[static_cast<size_t>(rank) * nvars_ + var];
  }

  static constexpr int kMaxVars = 16;
  static constexpr int kMaxOrder = 8;

 private:
  TaylorContext(int nvars, int order);

  int nvars_;
  int order_;
  std::vector<int> indices_;        // size() * nvars_, graded lex
  std::vector<int> degree_;         // per rank
  std::vector<int> degree_offset_;  // order_ + 2 entries
  std::vector<Triple> triples_;     // sorted by degree(a) + degree(b)
  std::vector<int> triple_offset_;  // order_ + 2 entries
  std::vector<double> index_factorial_;
  std::vector<int> bump_;  // size() * nvars_, -1 where undefined
  std::vector<std::pair<std::uint64_t, int>> rank_lookup_;  // sorted packed keys
};

using TaylorContextPtr = std::shared_ptr<const TaylorContext>;

// One truncated multivariate Taylor expansion. `order()` is the validity
// order of the coefficients: arithmetic takes the min of the operand orders
// and extracting a derivative lowers it by one, so truncation stays exact.
// Coefficients above the validity order are kept at zero.
class Taylor {
 public:
  Taylor() = default;

  static Taylor constant(TaylorContextPtr ctx, double value);
  // The expansion of the var-th coordinate around `value`.
  static Taylor variable(TaylorContextPtr ctx, int var, double value);

  const TaylorContextPtr& context() const { return ctx_; }
  int order() const { return order_; }

  double value() const { return coeff_[0]; }
  double coeff(int rank) const { return coeff_[rank]; }

  // Raw Taylor coefficient / true partial derivative for a multi-index.
  // Throws if the index degree exceeds the validity order.
  double coeff(std::span<const int> index) const;
  double partial(std::span<const int> index) const;

  // d/dx_var as a new expansion of one lower validity order.
  Taylor derivative(int var) const;

  // Copy with validity order lowered to `new_order` (coefficients above it
  // zeroed). new_order must not exceed the current order.
  Taylor truncated(int new_order) const;

  Taylor operator-() const;
  Taylor& operator+=(const Taylor& rhs);
  Taylor& operator-=(const Taylor& rhs);

  friend Taylor operator+(const Taylor& a, const Taylor& b);
  friend Taylor operator-(const Taylor& a, const Taylor& b);
  friend Taylor operator*(const Taylor& a, const Taylor& b);
  friend Taylor operator/(const Taylor& a, const Taylor& b);

  friend Taylor operator+(const Taylor& a, double b);
  friend Taylor operator+(double a, const Taylor& b);
  friend Taylor operator-(const Taylor& a, double b);
  friend Taylor operator-(double a, const Taylor& b);
  friend Taylor operator*(const Taylor& a, double b);
  friend Taylor operator*(double a, const Taylor& b);
  friend Taylor operator/(const Taylor& a, double b);
  friend Taylor operator/(double a, const Taylor& b);

  // h applied to this expansion, where derivs[k] = h^(k)(value()) / k!.
  Taylor compose(std::span<const double> derivs) const;

 private:
  Taylor(TaylorContextPtr ctx, int order);
  void check_same_context(const Taylor& other) const;

  TaylorContextPtr ctx_;
  int order_ = 0;
  std::vector<double> coeff_;
};

Taylor exp(const Taylor& x);
Taylor log(const Taylor& x);
Taylor sqrt(const Taylor& x);
Taylor sin(const Taylor& x);
Taylor cos(const Taylor& x);
Taylor inverse(const Taylor& x);
Taylor pow_int(const Taylor& x, long long e);
// x^(p/q) with q >= 1; q > 1 requires a positive base value.
Taylor pow_rational(const Taylor& x, long long p, long long q);

// Scalar counterparts so templated evaluators work for double and Taylor
// through the same call spelling.
double pow_int(double x, long long e);
double pow_rational(double x, long long p, long long q);
double inverse(double x);

inline double make_constant_like(double /*exemplar*/, double v) { return v; }
inline Taylor make_constant_like(const Taylor& exemplar, double v) {
  return Taylor::constant(exemplar.context(), v);
}

}  // namespace finsler
