#include "finsler/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace finsler {

namespace {

std::uint64_t pack_index(std::span<const int> index) {
  std::uint64_t key = 0;
  for (size_t i = 0; i < index.size(); ++i) {
    key |= static_cast<std::uint64_t>(index[i]) << (4 * i);
  }
  return key;
}

void enumerate_rec(int var, int remaining, std::vector<int>& current,
                   std::vector<int>& out) {
  if (var + 1 == static_cast<int>(current.size())) {
    current[var] = remaining;
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[var] = e;
    enumerate_rec(var + 1, remaining - e, current, out);
  }
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

TaylorContext::TaylorContext(int nvars, int order)
    : nvars_(nvars), order_(order) {
  degree_offset_.assign(order + 2, 0);
  std::vector<int> current(nvars, 0);
  for (int d = 0; d <= order; ++d) {
    degree_offset_[d] = static_cast<int>(degree_.size());
    std::vector<int> block;
    enumerate_rec(0, d, current, block);
    const int count = static_cast<int>(block.size()) / nvars;
    indices_.insert(indices_.end(), block.begin(), block.end());
    degree_.insert(degree_.end(), count, d);
  }
  degree_offset_[order + 1] = static_cast<int>(degree_.size());

  const int total = size();
  rank_lookup_.reserve(total);
  for (int r = 0; r < total; ++r) {
    rank_lookup_.emplace_back(pack_index(index(r)), r);
  }
  std::sort(rank_lookup_.begin(), rank_lookup_.end());

  index_factorial_.resize(total);
  for (int r = 0; r < total; ++r) {
    double f = 1.0;
    for (int v : index(r)) f *= factorial(v);
    index_factorial_[r] = f;
  }

  bump_.assign(static_cast<size_t>(total) * nvars, -1);
  std::vector<int> tmp(nvars);
  for (int r = 0; r < total; ++r) {
    if (degree_[r] >= order) continue;
    auto idx = index(r);
    for (int v = 0; v < nvars; ++v) {
      std::copy(idx.begin(), idx.end(), tmp.begin());
      ++tmp[v];
      bump_[static_cast<size_t>(r) * nvars + v] = rank(tmp);
    }
  }

  for (int ra = 0; ra < total; ++ra) {
    for (int rb = 0; rb < total; ++rb) {
      if (degree_[ra] + degree_[rb] > order) continue;
      std::copy(index(ra).begin(), index(ra).end(), tmp.begin());
      auto ib = index(rb);
      for (int v = 0; v < nvars; ++v) tmp[v] += ib[v];
      triples_.push_back({ra, rb, rank(tmp)});
    }
  }
  std::sort(triples_.begin(), triples_.end(),
            [this](const Triple& x, const Triple& y) {
              const int dx = degree_[x.a] + degree_[x.b];
              const int dy = degree_[y.a] + degree_[y.b];
              if (dx != dy) return dx < dy;
              if (x.a != y.a) return x.a < y.a;
              return x.b < y.b;
            });
  triple_offset_.assign(order + 2, 0);
  for (const Triple& t : triples_) {
    ++triple_offset_[degree_[t.a] + degree_[t.b] + 1];
  }
  for (int d = 0; d <= order; ++d) triple_offset_[d + 1] += triple_offset_[d];
}

int TaylorContext::rank(std::span<const int> index) const {
  int deg = 0;
  for (int v : index) deg += v;
  if (deg > order_) return -1;
  const std::uint64_t key = pack_index(index);
  auto it = std::lower_bound(
      rank_lookup_.begin(), rank_lookup_.end(), key,
      [](const std::pair<std::uint64_t, int>& e, std::uint64_t k) {
        return e.first < k;
      });
  return it->second;
}

std::shared_ptr<const TaylorContext> TaylorContext::get(int nvars, int order) {
  if (nvars < 1 || nvars > kMaxVars) {
    throw PreconditionError("taylor context supports 1.." +
                            std::to_string(kMaxVars) + " variables, got " +
                            std::to_string(nvars));
  }
  if (order < 0 || order > kMaxOrder) {
    throw PreconditionError("taylor context supports orders 0.." +
                            std::to_string(kMaxOrder) + ", got " +
                            std::to_string(order));
  }
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const TaylorContext>>
      cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{nvars, order}];
  if (!slot) {
    slot = std::shared_ptr<const TaylorContext>(
        new TaylorContext(nvars, order));
  }
  return slot;
}

Taylor::Taylor(TaylorContextPtr ctx, int order)
    : ctx_(std::move(ctx)), order_(order), coeff_(ctx_->size(), 0.0) {}

Taylor Taylor::constant(TaylorContextPtr ctx, double value) {
  Taylor t(std::move(ctx), 0);
  t.order_ = t.ctx_->order();
  t.coeff_[0] = value;
  return t;
}

Taylor Taylor::variable(TaylorContextPtr ctx, int var, double value) {
  if (var < 0 || var >= ctx->nvars()) {
    throw PreconditionError("variable index out of range");
  }
  Taylor t(std::move(ctx), 0);
  t.order_ = t.ctx_->order();
  t.coeff_[0] = value;
  if (t.order_ >= 1) {
    std::vector<int> idx(t.ctx_->nvars(), 0);
    idx[var] = 1;
    t.coeff_[t.ctx_->rank(idx)] = 1.0;
  }
  return t;
}

void Taylor::check_same_context(const Taylor& other) const {
  if (ctx_ != other.ctx_) {
    throw PreconditionError("taylor operands use different contexts");
  }
}

double Taylor::coeff(std::span<const int> index) const {
  const int r = ctx_->rank(index);
  int deg = 0;
  for (int v : index) deg += v;
  if (r < 0 || deg > order_) {
    throw PreconditionError("coefficient degree exceeds validity order");
  }
  return coeff_[r];
}

double Taylor::partial(std::span<const int> index) const {
  const int r = ctx_->rank(index);
  int deg = 0;
  for (int v : index) deg += v;
  if (r < 0 || deg > order_) {
    throw PreconditionError("partial degree exceeds validity order");
  }
  return coeff_[r] * ctx_->index_factorial(r);
}

Taylor Taylor::derivative(int var) const {
  if (order_ < 1) {
    throw PreconditionError("derivative requires validity order >= 1");
  }
  if (var < 0 || var >= ctx_->nvars()) {
    throw PreconditionError("variable index out of range");
  }
  Taylor out(ctx_, order_ - 1);
  const int limit = ctx_->degree_offset(order_);
  for (int r = 0; r < limit; ++r) {
    const int up = ctx_->bump(r, var);
    out.coeff_[r] = coeff_[up] * (ctx_->index(r)[var] + 1);
  }
  return out;
}

Taylor Taylor::truncated(int new_order) const {
  if (new_order > order_ || new_order < 0) {
    throw PreconditionError("invalid truncation order");
  }
  Taylor out(ctx_, new_order);
  const int limit = ctx_->degree_offset(new_order + 1);
  std::copy(coeff_.begin(), coeff_.begin() + limit, out.coeff_.begin());
  return out;
}

Taylor Taylor::operator-() const {
  Taylor out(ctx_, order_);
  for (size_t i = 0; i < coeff_.size(); ++i) out.coeff_[i] = -coeff_[i];
  return out;
}

Taylor& Taylor::operator+=(const Taylor& rhs) {
  *this = *this + rhs;
  return *this;
}

Taylor& Taylor::operator-=(const Taylor& rhs) {
  *this = *this - rhs;
  return *this;
}

Taylor operator+(const Taylor& a, const Taylor& b) {
  a.check_same_context(b);
  const int e = std::min(a.order_, b.order_);
  Taylor out(a.ctx_, e);
  const int limit = a.ctx_->degree_offset(e + 1);
  for (int r = 0; r < limit; ++r) out.coeff_[r] = a.coeff_[r] + b.coeff_[r];
  return out;
}

Taylor operator-(const Taylor& a, const Taylor& b) {
  a.check_same_context(b);
  const int e = std::min(a.order_, b.order_);
  Taylor out(a.ctx_, e);
  const int limit = a.ctx_->degree_offset(e + 1);
  for (int r = 0; r < limit; ++r) out.coeff_[r] = a.coeff_[r] - b.coeff_[r];
  return out;
}

Taylor operator*(const Taylor& a, const Taylor& b) {
  a.check_same_context(b);
  const int e = std::min(a.order_, b.order_);
  Taylor out(a.ctx_, e);
  for (const auto& t : a.ctx_->triples_up_to(e)) {
    out.coeff_[t.c] += a.coeff_[t.a] * b.coeff_[t.b];
  }
  return out;
}

Taylor operator/(const Taylor& a, const Taylor& b) { return a * inverse(b); }

Taylor operator+(const Taylor& a, double b) {
  Taylor out = a;
  out.coeff_[0] += b;
  return out;
}
Taylor operator+(double a, const Taylor& b) { return b + a; }
Taylor operator-(const Taylor& a, double b) { return a + (-b); }
Taylor operator-(double a, const Taylor& b) { return (-b) + a; }

Taylor operator*(const Taylor& a, double b) {
  Taylor out(a.ctx_, a.order_);
  for (size_t i = 0; i < a.coeff_.size(); ++i) out.coeff_[i] = a.coeff_[i] * b;
  return out;
}
Taylor operator*(double a, const Taylor& b) { return b * a; }
Taylor operator/(const Taylor& a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return a * (1.0 / b);
}
Taylor operator/(double a, const Taylor& b) { return inverse(b) * a; }

Taylor Taylor::compose(std::span<const double> derivs) const {
  const int m = order_;
  if (static_cast<int>(derivs.size()) != m + 1) {
    throw PreconditionError("compose needs exactly order+1 derivatives");
  }
  Taylor w = *this;
  w.coeff_[0] = 0.0;
  Taylor r = Taylor::constant(ctx_, derivs[m]).truncated(m);
  for (int k = m - 1; k >= 0; --k) {
    r = r * w + derivs[k];
  }
  return r;
}

namespace {

std::vector<double> series_exp(double v, int m) {
  std::vector<double> d(m + 1);
  d[0] = std::exp(v);
  for (int k = 1; k <= m; ++k) d[k] = d[k - 1] / k;
  return d;
}

}  // namespace

Taylor exp(const Taylor& x) { return x.compose(series_exp(x.value(), x.order())); }

Taylor log(const Taylor& x) {
  const double v = x.value();
  if (!(v > 0.0)) throw DomainError("log of a non-positive value");
  const int m = x.order();
  std::vector<double> d(m + 1);
  d[0] = std::log(v);
  double p = 1.0;  // v^k with alternating sign baked in below
  for (int k = 1; k <= m; ++k) {
    p *= v;
    d[k] = (k % 2 == 1 ? 1.0 : -1.0) / (k * p);
  }
  return x.compose(d);
}

Taylor sqrt(const Taylor& x) {
  const double v = x.value();
  if (!(v > 0.0)) throw DomainError("sqrt of a non-positive value");
  const int m = x.order();
  std::vector<double> d(m + 1);
  d[0] = std::sqrt(v);
  for (int k = 1; k <= m; ++k) {
    d[k] = d[k - 1] * (0.5 - (k - 1)) / (k * v);
  }
  return x.compose(d);
}

Taylor sin(const Taylor& x) {
  const double v = x.value();
  const int m = x.order();
  const double cyc[4] = {std::sin(v), std::cos(v), -std::sin(v), -std::cos(v)};
  std::vector<double> d(m + 1);
  double fact = 1.0;
  for (int k = 0; k <= m; ++k) {
    if (k > 0) fact *= k;
    d[k] = cyc[k % 4] / fact;
  }
  return x.compose(d);
}

Taylor cos(const Taylor& x) {
  const double v = x.value();
  const int m = x.order();
  const double cyc[4] = {std::cos(v), -std::sin(v), -std::cos(v), std::sin(v)};
  std::vector<double> d(m + 1);
  double fact = 1.0;
  for (int k = 0; k <= m; ++k) {
    if (k > 0) fact *= k;
    d[k] = cyc[k % 4] / fact;
  }
  return x.compose(d);
}

Taylor inverse(const Taylor& x) {
  const double v = x.value();
  if (v == 0.0) throw DomainError("division by zero");
  const int m = x.order();
  std::vector<double> d(m + 1);
  d[0] = 1.0 / v;
  for (int k = 1; k <= m; ++k) d[k] = -d[k - 1] / v;
  return x.compose(d);
}

Taylor pow_int(const Taylor& x, long long e) {
  if (e < 0) return inverse(pow_int(x, -e));
  Taylor result = Taylor::constant(x.context(), 1.0).truncated(x.order());
  Taylor base = x;
  while (e > 0) {
    if (e & 1) result = result * base;
    base = base * base;
    e >>= 1;
  }
  return result;
}

Taylor pow_rational(const Taylor& x, long long p, long long q) {
  if (q < 0) {
    p = -p;
    q = -q;
  }
  if (q == 0) throw DomainError("zero denominator in exponent");
  const long long g = std::gcd(p < 0 ? -p : p, q);
  if (g > 1) {
    p /= g;
    q /= g;
  }
  if (q == 1) return pow_int(x, p);
  const double v = x.value();
  if (!(v > 0.0)) {
    throw DomainError("fractional power of a non-positive value");
  }
  const double r = static_cast<double>(p) / static_cast<double>(q);
  const int m = x.order();
  std::vector<double> d(m + 1);
  d[0] = std::pow(v, r);
  for (int k = 1; k <= m; ++k) {
    d[k] = d[k - 1] * (r - (k - 1)) / (k * v);
  }
  return x.compose(d);
}

double pow_int(double x, long long e) {
  if (e < 0) {
    if (x == 0.0) throw DomainError("division by zero");
    return 1.0 / pow_int(x, -e);
  }
  double result = 1.0;
  double base = x;
  while (e > 0) {
    if (e & 1) result *= base;
    base *= base;
    e >>= 1;
  }
  return result;
}

double pow_rational(double x, long long p, long long q) {
  if (q < 0) {
    p = -p;
    q = -q;
  }
  if (q == 0) throw DomainError("zero denominator in exponent");
  const long long g = std::gcd(p < 0 ? -p : p, q);
  if (g > 1) {
    p /= g;
    q /= g;
  }
  if (q == 1) return pow_int(x, p);
  if (!(x > 0.0)) {
    throw DomainError("fractional power of a non-positive value");
  }
  return std::pow(x, static_cast<double>(p) / static_cast<double>(q));
}

double inverse(double x) {
  if (x == 0.0) throw DomainError("division by zero");
  return 1.0 / x;
}

}  // namespace finsler
