#include "finsler/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace finsler {

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make_node(ExprNode n) {
  return std::make_shared<const ExprNode>(std::move(n));
}

NodePtr num_node(double v) {
  if (!std::isfinite(v)) throw DomainError("non-finite numeric literal");
  if (v < 0.0) {
    ExprNode neg;
    neg.kind = NodeKind::kNeg;
    neg.a = num_node(-v);
    return make_node(std::move(neg));
  }
  ExprNode n;
  n.kind = NodeKind::kNumber;
  n.number = (v == 0.0) ? 0.0 : v;  // normalize -0.0
  return make_node(std::move(n));
}

bool node_is_literal(const ExprNode* n, double v) {
  return n->kind == NodeKind::kNumber && n->number == v;
}

// ---------------------------------------------------------------------------
// Lexing

enum class TokKind {
  kNumber,
  kIdent,
  kPlus,
  kMinus,
  kStar,
  kSlash,
  kCaret,
  kLParen,
  kRParen,
  kComma,
  kEnd
};

struct Token {
  TokKind kind;
  std::string text;
  double value = 0.0;
  int line = 1;
  int column = 1;
};

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  int line = 1;
  int column = 1;
  size_t i = 0;
  auto advance = [&](size_t count) {
    for (size_t k = 0; k < count; ++k) {
      if (text[i + k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    i += count;
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = column;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[j]))) {
        ++j;
      }
      if (j < text.size() && text[j] == '.') {
        ++j;
        while (j < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[j]))) {
          ++j;
        }
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() &&
            std::isdigit(static_cast<unsigned char>(text[k]))) {
          ++k;
          while (k < text.size() &&
                 std::isdigit(static_cast<unsigned char>(text[k]))) {
            ++k;
          }
          j = k;
        }
      }
      t.kind = TokKind::kNumber;
      t.text = std::string(text.substr(i, j - i));
      t.value = std::strtod(t.text.c_str(), nullptr);
      if (!std::isfinite(t.value)) {
        throw ParseError("numeric literal out of range", t.line, t.column);
      }
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) ||
              text[j] == '_' || text[j] == '\'')) {
        ++j;
      }
      t.kind = TokKind::kIdent;
      t.text = std::string(text.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    switch (c) {
      case '+': t.kind = TokKind::kPlus; break;
      case '-': t.kind = TokKind::kMinus; break;
      case '*': t.kind = TokKind::kStar; break;
      case '/': t.kind = TokKind::kSlash; break;
      case '^': t.kind = TokKind::kCaret; break;
      case '(': t.kind = TokKind::kLParen; break;
      case ')': t.kind = TokKind::kRParen; break;
      case ',': t.kind = TokKind::kComma; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line,
                         column);
    }
    t.text = std::string(1, c);
    advance(1);
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = TokKind::kEnd;
  end.text = "end of input";
  end.line = line;
  end.column = column;
  out.push_back(std::move(end));
  return out;
}

// ---------------------------------------------------------------------------
// Parsing
//
// expr     := term  (('+' | '-') term)*
// term     := factor (('*' | '/') factor)*
// factor   := '-' factor | power
// power    := primary ['^' exponent]
// exponent := ['-'] integer | '(' ['-'] integer ['/' integer] ')'
// primary  := number | coordinate | function '(' expr ')' | '(' expr ')'

struct FuncEntry {
  const char* name;
  CallFunc func;
};

constexpr FuncEntry kFuncs[] = {
    {"exp", CallFunc::kExp}, {"ln", CallFunc::kLn},   {"sqrt", CallFunc::kSqrt},
    {"sin", CallFunc::kSin}, {"cos", CallFunc::kCos},
};

const FuncEntry* lookup_func(const std::string& name) {
  for (const auto& f : kFuncs) {
    if (name == f.name) return &f;
  }
  return nullptr;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const std::vector<std::string>& coords)
      : tokens_(std::move(tokens)), coords_(coords) {}

  NodePtr run() {
    NodePtr root = parse_expr();
    if (peek().kind != TokKind::kEnd) {
      fail("unexpected token '" + peek().text + "'");
    }
    return root;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& take() { return tokens_[pos_++]; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw ParseError(msg, t.line, t.column);
  }

  void expect(TokKind kind, const char* what) {
    if (peek().kind != kind) {
      fail(std::string("expected ") + what + " before '" + peek().text + "'");
    }
    ++pos_;
  }

  NodePtr parse_expr() {
    NodePtr left = parse_term();
    while (peek().kind == TokKind::kPlus || peek().kind == TokKind::kMinus) {
      const bool plus = take().kind == TokKind::kPlus;
      NodePtr right = parse_term();
      ExprNode n;
      n.kind = plus ? NodeKind::kAdd : NodeKind::kSub;
      n.a = std::move(left);
      n.b = std::move(right);
      left = make_node(std::move(n));
    }
    return left;
  }

  NodePtr parse_term() {
    NodePtr left = parse_factor();
    while (peek().kind == TokKind::kStar || peek().kind == TokKind::kSlash) {
      const bool star = take().kind == TokKind::kStar;
      NodePtr right = parse_factor();
      ExprNode n;
      n.kind = star ? NodeKind::kMul : NodeKind::kDiv;
      n.a = std::move(left);
      n.b = std::move(right);
      left = make_node(std::move(n));
    }
    return left;
  }

  NodePtr parse_factor() {
    if (peek().kind == TokKind::kMinus) {
      ++pos_;
      ExprNode n;
      n.kind = NodeKind::kNeg;
      n.a = parse_factor();
      return make_node(std::move(n));
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (peek().kind != TokKind::kCaret) return base;
    ++pos_;
    long long num = 0;
    long long den = 1;
    parse_exponent(num, den);
    ExprNode n;
    n.kind = NodeKind::kPow;
    n.pow_num = num;
    n.pow_den = den;
    n.a = std::move(base);
    return make_node(std::move(n));
  }

  long long integer_literal() {
    if (peek().kind != TokKind::kNumber) {
      fail("expected an integer exponent, got '" + peek().text + "'");
    }
    const Token& t = take();
    if (t.text.find_first_of(".eE") != std::string::npos) {
      throw ParseError("exponent must be an integer or rational constant",
                       t.line, t.column);
    }
    long long v = 0;
    auto [ptr, ec] =
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
      throw ParseError("exponent out of range", t.line, t.column);
    }
    return v;
  }

  void parse_exponent(long long& num, long long& den) {
    bool negate = false;
    if (peek().kind == TokKind::kMinus) {
      ++pos_;
      num = -integer_literal();
      return;
    }
    if (peek().kind == TokKind::kNumber) {
      num = integer_literal();
      return;
    }
    if (peek().kind == TokKind::kLParen) {
      ++pos_;
      if (peek().kind == TokKind::kMinus) {
        ++pos_;
        negate = true;
      }
      num = integer_literal();
      if (negate) num = -num;
      if (peek().kind == TokKind::kSlash) {
        ++pos_;
        den = integer_literal();
        if (den <= 0) {
          fail("exponent denominator must be a positive integer");
        }
      }
      expect(TokKind::kRParen, "')'");
      return;
    }
    fail("expected an integer or rational exponent, got '" + peek().text +
         "'");
  }

  NodePtr parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokKind::kNumber: {
        ++pos_;
        return num_node(t.value);
      }
      case TokKind::kIdent: {
        ++pos_;
        if (peek().kind == TokKind::kLParen) {
          const FuncEntry* f = lookup_func(t.text);
          if (f == nullptr) {
            throw ParseError("unknown function '" + t.text + "'", t.line,
                             t.column);
          }
          ++pos_;  // '('
          NodePtr arg = parse_expr();
          if (peek().kind == TokKind::kComma) {
            fail("function '" + t.text + "' takes exactly one argument");
          }
          expect(TokKind::kRParen, "')'");
          ExprNode n;
          n.kind = NodeKind::kCall;
          n.func = f->func;
          n.a = std::move(arg);
          return make_node(std::move(n));
        }
        const auto it = std::find(coords_.begin(), coords_.end(), t.text);
        if (it == coords_.end()) {
          throw ParseError("unknown identifier '" + t.text + "'", t.line,
                           t.column);
        }
        ExprNode n;
        n.kind = NodeKind::kVar;
        n.var = static_cast<int>(it - coords_.begin());
        n.name = t.text;
        return make_node(std::move(n));
      }
      case TokKind::kLParen: {
        ++pos_;
        NodePtr inner = parse_expr();
        expect(TokKind::kRParen, "')'");
        return inner;
      }
      case TokKind::kEnd:
        fail("unexpected end of input");
      default:
        fail("unexpected token '" + t.text + "'");
    }
  }

  std::vector<Token> tokens_;
  const std::vector<std::string>& coords_;
  size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printing

int node_prec(const ExprNode* n) {
  switch (n->kind) {
    case NodeKind::kAdd:
    case NodeKind::kSub:
      return 1;
    case NodeKind::kMul:
    case NodeKind::kDiv:
      return 2;
    case NodeKind::kNeg:
      return 3;
    case NodeKind::kPow:
      return 4;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void print_node(const ExprNode* n, std::string& out);

void print_child(const ExprNode* child, int parent_prec, bool rhs,
                 bool tight_rhs, std::string& out) {
  const int cp = node_prec(child);
  bool parens = cp < parent_prec;
  if (!parens && rhs && cp == parent_prec && tight_rhs) parens = true;
  if (!parens && rhs && child->kind == NodeKind::kNeg) parens = true;
  if (parens) out.push_back('(');
  print_node(child, out);
  if (parens) out.push_back(')');
}

void print_node(const ExprNode* n, std::string& out) {
  switch (n->kind) {
    case NodeKind::kNumber:
      out += format_number(n->number);
      return;
    case NodeKind::kVar:
      out += n->name;
      return;
    case NodeKind::kNeg:
      out.push_back('-');
      print_child(n->a.get(), 4, false, false, out);
      return;
    case NodeKind::kAdd:
      print_child(n->a.get(), 1, false, false, out);
      out += " + ";
      print_child(n->b.get(), 1, true, false, out);
      return;
    case NodeKind::kSub:
      print_child(n->a.get(), 1, false, false, out);
      out += " - ";
      print_child(n->b.get(), 1, true, true, out);
      return;
    case NodeKind::kMul:
      print_child(n->a.get(), 2, false, false, out);
      out.push_back('*');
      print_child(n->b.get(), 2, true, false, out);
      return;
    case NodeKind::kDiv:
      print_child(n->a.get(), 2, false, false, out);
      out.push_back('/');
      print_child(n->b.get(), 2, true, true, out);
      return;
    case NodeKind::kPow: {
      print_child(n->a.get(), 5, false, false, out);
      out.push_back('^');
      if (n->pow_den == 1 && n->pow_num >= 0) {
        out += std::to_string(n->pow_num);
      } else if (n->pow_den == 1) {
        out += "(" + std::to_string(n->pow_num) + ")";
      } else {
        out += "(" + std::to_string(n->pow_num) + "/" +
               std::to_string(n->pow_den) + ")";
      }
      return;
    }
    case NodeKind::kCall: {
      switch (n->func) {
        case CallFunc::kExp: out += "exp"; break;
        case CallFunc::kLn: out += "ln"; break;
        case CallFunc::kSqrt: out += "sqrt"; break;
        case CallFunc::kSin: out += "sin"; break;
        case CallFunc::kCos: out += "cos"; break;
      }
      out.push_back('(');
      print_node(n->a.get(), out);
      out.push_back(')');
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Evaluation

double ap_exp(double x) { return std::exp(x); }
double ap_log(double x) {
  if (!(x > 0.0)) throw DomainError("log of a non-positive value");
  return std::log(x);
}
double ap_sqrt(double x) {
  if (!(x > 0.0)) throw DomainError("sqrt of a non-positive value");
  return std::sqrt(x);
}
double ap_sin(double x) { return std::sin(x); }
double ap_cos(double x) { return std::cos(x); }
double checked_div(double a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return a / b;
}

Taylor ap_exp(const Taylor& x) { return exp(x); }
Taylor ap_log(const Taylor& x) { return log(x); }
Taylor ap_sqrt(const Taylor& x) { return sqrt(x); }
Taylor ap_sin(const Taylor& x) { return sin(x); }
Taylor ap_cos(const Taylor& x) { return cos(x); }
Taylor checked_div(const Taylor& a, const Taylor& b) { return a / b; }

template <typename T>
T eval_node(const ExprNode* n, std::span<const T> x) {
  switch (n->kind) {
    case NodeKind::kNumber:
      return make_constant_like(x[0], n->number);
    case NodeKind::kVar:
      return x[n->var];
    case NodeKind::kNeg:
      return make_constant_like(x[0], 0.0) - eval_node(n->a.get(), x);
    case NodeKind::kAdd:
      return eval_node(n->a.get(), x) + eval_node(n->b.get(), x);
    case NodeKind::kSub:
      return eval_node(n->a.get(), x) - eval_node(n->b.get(), x);
    case NodeKind::kMul:
      return eval_node(n->a.get(), x) * eval_node(n->b.get(), x);
    case NodeKind::kDiv:
      return checked_div(eval_node(n->a.get(), x), eval_node(n->b.get(), x));
    case NodeKind::kPow:
      return pow_rational(eval_node(n->a.get(), x), n->pow_num, n->pow_den);
    case NodeKind::kCall: {
      T arg = eval_node(n->a.get(), x);
      switch (n->func) {
        case CallFunc::kExp: return ap_exp(arg);
        case CallFunc::kLn: return ap_log(arg);
        case CallFunc::kSqrt: return ap_sqrt(arg);
        case CallFunc::kSin: return ap_sin(arg);
        case CallFunc::kCos: return ap_cos(arg);
      }
      throw Error("unreachable");
    }
  }
  throw Error("unreachable");
}

}  // namespace

// ---------------------------------------------------------------------------
// ScalarExpr

CoordsPtr make_coords(std::vector<std::string> names) {
  if (names.empty()) {
    throw PreconditionError("coordinate list must not be empty");
  }
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) {
      throw PreconditionError("coordinate names must not be empty");
    }
    for (size_t j = i + 1; j < names.size(); ++j) {
      if (names[i] == names[j]) {
        throw PreconditionError("duplicate coordinate name '" + names[i] +
                                "'");
      }
    }
  }
  return std::make_shared<const std::vector<std::string>>(std::move(names));
}

ScalarExpr ScalarExpr::parse(std::string_view text, CoordsPtr coords) {
  Parser parser(lex(text), *coords);
  return ScalarExpr(parser.run(), std::move(coords));
}

ScalarExpr ScalarExpr::parse(std::string_view text,
                             std::vector<std::string> coords) {
  return parse(text, make_coords(std::move(coords)));
}

ScalarExpr ScalarExpr::number(double value, CoordsPtr coords) {
  return ScalarExpr(num_node(value), std::move(coords));
}

ScalarExpr ScalarExpr::coordinate(int index, CoordsPtr coords) {
  if (index < 0 || index >= static_cast<int>(coords->size())) {
    throw PreconditionError("coordinate index out of range");
  }
  ExprNode n;
  n.kind = NodeKind::kVar;
  n.var = index;
  n.name = (*coords)[index];
  return ScalarExpr(make_node(std::move(n)), std::move(coords));
}

ScalarExpr ScalarExpr::apply(CallFunc func, const ScalarExpr& arg) {
  ExprNode n;
  n.kind = NodeKind::kCall;
  n.func = func;
  n.a = arg.root_;
  return ScalarExpr(make_node(std::move(n)), arg.coords_);
}

std::string ScalarExpr::str() const {
  std::string out;
  print_node(root_.get(), out);
  return out;
}

double ScalarExpr::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) {
    throw PreconditionError("point dimension mismatch: expected " +
                            std::to_string(dim()) + ", got " +
                            std::to_string(x.size()));
  }
  return eval_node<double>(root_.get(), x);
}

Taylor ScalarExpr::operator()(std::span<const Taylor> x) const {
  if (static_cast<int>(x.size()) < dim()) {
    throw PreconditionError("taylor argument list shorter than dimension");
  }
  return eval_node<Taylor>(root_.get(), x.subspan(0, dim()));
}

Jet ScalarExpr::jet(std::span<const double> x, int order) const {
  if (order < 0 || order > 4) {
    throw PreconditionError("jet order must be between 0 and 4");
  }
  if (static_cast<int>(x.size()) != dim()) {
    throw PreconditionError("point dimension mismatch: expected " +
                            std::to_string(dim()) + ", got " +
                            std::to_string(x.size()));
  }
  auto ctx = TaylorContext::get(dim(), order);
  std::vector<Taylor> vars;
  vars.reserve(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    vars.push_back(Taylor::variable(ctx, static_cast<int>(i), x[i]));
  }
  Taylor value = eval_node<Taylor>(root_.get(), std::span<const Taylor>(vars));
  return Jet(std::vector<double>(x.begin(), x.end()), std::move(value));
}

bool ScalarExpr::is_literal(double value) const {
  return root_ && node_is_literal(root_.get(), value);
}

namespace {

void check_compatible(const ScalarExpr& a, const ScalarExpr& b) {
  if (a.coords() != b.coords()) {
    throw PreconditionError("expressions use different coordinate lists");
  }
}

NodePtr binary(NodeKind kind, NodePtr a, NodePtr b) {
  ExprNode n;
  n.kind = kind;
  n.a = std::move(a);
  n.b = std::move(b);
  return make_node(std::move(n));
}

}  // namespace

ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
  check_compatible(a, b);
  if (a.is_literal(0.0)) return b;
  if (b.is_literal(0.0)) return a;
  return ScalarExpr(binary(NodeKind::kAdd, a.root(), b.root()),
                    a.coords_ptr());
}

ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) {
  check_compatible(a, b);
  if (b.is_literal(0.0)) return a;
  if (a.is_literal(0.0)) return -b;
  return ScalarExpr(binary(NodeKind::kSub, a.root(), b.root()),
                    a.coords_ptr());
}

ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
  check_compatible(a, b);
  if (a.is_literal(0.0) || b.is_literal(0.0)) {
    return ScalarExpr::number(0.0, a.coords_ptr());
  }
  if (a.is_literal(1.0)) return b;
  if (b.is_literal(1.0)) return a;
  return ScalarExpr(binary(NodeKind::kMul, a.root(), b.root()),
                    a.coords_ptr());
}

ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) {
  check_compatible(a, b);
  if (b.is_literal(1.0)) return a;
  return ScalarExpr(binary(NodeKind::kDiv, a.root(), b.root()),
                    a.coords_ptr());
}

ScalarExpr ScalarExpr::operator-() const {
  if (is_literal(0.0)) return *this;
  ExprNode n;
  n.kind = NodeKind::kNeg;
  n.a = root_;
  return ScalarExpr(make_node(std::move(n)), coords_);
}

ScalarExpr ScalarExpr::pow(long long num, long long den) const {
  if (den <= 0) throw PreconditionError("exponent denominator must be >= 1");
  if (num == den) return *this;
  ExprNode n;
  n.kind = NodeKind::kPow;
  n.pow_num = num;
  n.pow_den = den;
  n.a = root_;
  return ScalarExpr(make_node(std::move(n)), coords_);
}

namespace {

bool nodes_equal(const ExprNode* a, const ExprNode* b) {
  if (a == b) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::kNumber:
      return a->number == b->number;
    case NodeKind::kVar:
      return a->var == b->var && a->name == b->name;
    case NodeKind::kNeg:
      return nodes_equal(a->a.get(), b->a.get());
    case NodeKind::kAdd:
    case NodeKind::kSub:
    case NodeKind::kMul:
    case NodeKind::kDiv:
      return nodes_equal(a->a.get(), b->a.get()) &&
             nodes_equal(a->b.get(), b->b.get());
    case NodeKind::kPow:
      return a->pow_num == b->pow_num && a->pow_den == b->pow_den &&
             nodes_equal(a->a.get(), b->a.get());
    case NodeKind::kCall:
      return a->func == b->func && nodes_equal(a->a.get(), b->a.get());
  }
  return false;
}

}  // namespace

bool structurally_equal(const ScalarExpr& a, const ScalarExpr& b) {
  if (!a.valid() || !b.valid()) return a.valid() == b.valid();
  if (a.coords() != b.coords()) return false;
  return nodes_equal(a.root().get(), b.root().get());
}

}  // namespace finsler
