#pragma once

// Restricted arithmetic expressions in one integer variable r:
//   numbers (integer or decimal), r, + - * / ^, parentheses, unary minus.
// Exponents must be affine in r with rational coefficients; a base that
// depends on r needs a constant integer exponent. Values are computed exactly
// in rational arithmetic.
//
// Every such expression also has a leading-order class C·r^p·(log r)^l·q^r as
// r → ∞, derived symbolically (nullopt when leading terms cancel).

#include <boost/multiprecision/cpp_int.hpp>
#include <cctype>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "errors.hpp"

namespace nlab {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Rational rational_pow(const Rational& base, BigInt exponent) {
  if (exponent < 0) {
    if (base == 0) throw ParameterError("zero raised to a negative power");
    return rational_pow(Rational(1) / base, -exponent);
  }
  Rational result = 1, b = base;
  while (exponent > 0) {
    if ((exponent & 1) != 0) result *= b;
    exponent >>= 1;
    if (exponent > 0) b *= b;
  }
  return result;
}

// Conversion that refuses to silently overflow or underflow.
inline double to_double_checked(const Rational& q) {
  const double d = q.convert_to<double>();
  if (!std::isfinite(d) || (d == 0.0 && q != 0))
    throw OverflowError("value leaves the double range");
  return d;
}

struct AsymptoticClass {
  double C = 1.0;
  double p = 0.0;
  double l = 0.0;
  double q = 1.0;

  bool zero() const { return C == 0.0; }
};

namespace detail {

inline bool near_one(double q) { return std::abs(q - 1.0) <= 1e-12; }

// Compares growth of two nonzero classes: <0, 0 or >0.
inline int compare_growth(const AsymptoticClass& a, const AsymptoticClass& b) {
  const bool same_q = std::abs(a.q - b.q) <= 1e-12 * std::max(a.q, b.q);
  if (!same_q) return a.q < b.q ? -1 : 1;
  if (a.p != b.p) return a.p < b.p ? -1 : 1;
  if (a.l != b.l) return a.l < b.l ? -1 : 1;
  return 0;
}

}  // namespace detail

inline AsymptoticClass operator*(const AsymptoticClass& a, const AsymptoticClass& b) {
  return {a.C * b.C, a.p + b.p, a.l + b.l, a.q * b.q};
}

inline AsymptoticClass reciprocal(const AsymptoticClass& a) {
  return {1.0 / a.C, -a.p, -a.l, 1.0 / a.q};
}

// Class of a(r + 1) given the class of a(r).
inline AsymptoticClass shifted(const AsymptoticClass& a) { return {a.C * a.q, a.p, a.l, a.q}; }

// Σ a(r) converges? nullopt in the borderline r^{-1}(log r)^{-1} case.
inline std::optional<bool> series_converges(const AsymptoticClass& a) {
  if (!detail::near_one(a.q)) return a.q < 1.0;
  if (a.p != -1.0) return a.p < -1.0;
  if (a.l == -1.0) return std::nullopt;
  return a.l < -1.0;
}

// Leading class of the partial sums Σ_{k≤r} a(k) of a divergent series.
inline std::optional<AsymptoticClass> partial_sum_class(const AsymptoticClass& a) {
  auto conv = series_converges(a);
  if (!conv || *conv) return std::nullopt;
  if (!detail::near_one(a.q)) return AsymptoticClass{a.C * a.q / (a.q - 1.0), a.p, a.l, a.q};
  if (a.p > -1.0) return AsymptoticClass{a.C / (a.p + 1.0), a.p + 1.0, a.l, 1.0};
  return AsymptoticClass{a.C / (a.l + 1.0), 0.0, a.l + 1.0, 1.0};
}

// Leading class of the tails Σ_{k>r} a(k) of a convergent series.
inline std::optional<AsymptoticClass> tail_sum_class(const AsymptoticClass& a) {
  auto conv = series_converges(a);
  if (!conv || !*conv) return std::nullopt;
  if (!detail::near_one(a.q)) return AsymptoticClass{a.C * a.q / (1.0 - a.q), a.p, a.l, a.q};
  if (a.p < -1.0) return AsymptoticClass{a.C / (-a.p - 1.0), a.p + 1.0, a.l, 1.0};
  return AsymptoticClass{a.C / (-a.l - 1.0), 0.0, a.l + 1.0, 1.0};
}

inline std::string describe(const AsymptoticClass& a) {
  std::string s = format_number(a.C);
  if (a.p != 0.0) s += "*r^" + format_number(a.p);
  if (a.l != 0.0) s += "*log(r)^" + format_number(a.l);
  if (!detail::near_one(a.q)) s += "*" + format_number(a.q) + "^r";
  return s;
}

class Expression {
 public:
  static Expression parse(const std::string& text) {
    Parser p{text, 0};
    auto node = p.expr();
    p.skip();
    if (p.pos != text.size())
      throw ParseError("unexpected '" + std::string(1, text[p.pos]) + "' at position " +
                       std::to_string(p.pos) + " in \"" + text + "\"");
    return Expression(text, std::move(node));
  }

  const std::string& text() const { return text_; }

  Rational exact(long long r) const { return eval(*root_, Rational(r)); }
  double operator()(long long r) const { return to_double_checked(exact(r)); }

  std::optional<AsymptoticClass> asymptotic_class() const { return classify(*root_); }

 private:
  enum class Op { Num, Var, Neg, Add, Sub, Mul, Div, Pow };
  struct Node {
    Op op;
    Rational value;
    std::shared_ptr<const Node> a, b;
  };
  using Ptr = std::shared_ptr<const Node>;

  Expression(std::string text, Ptr root) : text_(std::move(text)), root_(std::move(root)) {}

  static Ptr make(Op op, Ptr a = nullptr, Ptr b = nullptr, Rational v = 0) {
    return std::make_shared<const Node>(Node{op, std::move(v), std::move(a), std::move(b)});
  }

  struct Parser {
    const std::string& s;
    std::size_t pos;

    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    [[noreturn]] void fail(const std::string& what) const {
      throw ParseError(what + " at position " + std::to_string(pos) + " in \"" + s + "\"");
    }

    Ptr expr() {
      Ptr left = term();
      for (;;) {
        if (eat('+')) left = make(Op::Add, left, term());
        else if (eat('-')) left = make(Op::Sub, left, term());
        else return left;
      }
    }
    Ptr term() {
      Ptr left = unary();
      for (;;) {
        if (eat('*')) left = make(Op::Mul, left, unary());
        else if (eat('/')) left = make(Op::Div, left, unary());
        else return left;
      }
    }
    Ptr unary() {
      if (eat('-')) return make(Op::Neg, unary());
      if (eat('+')) return unary();
      return power();
    }
    Ptr power() {
      Ptr base = atom();
      if (eat('^')) return make(Op::Pow, base, unary());
      return base;
    }
    Ptr atom() {
      skip();
      if (pos >= s.size()) fail("unexpected end of expression");
      if (eat('(')) {
        Ptr inner = expr();
        if (!eat(')')) fail("missing ')'");
        return inner;
      }
      if (s[pos] == 'r') {
        ++pos;
        if (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos])))
          fail("unknown identifier");
        return make(Op::Var);
      }
      if (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.') {
        BigInt num = 0, den = 1;
        bool digits = false, point = false;
        while (pos < s.size() &&
               (std::isdigit(static_cast<unsigned char>(s[pos])) || (s[pos] == '.' && !point))) {
          if (s[pos] == '.') {
            point = true;
          } else {
            num = num * 10 + (s[pos] - '0');
            if (point) den *= 10;
            digits = true;
          }
          ++pos;
        }
        if (!digits) fail("malformed number");
        return make(Op::Num, nullptr, nullptr, Rational(num, den));
      }
      fail("unexpected '" + std::string(1, s[pos]) + "'");
    }
  };

  static Rational eval(const Node& n, const Rational& r) {
    switch (n.op) {
      case Op::Num: return n.value;
      case Op::Var: return r;
      case Op::Neg: return -eval(*n.a, r);
      case Op::Add: return eval(*n.a, r) + eval(*n.b, r);
      case Op::Sub: return eval(*n.a, r) - eval(*n.b, r);
      case Op::Mul: return eval(*n.a, r) * eval(*n.b, r);
      case Op::Div: {
        const Rational d = eval(*n.b, r);
        if (d == 0) throw ParameterError("division by zero");
        return eval(*n.a, r) / d;
      }
      case Op::Pow: {
        const Rational e = eval(*n.b, r);
        if (denominator(e) != 1) throw ParameterError("non-integer exponent");
        if (abs(numerator(e)) > 1000000) throw ParameterError("exponent too large");
        return rational_pow(eval(*n.a, r), numerator(e));
      }
    }
    return 0;
  }

  // (slope, intercept) if the subtree is affine in r.
  static std::optional<std::pair<Rational, Rational>> affine(const Node& n) {
    using P = std::pair<Rational, Rational>;
    switch (n.op) {
      case Op::Num: return P{0, n.value};
      case Op::Var: return P{1, 0};
      case Op::Neg: {
        auto a = affine(*n.a);
        if (!a) return std::nullopt;
        return P{-a->first, -a->second};
      }
      case Op::Add:
      case Op::Sub: {
        auto a = affine(*n.a), b = affine(*n.b);
        if (!a || !b) return std::nullopt;
        const int s = n.op == Op::Add ? 1 : -1;
        return P{a->first + s * b->first, a->second + s * b->second};
      }
      case Op::Mul: {
        auto a = affine(*n.a), b = affine(*n.b);
        if (!a || !b) return std::nullopt;
        if (a->first != 0 && b->first != 0) return std::nullopt;
        return P{a->first * b->second + b->first * a->second, a->second * b->second};
      }
      case Op::Div: {
        auto a = affine(*n.a), b = affine(*n.b);
        if (!a || !b || b->first != 0 || b->second == 0) return std::nullopt;
        return P{a->first / b->second, a->second / b->second};
      }
      case Op::Pow: {
        auto a = affine(*n.a), b = affine(*n.b);
        if (!a || !b || a->first != 0 || b->first != 0 || denominator(b->second) != 1)
          return std::nullopt;
        return P{0, rational_pow(a->second, numerator(b->second))};
      }
    }
    return std::nullopt;
  }

  static std::optional<AsymptoticClass> classify(const Node& n) {
    switch (n.op) {
      case Op::Num: return AsymptoticClass{n.value.convert_to<double>(), 0, 0, 1};
      case Op::Var: return AsymptoticClass{1, 1, 0, 1};
      case Op::Neg: {
        auto a = classify(*n.a);
        if (!a) return std::nullopt;
        a->C = -a->C;
        return a;
      }
      case Op::Add:
      case Op::Sub: {
        auto a = classify(*n.a), b = classify(*n.b);
        if (!a || !b) return std::nullopt;
        if (n.op == Op::Sub) b->C = -b->C;
        if (a->zero()) return b;
        if (b->zero()) return a;
        const int cmp = detail::compare_growth(*a, *b);
        if (cmp > 0) return a;
        if (cmp < 0) return b;
        const double c = a->C + b->C;
        if (std::abs(c) <= 1e-14 * std::max(std::abs(a->C), std::abs(b->C))) return std::nullopt;
        a->C = c;
        return a;
      }
      case Op::Mul: {
        auto a = classify(*n.a), b = classify(*n.b);
        if (!a || !b) return std::nullopt;
        return *a * *b;
      }
      case Op::Div: {
        auto a = classify(*n.a), b = classify(*n.b);
        if (!a || !b || b->zero()) return std::nullopt;
        return *a * reciprocal(*b);
      }
      case Op::Pow: {
        auto e = affine(*n.b);
        if (!e) return std::nullopt;
        const double slope = e->first.convert_to<double>();
        const double icpt = e->second.convert_to<double>();
        auto base_affine = affine(*n.a);
        if (base_affine && base_affine->first == 0) {
          const double c = base_affine->second.convert_to<double>();
          if (e->first == 0) return AsymptoticClass{std::pow(c, icpt), 0, 0, 1};
          if (!(c > 0.0)) return std::nullopt;
          return AsymptoticClass{std::pow(c, icpt), 0, 0, std::pow(c, slope)};
        }
        if (e->first != 0 || denominator(e->second) != 1) return std::nullopt;
        auto a = classify(*n.a);
        if (!a || a->zero()) return std::nullopt;
        return AsymptoticClass{std::pow(a->C, icpt), a->p * icpt, a->l * icpt, std::pow(a->q, icpt)};
      }
    }
    return std::nullopt;
  }

  std::string text_;
  Ptr root_;
};

}  // namespace nlab
