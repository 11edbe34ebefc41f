#pragma once

#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include "gge/common.hpp"

namespace gge {

// Dense univariate polynomial, coefficient of x^k at c[k].
template <typename Scalar>
struct Polynomial {
  std::vector<Scalar> c;

  Polynomial() = default;
  explicit Polynomial(std::vector<Scalar> coeffs) : c(std::move(coeffs)) { trim(); }

  static Polynomial monomial(int deg, Scalar a = Scalar(1)) {
    Polynomial p;
    p.c.assign(deg + 1, Scalar(0));
    p.c[deg] = a;
    return p;
  }

  int degree() const {
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k)
      if (c[k] != Scalar(0)) return k;
    return 0;
  }
  Scalar coeff(int k) const { return (k >= 0 && k < (int)c.size()) ? c[k] : Scalar(0); }
  Scalar leading() const { return coeff(degree()); }
  bool zero() const { return degree() == 0 && coeff(0) == Scalar(0); }

  template <typename T>
  T operator()(T x) const {
    T acc = T(0);
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) acc = acc * x + T(c[k]);
    return acc;
  }

  Polynomial derivative() const {
    Polynomial d;
    if (c.size() <= 1) return d;
    d.c.resize(c.size() - 1);
    for (size_t k = 1; k < c.size(); ++k) d.c[k - 1] = Scalar(double(k)) * c[k];
    return d;
  }

  void trim() {
    while (c.size() > 1 && c.back() == Scalar(0)) c.pop_back();
  }
};

using PolyZ = Polynomial<cplx>;
using PolyD = Polynomial<double>;

inline bool poly_is_real(const PolyZ& p, double tol = 0.0) {
  for (const auto& z : p.c)
    if (std::abs(z.imag()) > tol) return false;
  return true;
}

inline PolyZ to_complex(const PolyD& p) {
  PolyZ q;
  q.c.assign(p.c.begin(), p.c.end());
  return q;
}

// Parses "x^4 + 0.5x^2", "z", "-2i z^3 + (0.5+1i)", "0.25*x^2 - x".
// Variable letter may be x or z; coefficients real or purely imaginary
// literals, or "(re+imi)" pairs.
PolyZ parse_polynomial(const std::string& text);

std::string polynomial_to_string(const PolyZ& p, char var = 'x');

// ------------------------------------------------------------ implementation

namespace detail {

struct PolyParser {
  const std::string& s;
  size_t i = 0;
  explicit PolyParser(const std::string& str) : s(str) {}

  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  bool peek_var() {
    skip_ws();
    return i < s.size() && (s[i] == 'x' || s[i] == 'z' || s[i] == 'X' || s[i] == 'Z');
  }

  double number() {
    skip_ws();
    size_t start = i;
    while (i < s.size() &&
           (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.' || s[i] == 'e' ||
            s[i] == 'E' ||
            ((s[i] == '+' || s[i] == '-') && i > start && (s[i - 1] == 'e' || s[i - 1] == 'E'))))
      ++i;
    require(i > start, ErrorCode::DomainError, "expected number in potential at '" + s.substr(start) + "'");
    return std::stod(s.substr(start, i - start));
  }

  // coefficient: [number][i] | i | (re+imi)
  cplx coefficient(bool* found) {
    skip_ws();
    *found = true;
    if (eat('(')) {
      double re = signed_number();
      skip_ws();
      double im = 0;
      if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        im = signed_number();
        require(eat('i') || eat('j'), ErrorCode::DomainError, "expected i in complex literal");
      } else if (eat('i') || eat('j')) {
        im = re;
        re = 0;
      }
      require(eat(')'), ErrorCode::DomainError, "expected ) in complex literal");
      return {re, im};
    }
    skip_ws();
    if (i < s.size() && (s[i] == 'i' || s[i] == 'j') &&
        (i + 1 >= s.size() || !std::isalnum(static_cast<unsigned char>(s[i + 1])))) {
      ++i;
      return {0.0, 1.0};
    }
    if (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) {
      double v = number();
      if (i < s.size() && (s[i] == 'i' || s[i] == 'j')) {
        ++i;
        return {0.0, v};
      }
      return {v, 0.0};
    }
    *found = false;
    return {1.0, 0.0};
  }

  double signed_number() {
    skip_ws();
    double sign = 1.0;
    while (i < s.size() && (s[i] == '+' || s[i] == '-')) {
      if (s[i] == '-') sign = -sign;
      ++i;
      skip_ws();
    }
    return sign * number();
  }

  PolyZ parse() {
    std::vector<cplx> c;
    auto bump = [&](int deg, cplx v) {
      if ((int)c.size() <= deg) c.resize(deg + 1, cplx(0));
      c[deg] += v;
    };
    skip_ws();
    require(i < s.size(), ErrorCode::DomainError, "empty potential string");
    while (true) {
      skip_ws();
      if (i >= s.size()) break;
      double sign = 1.0;
      while (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        if (s[i] == '-') sign = -sign;
        ++i;
        skip_ws();
      }
      bool have_coeff = false;
      cplx a = coefficient(&have_coeff);
      eat('*');
      int deg = 0;
      if (peek_var()) {
        ++i;
        deg = 1;
        if (eat('^')) deg = static_cast<int>(number());
      } else {
        require(have_coeff, ErrorCode::DomainError, "dangling term in potential '" + s + "'");
      }
      while (eat('/')) {
        double den = number();
        require(den != 0.0, ErrorCode::DomainError, "division by zero in potential");
        a /= den;
      }
      bump(deg, sign * a);
    }
    PolyZ p;
    p.c = std::move(c);
    if (p.c.empty()) p.c.push_back(cplx(0));
    return p;
  }
};

}  // namespace detail

inline PolyZ parse_polynomial(const std::string& text) {
  detail::PolyParser pp(text);
  return pp.parse();
}

inline std::string polynomial_to_string(const PolyZ& p, char var) {
  std::string out;
  for (int k = p.degree(); k >= 0; --k) {
    cplx a = p.coeff(k);
    if (a == cplx(0) && !(k == 0 && out.empty())) continue;
    if (!out.empty()) out += " + ";
    if (a.imag() == 0.0)
      out += fmt17(a.real());
    else
      out += "(" + fmt17(a.real()) + (a.imag() >= 0 ? "+" : "") + fmt17(a.imag()) + "i)";
    if (k >= 1) {
      out += '*';
      out += var;
      if (k > 1) out += "^" + std::to_string(k);
    }
  }
  return out.empty() ? "0" : out;
}

}  // namespace gge
