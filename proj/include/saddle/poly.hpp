#pragma once

// Bivariate polynomials with exact rational coefficients.
//
// All structural computations (normal forms, resonance filtering) run on
// exact arithmetic; only evaluation drops to double.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace saddle {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return static_cast<double>(r); }

/// Parses "p", "p/q" or "-p/q".
inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rational(BigInt(s));
  BigInt num(s.substr(0, slash));
  BigInt den(s.substr(slash + 1));
  if (den == 0) throw std::invalid_argument("rational with zero denominator: " + s);
  return Rational(num, den);
}

inline std::string rational_to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

/// Exponent pair of a monomial x1^a1 * x2^a2.
struct Expo {
  int a1 = 0;
  int a2 = 0;
  int order() const { return a1 + a2; }
  friend bool operator<(const Expo& x, const Expo& y) {
    if (x.a1 != y.a1) return x.a1 < y.a1;
    return x.a2 < y.a2;
  }
  friend bool operator==(const Expo& x, const Expo& y) {
    return x.a1 == y.a1 && x.a2 == y.a2;
  }
};

/// Sparse bivariate polynomial over the rationals.
class Poly {
 public:
  Poly() = default;
  explicit Poly(const Rational& c) {
    if (c != 0) terms_[{0, 0}] = c;
  }

  static Poly var(int i) {
    Poly p;
    p.terms_[{i == 1 ? 1 : 0, i == 2 ? 1 : 0}] = 1;
    return p;
  }
  static Poly monomial(const Rational& c, int a1, int a2) {
    Poly p;
    if (c != 0) p.terms_[{a1, a2}] = c;
    return p;
  }

  const std::map<Expo, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Rational& c, int a1, int a2) {
    if (c == 0) return;
    auto& slot = terms_[{a1, a2}];
    slot += c;
    if (slot == 0) terms_.erase({a1, a2});
  }

  Rational coeff(int a1, int a2) const {
    auto it = terms_.find({a1, a2});
    return it == terms_.end() ? Rational(0) : it->second;
  }

  /// Smallest total degree of a nonzero term, or -1 for the zero polynomial.
  int min_degree() const {
    int best = -1;
    for (const auto& [e, c] : terms_)
      if (best < 0 || e.order() < best) best = e.order();
    return best;
  }
  int max_degree() const {
    int best = -1;
    for (const auto& [e, c] : terms_)
      if (e.order() > best) best = e.order();
    return best;
  }

  Poly operator-() const {
    Poly r = *this;
    for (auto& [e, c] : r.terms_) c = -c;
    return r;
  }
  Poly& operator+=(const Poly& o) {
    for (const auto& [e, c] : o.terms_) add_term(c, e.a1, e.a2);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    for (const auto& [e, c] : o.terms_) add_term(-c, e.a1, e.a2);
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }

  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_)
        r.add_term(ca * cb, ea.a1 + eb.a1, ea.a2 + eb.a2);
    return r;
  }
  friend Poly operator*(const Rational& c, const Poly& p) {
    Poly r;
    for (const auto& [e, pc] : p.terms_) r.add_term(c * pc, e.a1, e.a2);
    return r;
  }

  /// Drops all terms of total degree > maxdeg.
  Poly truncated(int maxdeg) const {
    Poly r;
    for (const auto& [e, c] : terms_)
      if (e.order() <= maxdeg) r.terms_[e] = c;
    return r;
  }

  /// Homogeneous part of the given total degree.
  Poly degree_part(int deg) const {
    Poly r;
    for (const auto& [e, c] : terms_)
      if (e.order() == deg) r.terms_[e] = c;
    return r;
  }

  Poly derivative(int var) const {
    Poly r;
    for (const auto& [e, c] : terms_) {
      if (var == 1 && e.a1 > 0) r.add_term(c * e.a1, e.a1 - 1, e.a2);
      if (var == 2 && e.a2 > 0) r.add_term(c * e.a2, e.a1, e.a2 - 1);
    }
    return r;
  }

  /// Substitutes x1 <- p1, x2 <- p2, truncating intermediate results at maxdeg.
  Poly substitute(const Poly& p1, const Poly& p2, int maxdeg) const {
    // Horner over cached powers; fine at the small degrees we use.
    int dmax = max_degree();
    std::vector<Poly> pow1(std::max(dmax, 0) + 1), pow2(std::max(dmax, 0) + 1);
    pow1[0] = Poly(Rational(1));
    pow2[0] = Poly(Rational(1));
    for (int k = 1; k <= dmax; ++k) {
      pow1[k] = (pow1[k - 1] * p1).truncated(maxdeg);
      pow2[k] = (pow2[k - 1] * p2).truncated(maxdeg);
    }
    Poly r;
    for (const auto& [e, c] : terms_)
      r += (c * (pow1[e.a1] * pow2[e.a2]).truncated(maxdeg));
    return r.truncated(maxdeg);
  }

  double eval(double x1, double x2) const {
    double s = 0;
    for (const auto& [e, c] : terms_)
      s += to_double(c) * std::pow(x1, e.a1) * std::pow(x2, e.a2);
    return s;
  }

  Rational eval_exact(const Rational& x1, const Rational& x2) const {
    Rational s = 0;
    for (const auto& [e, c] : terms_) {
      Rational t = c;
      for (int k = 0; k < e.a1; ++k) t *= x1;
      for (int k = 0; k < e.a2; ++k) t *= x2;
      s += t;
    }
    return s;
  }

 private:
  std::map<Expo, Rational> terms_;
};

/// Multiplicative inverse of a polynomial with constant term 1, as a
/// truncated series: 1/(1+e) = sum (-e)^k.
inline Poly series_inverse(const Poly& p, int maxdeg) {
  if (p.coeff(0, 0) != 1)
    throw std::invalid_argument("series_inverse requires constant term 1");
  Poly e = p - Poly(Rational(1));
  Poly r(Rational(1));
  Poly ek(Rational(1));
  for (int k = 1; k <= maxdeg; ++k) {
    ek = (ek * (-e)).truncated(maxdeg);
    if (ek.is_zero()) break;
    r += ek;
  }
  return r;
}

/// A planar polynomial vector field / map.
struct PolyVec {
  Poly c1, c2;

  static PolyVec identity() { return {Poly::var(1), Poly::var(2)}; }
  bool is_zero() const { return c1.is_zero() && c2.is_zero(); }

  PolyVec truncated(int maxdeg) const {
    return {c1.truncated(maxdeg), c2.truncated(maxdeg)};
  }
  PolyVec substitute(const PolyVec& g, int maxdeg) const {
    return {c1.substitute(g.c1, g.c2, maxdeg), c2.substitute(g.c1, g.c2, maxdeg)};
  }
  friend PolyVec operator+(const PolyVec& a, const PolyVec& b) {
    return {a.c1 + b.c1, a.c2 + b.c2};
  }
  friend PolyVec operator-(const PolyVec& a, const PolyVec& b) {
    return {a.c1 - b.c1, a.c2 - b.c2};
  }
};

/// 2x2 polynomial matrix (Jacobians, diffusion matrices).
struct PolyMat {
  Poly m[2][2];

  static PolyMat jacobian(const PolyVec& v) {
    PolyMat j;
    j.m[0][0] = v.c1.derivative(1);
    j.m[0][1] = v.c1.derivative(2);
    j.m[1][0] = v.c2.derivative(1);
    j.m[1][1] = v.c2.derivative(2);
    return j;
  }

  Poly det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

  PolyMat substitute(const PolyVec& g, int maxdeg) const {
    PolyMat r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        r.m[i][j] = m[i][j].substitute(g.c1, g.c2, maxdeg);
    return r;
  }

  PolyVec apply(const PolyVec& v, int maxdeg) const {
    return {(m[0][0] * v.c1 + m[0][1] * v.c2).truncated(maxdeg),
            (m[1][0] * v.c1 + m[1][1] * v.c2).truncated(maxdeg)};
  }

  friend PolyMat operator*(const PolyMat& a, const PolyMat& b) {
    PolyMat r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j];
    return r;
  }
};

/// Truncated series inverse of a matrix with Dg(0) = I:
/// adj(M) * (1/det M), both as series.
inline PolyMat series_matrix_inverse(const PolyMat& a, int maxdeg) {
  Poly invdet = series_inverse(a.det().truncated(maxdeg), maxdeg);
  PolyMat r;
  r.m[0][0] = (a.m[1][1] * invdet).truncated(maxdeg);
  r.m[0][1] = (-a.m[0][1] * invdet).truncated(maxdeg);
  r.m[1][0] = (-a.m[1][0] * invdet).truncated(maxdeg);
  r.m[1][1] = (a.m[0][0] * invdet).truncated(maxdeg);
  return r;
}

/// Compositional inverse of a map g = id + h.o.t., truncated at maxdeg.
/// Fixed point iteration f <- id - (g - id) o f.
inline PolyVec compositional_inverse(const PolyVec& g, int maxdeg) {
  PolyVec id = PolyVec::identity();
  PolyVec tail = (g - id).truncated(maxdeg);
  PolyVec f = id;
  for (int k = 0; k < maxdeg; ++k) {
    PolyVec next = (id - tail.substitute(f, maxdeg)).truncated(maxdeg);
    if ((next - f).is_zero()) break;
    f = next;
  }
  return f;
}

}  // namespace saddle
