#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "saddle/poly.hpp"

using namespace saddle;

TEST_CASE("rational parsing round-trips") {
  CHECK(parse_rational("3/4") == Rational(3, 4));
  CHECK(parse_rational("-7/2") == Rational(-7, 2));
  CHECK(parse_rational("5") == Rational(5));
  CHECK(rational_to_string(Rational(-1, 3)) == "-1/3");
  CHECK(rational_to_string(Rational(4, 2)) == "2");
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
}

TEST_CASE("poly arithmetic and degrees") {
  Poly p = Poly::monomial(2, 1, 0) + Poly::monomial(-3, 0, 2);
  CHECK(p.coeff(1, 0) == 2);
  CHECK(p.coeff(0, 2) == -3);
  CHECK(p.min_degree() == 1);
  CHECK(p.max_degree() == 2);
  CHECK((p - p).is_zero());

  Poly q = p * p;
  CHECK(q.coeff(2, 0) == 4);
  CHECK(q.coeff(1, 2) == -12);
  CHECK(q.coeff(0, 4) == 9);
  CHECK(q.eval(0.5, 0.25) == doctest::Approx(std::pow(2 * 0.5 - 3 * 0.0625, 2)));

  CHECK(q.truncated(2).max_degree() == 2);
  CHECK(q.degree_part(3).coeff(1, 2) == -12);
  CHECK(q.degree_part(3).coeff(2, 0) == 0);
}

TEST_CASE("derivative and exact evaluation") {
  Poly p = Poly::monomial(Rational(1, 3), 2, 3);
  CHECK(p.derivative(1).coeff(1, 3) == Rational(2, 3));
  CHECK(p.derivative(2).coeff(2, 2) == 1);
  CHECK(p.eval_exact(Rational(1, 2), Rational(2)) == Rational(1, 3) * Rational(1, 4) * 8);
}

TEST_CASE("substitution matches evaluation") {
  Poly p = Poly::monomial(1, 2, 1) + Poly::monomial(-2, 0, 1);
  Poly g1 = Poly::var(1) + Poly::monomial(1, 0, 2);
  Poly g2 = Poly::var(2);
  Poly s = p.substitute(g1, g2, 8);
  double x = 0.3, y = -0.2;
  CHECK(s.eval(x, y) == doctest::Approx(p.eval(x + y * y, y)).epsilon(1e-12));
}

TEST_CASE("series inverse of 1 + x") {
  Poly p = Poly(Rational(1)) + Poly::var(1);
  Poly inv = series_inverse(p, 5);
  for (int k = 0; k <= 5; ++k) CHECK(inv.coeff(k, 0) == (k % 2 ? Rational(-1) : Rational(1)));
  CHECK(((p * inv).truncated(5) - Poly(Rational(1))).is_zero());
  CHECK_THROWS_AS(series_inverse(Poly::var(1), 3), std::invalid_argument);
}

TEST_CASE("series matrix inverse") {
  PolyMat m;
  m.m[0][0] = Poly(Rational(1));
  m.m[0][1] = Poly::monomial(-2, 0, 1);  // Dg of g = (y1 - y2^2, y2)
  m.m[1][1] = Poly(Rational(1));
  PolyMat inv = series_matrix_inverse(m, 4);
  PolyMat prod = m * inv;
  CHECK((prod.m[0][0].truncated(4) - Poly(Rational(1))).is_zero());
  CHECK(prod.m[0][1].truncated(4).is_zero());
  CHECK(prod.m[1][0].truncated(4).is_zero());
  CHECK((prod.m[1][1].truncated(4) - Poly(Rational(1))).is_zero());
}

TEST_CASE("compositional inverse") {
  PolyVec g{Poly::var(1) + Poly::monomial(Rational(-1, 3), 0, 2), Poly::var(2)};
  PolyVec f = compositional_inverse(g, 4);
  CHECK(f.c1.coeff(0, 2) == Rational(1, 3));
  PolyVec comp = g.substitute(f, 4);
  CHECK((comp.c1 - Poly::var(1)).is_zero());
  CHECK((comp.c2 - Poly::var(2)).is_zero());

  // A genuinely nonlinear two-variable map: inverse composes to identity
  // through the truncation order.
  PolyVec g2{Poly::var(1) + Poly::monomial(1, 1, 1), Poly::var(2) + Poly::monomial(2, 2, 0)};
  PolyVec f2 = compositional_inverse(g2, 6);
  PolyVec comp2 = g2.substitute(f2, 6);
  CHECK((comp2.c1 - Poly::var(1)).truncated(6).is_zero());
  CHECK((comp2.c2 - Poly::var(2)).truncated(6).is_zero());
}
