#pragma once

#include "saddle/system.hpp"

#include <cstdlib>
#include <string>

namespace saddle::testing {

inline std::string data_path(const std::string& name) {
  const char* dir = std::getenv("SADDLE_DATA_DIR");
  return (dir ? std::string(dir) : std::string("data")) + "/" + name;
}

/// Linear saddle diag(l+, -l-) with identity noise and a box domain.
inline SaddleSystem linear_system(const Rational& lp, const Rational& lm,
                                  double box = 0.4) {
  SaddleSystem sys;
  sys.name = "linear";
  sys.A_entries[0][0] = lp;
  sys.A_entries[1][1] = -lm;
  sys.lambda_plus = lp;
  sys.lambda_minus = lm;
  sys.sigma.m[0][0] = Poly(Rational(1));
  sys.sigma.m[1][1] = Poly(Rational(1));
  sys.domain_V = ExitDomain::box(box, box);
  sys.x0 = {0.0, 0.3};
  return sys;
}

/// b = (x1 + x2^2, -x2): one non-resonant quadratic term.
inline SaddleSystem quad_system() {
  SaddleSystem sys = linear_system(1, 1);
  sys.name = "quad";
  sys.Q.c1.add_term(1, 0, 2);
  sys.guard_radius = 1.5;
  return sys;
}

/// b = (x1 + x1^2 x2, -x2): the resonant cubic benchmark.
inline SaddleSystem cubic_system() {
  SaddleSystem sys = linear_system(1, 1);
  sys.name = "cubic";
  sys.Q.c1.add_term(1, 2, 1);
  sys.guard_radius = 1.5;
  sys.x0 = {0.1, 0.3};
  return sys;
}

}  // namespace saddle::testing
