#pragma once

// Saddle systems: drift b(x) = A x + Q(x) with A = diag(lambda_+, -lambda_-),
// polynomial nonlinearity Q, polynomial matrix diffusion sigma, and a
// polygonal exit domain.

#include "saddle/linalg.hpp"
#include "saddle/mixture.hpp"
#include "saddle/poly.hpp"

#include <optional>
#include <string>
#include <vector>

namespace saddle {

/// Convex polygonal exit domain with the origin strictly inside.
struct ExitDomain {
  std::vector<Vec2> vertices;  // counterclockwise

  static ExitDomain box(double half_x, double half_y) {
    return {{{half_x, -half_y}, {half_x, half_y}, {-half_x, half_y}, {-half_x, -half_y}}};
  }

  bool contains(Vec2 p) const;

  /// Outward unit normal of edge i (from vertex i to vertex i+1).
  Vec2 outward_normal(size_t i) const;

  /// First intersection of segment a->b with the boundary, as the
  /// parameter s in [0,1] and the edge index; empty if no crossing.
  struct Crossing {
    double s;
    size_t edge;
    Vec2 point;
  };
  std::optional<Crossing> first_crossing(Vec2 a, Vec2 b) const;
};

/// Initial perturbation law: X(0) = x0 + eps^alpha * xi.
struct InitialLaw {
  double alpha = 1.0;
  Mixture2D xi_law;
  bool collinearity_declared_ok = false;
};

struct SaddleSystem {
  std::string name;
  Rational A_entries[2][2] = {{1, 0}, {0, -1}};  // as given in the input file
  Rational lambda_plus{1};                       // = A11 when valid
  Rational lambda_minus{1};                      // = -A22 when valid
  PolyVec Q;                     // nonlinear drift part, valuation >= 2
  PolyMat sigma;                 // diffusion matrix, polynomial entries
  double lipschitz_bound = 10.0;
  double guard_radius = 4.0;     // trajectory-escape guard (sup-norm)
  ExitDomain domain_V;
  std::optional<Vec2> q_plus, q_minus;  // exit points of W^u on boundary
  Vec2 x0;                       // starting point on the stable manifold
  InitialLaw initial_law;

  double lp() const { return to_double(lambda_plus); }
  double lm() const { return to_double(lambda_minus); }

  /// Full drift b = A x + Q as an exact polynomial field.
  PolyVec drift_poly() const {
    PolyVec b = Q;
    b.c1 += Poly::monomial(lambda_plus, 1, 0);
    b.c2 += Poly::monomial(-lambda_minus, 0, 1);
    return b;
  }

  Vec2 drift(Vec2 x) const {
    return {lp() * x.x + Q.c1.eval(x.x, x.y), -lm() * x.y + Q.c2.eval(x.x, x.y)};
  }
  Mat2 drift_jacobian(Vec2 x) const;
  Mat2 sigma_at(Vec2 x) const;
};

struct ValidationReport {
  bool valid = true;
  double lambda_plus = 0, lambda_minus = 0;
  std::vector<std::string> failures;
  void fail(std::string msg) {
    valid = false;
    failures.push_back(std::move(msg));
  }
};

/// Checks all SaddleSystem invariants; collects failures, never throws.
ValidationReport validate_system(const SaddleSystem& system);

/// Loads a system description from a JSON file (schema in the README).
SaddleSystem load_system(const std::string& path);
SaddleSystem parse_system(const std::string& json_text);

}  // namespace saddle
