#pragma once

// Resonance classification for a hyperbolic eigenvalue pair (lambda_+, -lambda_-).
//
// Everything here is exact rational arithmetic: resonance is a
// number-theoretic property and tolerance-based detection is refused.

#include "saddle/poly.hpp"

#include <optional>
#include <string>
#include <vector>

namespace saddle {

/// Exponent pair of a resonant monomial x1^a1 x2^a2 e_target.
/// target 1 is the "+" family (a.lambda = lambda_+),
/// target 2 the "-" family (a.lambda = -lambda_-).
struct MultiIndex {
  int a1 = 0;
  int a2 = 0;
  int target = 1;
  int order() const { return a1 + a2; }
  friend bool operator==(const MultiIndex& x, const MultiIndex& y) {
    return x.a1 == y.a1 && x.a2 == y.a2 && x.target == y.target;
  }
};

enum class ResonanceClass { NonResonant, OneResonant };

struct ResonanceReport {
  ResonanceClass classification = ResonanceClass::NonResonant;
  Rational lambda_plus{1}, lambda_minus{1};
  std::optional<MultiIndex> generating_relation;  // smallest-order relation
  std::vector<MultiIndex> indices_plus;           // target 1, order <= r_max
  std::vector<MultiIndex> indices_minus;          // target 2, order <= r_max
  int r_max = 0;
};

/// Enumerates resonant multi-indices of order 2..r_max by evaluating the
/// closed-form candidate pairs in exact arithmetic and keeping the integral
/// ones. Any rational ratio is one-resonant; the generating relation is
/// reported even when its order exceeds r_max.
ResonanceReport resonant_indices(const Rational& lambda_plus,
                                 const Rational& lambda_minus, int r_max);

/// Eigenvalue pair whose ratio may be declared irrational symbolically
/// (test fixtures such as lambda_- = sqrt(2) lambda_+).
struct EigenvaluePair {
  Rational lambda_plus{1};
  Rational lambda_minus{1};
  bool ratio_irrational = false;
};

/// Classification plus the generating relation for rational ratios.
struct PairClassification {
  ResonanceClass classification;
  std::optional<MultiIndex> generating_relation;
};
PairClassification is_resonant_pair(const EigenvaluePair& pair);

/// Checks the five structural observations on an enumerated report:
///   1. no zero entries; a1 of the "+" family and a2 of the "-" family never 1
///   2. entries increase with the order r
///   3. no solutions at r = 2
///   4. coordinatewise bounds alpha+ >= (2,1) and alpha- >= (1,2)
///   5. consequently P vanishes when y1 = 0 or y2 = 0 (exponent positivity)
/// Returns the list of violated observations (expected empty).
std::vector<std::string> check_observations(const ResonanceReport& report);

}  // namespace saddle
