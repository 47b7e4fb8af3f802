#include "saddle/resonance.hpp"

#include <stdexcept>

namespace saddle {

namespace {

bool is_integer(const Rational& r) { return denominator(r) == 1; }

/// Candidate exponent pair of order r for the given family; integral iff
/// a resonant monomial of that order exists.
struct Candidate {
  Rational a1, a2;
};

Candidate candidate_plus(const Rational& lp, const Rational& lm, int r) {
  Rational s = lp + lm;
  return {(lp + r * lm) / s, Rational(r - 1) * lp / s};
}

Candidate candidate_minus(const Rational& lp, const Rational& lm, int r) {
  Rational s = lp + lm;
  return {Rational(r - 1) * lm / s, (Rational(r) * lp + lm) / s};
}

std::optional<MultiIndex> integral_index(const Candidate& c, int target) {
  if (!is_integer(c.a1) || !is_integer(c.a2)) return std::nullopt;
  return MultiIndex{static_cast<int>(numerator(c.a1)), static_cast<int>(numerator(c.a2)),
                    target};
}

/// Smallest order r >= 2 admitting a resonant monomial. For lambda_+/lambda_-
/// = a/b in lowest terms this is r = a + b + 1, but we just scan.
MultiIndex generating_relation(const Rational& lp, const Rational& lm) {
  for (int r = 2;; ++r) {
    if (auto idx = integral_index(candidate_plus(lp, lm, r), 1)) return *idx;
    if (auto idx = integral_index(candidate_minus(lp, lm, r), 2)) return *idx;
  }
}

}  // namespace

ResonanceReport resonant_indices(const Rational& lambda_plus,
                                 const Rational& lambda_minus, int r_max) {
  if (lambda_plus <= 0 || lambda_minus <= 0)
    throw std::invalid_argument("eigenvalue magnitudes must be positive");
  if (r_max < 2) throw std::invalid_argument("r_max must be at least 2");

  ResonanceReport rep;
  rep.lambda_plus = lambda_plus;
  rep.lambda_minus = lambda_minus;
  rep.r_max = r_max;

  for (int r = 2; r <= r_max; ++r) {
    if (auto idx = integral_index(candidate_plus(lambda_plus, lambda_minus, r), 1))
      rep.indices_plus.push_back(*idx);
    if (auto idx = integral_index(candidate_minus(lambda_plus, lambda_minus, r), 2))
      rep.indices_minus.push_back(*idx);
  }

  // A rational eigenvalue ratio always admits resonances at large enough
  // order; the pair is one-resonant and we report the smallest relation.
  rep.classification = ResonanceClass::OneResonant;
  rep.generating_relation = generating_relation(lambda_plus, lambda_minus);
  return rep;
}

PairClassification is_resonant_pair(const EigenvaluePair& pair) {
  if (pair.lambda_plus <= 0 || pair.lambda_minus <= 0)
    throw std::invalid_argument("eigenvalue magnitudes must be positive");
  if (pair.ratio_irrational)
    return {ResonanceClass::NonResonant, std::nullopt};
  return {ResonanceClass::OneResonant,
          generating_relation(pair.lambda_plus, pair.lambda_minus)};
}

std::vector<std::string> check_observations(const ResonanceReport& rep) {
  std::vector<std::string> violated;
  auto all = rep.indices_plus;
  all.insert(all.end(), rep.indices_minus.begin(), rep.indices_minus.end());

  // 1: no zero entries; a1+ and a2- never equal 1.
  for (const auto& idx : all) {
    if (idx.a1 == 0 || idx.a2 == 0) {
      violated.push_back("observation 1: zero entry in a resonant index");
      break;
    }
    if ((idx.target == 1 && idx.a1 == 1) || (idx.target == 2 && idx.a2 == 1)) {
      violated.push_back("observation 1: leading entry equal to 1");
      break;
    }
  }

  // 2: entries are increasing in r within each family.
  for (const auto* family : {&rep.indices_plus, &rep.indices_minus}) {
    for (size_t i = 1; i < family->size(); ++i) {
      const auto& prev = (*family)[i - 1];
      const auto& cur = (*family)[i];
      if (cur.order() <= prev.order() || cur.a1 <= prev.a1 || cur.a2 <= prev.a2) {
        violated.push_back("observation 2: entries not increasing in r");
        break;
      }
    }
  }

  // 3: no solutions at r = 2.
  for (const auto& idx : all)
    if (idx.order() == 2) {
      violated.push_back("observation 3: resonant index at r = 2");
      break;
    }

  // 4: coordinatewise bounds.
  for (const auto& idx : all) {
    bool ok = idx.target == 1 ? (idx.a1 >= 2 && idx.a2 >= 1) : (idx.a1 >= 1 && idx.a2 >= 2);
    if (!ok) {
      violated.push_back("observation 4: index below the coordinatewise bound");
      break;
    }
  }

  // 5: both exponents strictly positive, so the resonant part vanishes on
  // the axes.
  for (const auto& idx : all)
    if (idx.a1 < 1 || idx.a2 < 1) {
      violated.push_back("observation 5: monomial does not vanish on an axis");
      break;
    }

  return violated;
}

}  // namespace saddle
