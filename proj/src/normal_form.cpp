#include "saddle/normal_form.hpp"

#include "saddle/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace saddle {

namespace {

/// a.lambda - lambda_j with lambda = (lambda_+, -lambda_-); the homological
/// divisor. Zero exactly when the monomial is resonant.
Rational divisor(const Rational& lp, const Rational& lm, Expo e, int target) {
  Rational adot = Rational(e.a1) * lp - Rational(e.a2) * lm;
  return adot - (target == 1 ? lp : -lm);
}

/// (Dg)^-1 b(g(y)) truncated at order maxdeg, exact coefficients.
PolyVec pushforward_drift(const PolyVec& b, const PolyVec& g, int maxdeg) {
  PolyMat dginv = series_matrix_inverse(PolyMat::jacobian(g), maxdeg);
  PolyVec bog = b.substitute(g, maxdeg);
  return dginv.apply(bog, maxdeg);
}

Mat2 eval_mat(const PolyMat& m, Vec2 y) {
  Mat2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r(i, j) = m.m[i][j].eval(y.x, y.y);
  return r;
}

Vec2 eval_vec(const PolyVec& v, Vec2 y) {
  return {v.c1.eval(y.x, y.y), v.c2.eval(y.x, y.y)};
}

}  // namespace

NormalForm poincare_dulac(const SaddleSystem& sys, int R) {
  if (R < 2) throw std::invalid_argument("poincare_dulac: R must be at least 2");
  auto validation = validate_system(sys);
  if (!validation.valid)
    throw std::invalid_argument("poincare_dulac: invalid system: " +
                                (validation.failures.empty() ? "" : validation.failures[0]));

  const Rational lp = sys.lambda_plus, lm = sys.lambda_minus;
  PolyVec b = sys.drift_poly();

  NormalForm nf;
  nf.R = R;
  nf.resonance = resonant_indices(lp, lm, R);
  nf.g = PolyVec::identity();

  for (int k = 2; k <= R; ++k) {
    PolyVec btil = pushforward_drift(b, nf.g, R);
    for (int comp = 1; comp <= 2; ++comp) {
      Poly part = (comp == 1 ? btil.c1 : btil.c2).degree_part(k);
      for (const auto& [e, c] : part.terms()) {
        Rational d = divisor(lp, lm, e, comp);
        if (d == 0) continue;  // resonant: stays in P
        // Adding h = (c/d) y^a e_j to g changes the degree-k part of the
        // pushforward by -c y^a e_j, cancelling this term.
        Poly& gc = comp == 1 ? nf.g.c1 : nf.g.c2;
        gc += Poly::monomial(c / d, e.a1, e.a2);
      }
    }
  }

  // Final pushforward: linear part + resonant P (+ order R+1 residual,
  // dropped by truncation).
  PolyVec btil = pushforward_drift(b, nf.g, R);
  nf.P = btil;
  nf.P.c1.add_term(-lp, 1, 0);
  nf.P.c2.add_term(lm, 0, 1);
  for (const Poly* pc : {&nf.P.c1, &nf.P.c2}) {
    int comp = pc == &nf.P.c1 ? 1 : 2;
    for (const auto& [e, c] : pc->terms()) {
      if (divisor(lp, lm, e, comp) != 0)
        throw std::logic_error("internal consistency failure: non-resonant term "
                               "survived homological elimination");
    }
  }

  nf.f = compositional_inverse(nf.g, R);

  // Transported SDE coefficients as order-R polynomial approximations.
  PolyMat dginv = series_matrix_inverse(PolyMat::jacobian(nf.g), R);
  PolyMat prod = dginv * sys.sigma.substitute(nf.g, R);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) nf.sigma_tilde.m[i][j] = prod.m[i][j].truncated(R);

  PolyMat ssT;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      ssT.m[i][j] = sys.sigma.m[i][0] * sys.sigma.m[j][0] + sys.sigma.m[i][1] * sys.sigma.m[j][1];
  for (int i = 0; i < 2; ++i) {
    const Poly& fi = i == 0 ? nf.f.c1 : nf.f.c2;
    Poly acc;
    for (int k = 1; k <= 2; ++k)
      for (int l = 1; l <= 2; ++l)
        acc += fi.derivative(k).derivative(l) * ssT.m[k - 1][l - 1];
    Poly& target = i == 0 ? nf.Psi.c1 : nf.Psi.c2;
    target = (Rational(1, 2) * acc).substitute(nf.g.c1, nf.g.c2, R);
  }

  // A linear conjugacy is globally invertible; keep a roomier box there.
  if ((nf.g - PolyVec::identity()).is_zero()) {
    nf.delta_prime = 1.0;
    nf.delta = 0.5;
  }

  // Shrink the box geometrically until Dg is invertible on it.
  for (int attempt = 0; attempt < 60; ++attempt) {
    bool ok = true;
    const int grid = 17;
    for (int i = 0; i < grid && ok; ++i)
      for (int j = 0; j < grid && ok; ++j) {
        Vec2 y{-nf.delta_prime + 2 * nf.delta_prime * i / (grid - 1.0),
               -nf.delta_prime + 2 * nf.delta_prime * j / (grid - 1.0)};
        if (std::abs(eval_mat(PolyMat::jacobian(nf.g), y).det()) < 1e-6) ok = false;
      }
    if (ok) break;
    nf.delta_prime /= 2;
    nf.delta /= 2;
  }

  return nf;
}

Vec2 normal_form_drift_at(const SaddleSystem& sys, const NormalForm& nf, Vec2 y) {
  Vec2 x = eval_vec(nf.g, y);
  Mat2 dg = eval_mat(PolyMat::jacobian(nf.g), y);
  return dg.inverse() * sys.drift(x);
}

Mat2 sigma_tilde_at(const SaddleSystem& sys, const NormalForm& nf, Vec2 y) {
  Vec2 x = eval_vec(nf.g, y);
  Mat2 dg = eval_mat(PolyMat::jacobian(nf.g), y);
  return dg.inverse() * sys.sigma_at(x);
}

Vec2 psi_at(const SaddleSystem& sys, const NormalForm& nf, Vec2 y) {
  Vec2 x = eval_vec(nf.g, y);
  Mat2 s = sys.sigma_at(x);
  Mat2 a = s * s.transpose();
  Vec2 out;
  for (int i = 0; i < 2; ++i) {
    const Poly& fi = i == 0 ? nf.f.c1 : nf.f.c2;
    double acc = 0;
    for (int k = 1; k <= 2; ++k)
      for (int l = 1; l <= 2; ++l)
        acc += fi.derivative(k).derivative(l).eval(x.x, x.y) * a(k - 1, l - 1);
    out[i] = 0.5 * acc;
  }
  return out;
}

double conjugacy_residual(const SaddleSystem& sys, const NormalForm& nf,
                          const std::vector<double>& scales, int points_per_scale,
                          uint64_t seed) {
  if (scales.size() < 2)
    throw std::invalid_argument("conjugacy_residual: need at least two scales");
  for (size_t i = 1; i < scales.size(); ++i)
    if (scales[i] >= scales[i - 1] || scales[i] <= 0 || scales[0] >= nf.delta_prime)
      throw std::invalid_argument("conjugacy_residual: scales must decrease within (0, delta')");

  Mat2 A = Mat2::diag(sys.lp(), -sys.lm());
  Rng rng(seed, 0);
  std::vector<double> log_res, log_scale;
  bool all_zero = true;
  for (double s : scales) {
    double worst = 0;
    for (int k = 0; k < points_per_scale; ++k) {
      Vec2 y{s * (2 * rng.next_uniform() - 1), s * (2 * rng.next_uniform() - 1)};
      Mat2 dg = eval_mat(PolyMat::jacobian(nf.g), y);
      if (std::abs(dg.det()) < 1e-12)
        throw std::domain_error("conjugacy_residual: singular Dg inside the box");
      Vec2 rho = normal_form_drift_at(sys, nf, y) - A * y - eval_vec(nf.P, y);
      worst = std::max(worst, std::max(std::abs(rho.x), std::abs(rho.y)));
    }
    if (worst > 1e-14) all_zero = false;
    log_res.push_back(std::log(std::max(worst, 1e-300)));
    log_scale.push_back(std::log(s));
  }
  if (all_zero) return std::numeric_limits<double>::infinity();

  double mx = 0, my = 0;
  for (size_t i = 0; i < scales.size(); ++i) {
    mx += log_scale[i];
    my += log_res[i];
  }
  mx /= scales.size();
  my /= scales.size();
  double num = 0, den = 0;
  for (size_t i = 0; i < scales.size(); ++i) {
    num += (log_scale[i] - mx) * (log_res[i] - my);
    den += (log_scale[i] - mx) * (log_scale[i] - mx);
  }
  return num / den;
}

HBoundsEstimate verify_H_bounds(const SaddleSystem& sys, const NormalForm& nf, double eps,
                                int samples, uint64_t seed) {
  if (eps < 0) throw std::invalid_argument("verify_H_bounds: eps must be nonnegative");
  Rng rng(seed, 0);
  HBoundsEstimate est;
  for (int k = 0; k < samples; ++k) {
    Vec2 y{nf.delta_prime * (2 * rng.next_uniform() - 1),
           nf.delta_prime * (2 * rng.next_uniform() - 1)};
    Vec2 p = eval_vec(nf.P, y);
    double b1 = y.x * y.x * std::abs(y.y);
    double b2 = std::abs(y.x) * y.y * y.y;
    if (b1 > 0) est.K1_hat = std::max(est.K1_hat, std::abs(p.x) / b1);
    if (b2 > 0) est.K1_hat = std::max(est.K1_hat, std::abs(p.y) / b2);
    if (eps > 0) {
      Vec2 psi = psi_at(sys, nf, y);
      est.K2_hat = std::max(est.K2_hat, std::max(std::abs(psi.x), std::abs(psi.y)));
    }
  }
  est.pass = std::isfinite(est.K1_hat) && std::isfinite(est.K2_hat);
  return est;
}

}  // namespace saddle
