#pragma once

// Poincare-Dulac normal form for polynomial saddle drifts with rational
// eigenvalues: the degree-by-degree homological elimination of non-resonant
// monomials, the truncated inverse of the conjugacy, and the transport of
// the SDE coefficients through the coordinate change.

#include "saddle/poly.hpp"
#include "saddle/resonance.hpp"
#include "saddle/system.hpp"

#include <vector>

namespace saddle {

struct NormalForm {
  int R = 2;              // truncation order
  PolyVec g;              // coordinate change, identity + higher order
  PolyVec f;              // order-R truncated compositional inverse of g
  PolyVec P;              // resonant polynomial drift part
  PolyMat sigma_tilde;    // (Dg)^-1 sigma(g(y)), truncated at order R
  PolyVec Psi;            // Ito correction, truncated at order R
  ResonanceReport resonance;
  double delta = 0.25;    // box half-widths, delta < delta_prime
  double delta_prime = 0.5;
};

/// Degree-by-degree homological elimination. Each non-resonant monomial
/// coefficient c at multi-index a, target j is absorbed into g with
/// coefficient c / (a.lambda - lambda_j); resonant coefficients stay in P.
/// The box half-width delta_prime is shrunk by halves until Dg is
/// invertible on the closed box.
NormalForm poincare_dulac(const SaddleSystem& system, int R);

/// Exact normal-form drift in the new coordinates: (Dg(y))^-1 b(g(y)),
/// evaluated numerically at a point (2x2 matrix inverse, no series
/// truncation).
Vec2 normal_form_drift_at(const SaddleSystem& system, const NormalForm& nf, Vec2 y);

/// Transported diffusion at a point: (Dg(y))^-1 sigma(g(y)).
Mat2 sigma_tilde_at(const SaddleSystem& system, const NormalForm& nf, Vec2 y);

/// Ito correction at a point: (1/2) sum_kl d2f_i/dx_k dx_l (g(y)) *
/// (sigma sigma^T)_kl(g(y)).
Vec2 psi_at(const SaddleSystem& system, const NormalForm& nf, Vec2 y);

/// Log-log regression slope of the max conjugacy residual
/// rho(y) = (Dg(y))^-1 b(g(y)) - Ay - P(y) over points sampled at each
/// scale. Contract: slope >= R+1 - 0.1. Returns +infinity when the
/// residual is zero to rounding at every scale.
double conjugacy_residual(const SaddleSystem& system, const NormalForm& nf,
                          const std::vector<double>& scales,
                          int points_per_scale = 64, uint64_t seed = 20240901);

struct HBoundsEstimate {
  double K1_hat = 0;
  double K2_hat = 0;
  bool pass = false;
};

/// Empirically fits the smallest constants with
/// |H_1| <= K1 y1^2 |y2| + K2 eps^2 and |H_2| <= K1 |y1| y2^2 + K2 eps^2
/// on sampled points of the box, where H_i = P_i + eps^2 Psi_i.
HBoundsEstimate verify_H_bounds(const SaddleSystem& system, const NormalForm& nf,
                                double eps, int samples, uint64_t seed = 20240902);

}  // namespace saddle
