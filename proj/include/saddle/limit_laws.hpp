#pragma once

// Exact numerical realization of the limiting exit objects: the beta
// exponent, the admissible p-range, the quadrature variances of N+ and N,
// the Gaussian pushforward along deterministic legs, the transversal
// projection, and samplers for eta0, theta, Theta' and the composed Theta.

#include "saddle/flow.hpp"
#include "saddle/mixture.hpp"
#include "saddle/normal_form.hpp"
#include "saddle/rng.hpp"
#include "saddle/system.hpp"

#include <functional>
#include <utility>

namespace saddle {

enum class CaseTag { AlphaLmGreater, AlphaLmEqual, AlphaLmLess };

/// beta = 1 when alpha lambda_- >= lambda_+, else alpha lambda_- / lambda_+.
double beta_exponent(double alpha, double lambda_plus, double lambda_minus);

CaseTag classify_case(double alpha, double lambda_plus, double lambda_minus);

struct Interval {
  double lo = 0, hi = 1;
};

/// Admissible p interval (max(0, 1 - l+/l-), l-/(l+ + l-)), never empty for
/// positive rates.
Interval p_range(double alpha, double lambda_plus, double lambda_minus);

/// Kernel exponent used in Var N+. The defining display and the process it
/// is the L2 limit of disagree on the rate; LambdaPlus matches the L2
/// statement and is the default, LambdaMinus is kept selectable so the
/// simulations can arbitrate.
enum class KernelVariant { LambdaPlus, LambdaMinus };

/// Var N+ = int_0^inf e^{-2 kappa s} |sigma~_1(0, e^{-lambda_- s} y2)|^2 ds
/// by adaptive Simpson, truncated where the envelope drops below 1e-14.
/// `row1` maps v to the first diffusion row evaluated at (0, v).
double var_N_plus(const std::function<Vec2(double)>& row1, double lambda_plus,
                  double lambda_minus, double y2,
                  KernelVariant kernel = KernelVariant::LambdaPlus);

/// sigma_+- = int_{-inf}^0 e^{2 lambda_- s} |sigma~_2(+-delta e^{lambda_+ s}, 0)|^2 ds.
/// `row2` maps u to the second diffusion row evaluated at (u, 0).
std::pair<double, double> sigma_pm_variance(const std::function<Vec2(double)>& row2,
                                            double lambda_plus, double lambda_minus,
                                            double delta);

struct LimitLaw {
  double alpha = 1;
  double beta = 1;
  double lambda_plus = 1, lambda_minus = 1;
  double y2 = 0;          // normal-form entry point (0, y2)
  double delta = 0.5;
  Mixture1D chi01_law;    // law of the first coordinate of Df(x) xi_0
  double var_N_plus = 0;
  double sigma_plus = 0, sigma_minus = 0;
  CaseTag case_tag = CaseTag::AlphaLmEqual;

  void validate() const;  // beta/case consistency, nonneg variances, no atom at 0
};

/// Assembles the law for a normal-form system: variances by quadrature from
/// the transported diffusion rows.
LimitLaw make_limit_law(const SaddleSystem& system, const NormalForm& nf, double alpha,
                        double delta, double y2, const Mixture1D& chi01,
                        KernelVariant kernel = KernelVariant::LambdaPlus);

/// eta0+ = chi01 + 1{alpha=1} N+, eta0- = |eta0+|^{l-/l+} y2.
struct Eta0Sample {
  double plus = 0, minus = 0;
};
Eta0Sample sample_eta0(const LimitLaw& law, Rng& rng);

/// theta given eta0+: Gaussian N(0, sigma_sgn) in the fast case, the
/// deterministic power term in the slow case, their sum on the boundary.
double sample_theta(const LimitLaw& law, double eta0_plus, Rng& rng);

/// Covariance of the Theorem-2 Gaussian: solution at T of
/// dC/dt = A(t) C + C A(t)^T + sigma sigma^T (S^t x), C(0) = 0, by RK4
/// jointly with the base flow.
Mat2 gaussian_covariance_far(const SaddleSystem& system, Vec2 x, double T, double h = 1e-3);

/// Linearization pushforward along a deterministic leg:
/// xi_bar = Phi_x(T) xi0 + 1{alpha=1} N with N ~ N(0, C(T)).
struct PushforwardFar {
  Vec2 endpoint;   // S^T x
  Mat2 Phi;        // Phi_x(T)
  Mat2 cov_N;      // Gaussian covariance (only enters the law when alpha = 1)
  Mixture2D law;   // law of xi_bar_0
};
PushforwardFar pushforward_far(const Mixture2D& xi0, const SaddleSystem& system, Vec2 x,
                               double T, double alpha, double h = 1e-3);

/// Coordinate of v along tangent_dir in the (b_q, tangent_dir) frame:
/// solves v = c b_q + w tangent_dir and returns w.
double transversal_projection(Vec2 b_q, Vec2 tangent_dir, Vec2 v);

/// One draw of the limiting Theta':
/// (eta0+, Dg(sgn delta e1)(theta e2), (1/l+) ln(delta/|eta0+|)).
struct ThetaPrimeSample {
  double eta0_plus = 0;
  Vec2 phi;
  double time = 0;
};
ThetaPrimeSample sample_theta_prime(const LimitLaw& law, const Mat2& Dg_plus,
                                    const Mat2& Dg_minus, Rng& rng);

/// Composed exit law for the whole domain: entry leg, saddle box, unstable
/// leg with scaling exponent beta, and the transversal projection at q+-.
struct FullExitLaw {
  LimitLaw saddle;
  double approach_time = 0;             // entry leg duration T
  Mat2 Dg_plus = Mat2::identity(), Dg_minus = Mat2::identity();
  double travel_plus = 0, travel_minus = 0;  // unstable leg durations
  Mat2 Phi_plus, Phi_minus;             // leg linearizations
  Mat2 covN_plus, covN_minus;           // leg Gaussian covariances
  Vec2 b_q_plus, b_q_minus;
  Vec2 tangent_plus, tangent_minus;
  double beta = 1;

  struct Sample {
    int sign = 1;
    double w = 0;      // tangent coordinate of the rescaled exit fluctuation
    double time = 0;   // limiting shifted exit time
  };
  Sample sample(Rng& rng) const;
};

/// Builds the composed law from benchmark geometry: travel times along the
/// unstable manifold from g(+-delta e1) to q+-, with leg linearizations and
/// covariances integrated from the system.
FullExitLaw compose_full_exit_law(const SaddleSystem& system, const NormalForm& nf,
                                  const LimitLaw& law, double approach_time,
                                  double travel_plus, double travel_minus,
                                  Vec2 tangent_plus, Vec2 tangent_minus,
                                  double h = 1e-3);

}  // namespace saddle
