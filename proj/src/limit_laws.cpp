#include "saddle/limit_laws.hpp"

#include "saddle/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace saddle {

double beta_exponent(double alpha, double lp, double lm) {
  if (alpha <= 0 || alpha > 1 || lp <= 0 || lm <= 0)
    throw std::invalid_argument("beta_exponent: need alpha in (0,1] and positive rates");
  return alpha * lm >= lp ? 1.0 : alpha * lm / lp;
}

CaseTag classify_case(double alpha, double lp, double lm) {
  double d = alpha * lm - lp;
  if (d > 0) return CaseTag::AlphaLmGreater;
  if (d < 0) return CaseTag::AlphaLmLess;
  return CaseTag::AlphaLmEqual;
}

Interval p_range(double /*alpha*/, double lp, double lm) {
  if (lp <= 0 || lm <= 0) throw std::invalid_argument("p_range: rates must be positive");
  Interval iv;
  iv.lo = std::max(0.0, 1.0 - lp / lm);
  iv.hi = lm / (lp + lm);
  if (!(iv.lo < iv.hi))
    throw std::logic_error("p_range: empty interval (impossible for positive rates)");
  iv.hi = std::min(iv.hi, 1.0);
  return iv;
}

double var_N_plus(const std::function<Vec2(double)>& row1, double lp, double lm, double y2,
                  KernelVariant kernel) {
  double kappa = kernel == KernelVariant::LambdaPlus ? lp : lm;
  auto integrand = [&](double s) {
    Vec2 r = row1(std::exp(-lm * s) * y2);
    return std::exp(-2.0 * kappa * s) * (r.x * r.x + r.y * r.y);
  };
  double v = exponential_tail_integral(integrand, 2.0 * kappa);
  if (!std::isfinite(v)) throw std::runtime_error("var_N_plus: quadrature diverged");
  return v;
}

std::pair<double, double> sigma_pm_variance(const std::function<Vec2(double)>& row2,
                                            double lp, double lm, double delta) {
  auto one_side = [&](double sign) {
    // Substituting u = -s turns the integral over (-inf, 0] into a decaying
    // tail integral over [0, inf).
    auto integrand = [&](double u) {
      Vec2 r = row2(sign * delta * std::exp(-lp * u));
      return std::exp(-2.0 * lm * u) * (r.x * r.x + r.y * r.y);
    };
    double v = exponential_tail_integral(integrand, 2.0 * lm);
    if (!std::isfinite(v)) throw std::runtime_error("sigma_pm_variance: quadrature diverged");
    return v;
  };
  return {one_side(+1.0), one_side(-1.0)};
}

void LimitLaw::validate() const {
  if (std::abs(beta - beta_exponent(alpha, lambda_plus, lambda_minus)) > 1e-12)
    throw std::logic_error("LimitLaw: beta inconsistent with case tag");
  if (var_N_plus < 0 || sigma_plus < 0 || sigma_minus < 0)
    throw std::logic_error("LimitLaw: negative variance");
  double extra = alpha == 1.0 ? var_N_plus : 0.0;
  if (chi01_law.has_atom_at_zero(extra))
    throw std::logic_error("LimitLaw: chi01 has an atom at 0 (collinearity violated)");
}

LimitLaw make_limit_law(const SaddleSystem& sys, const NormalForm& nf, double alpha,
                        double delta, double y2, const Mixture1D& chi01,
                        KernelVariant kernel) {
  LimitLaw law;
  law.alpha = alpha;
  law.lambda_plus = sys.lp();
  law.lambda_minus = sys.lm();
  law.beta = beta_exponent(alpha, law.lambda_plus, law.lambda_minus);
  law.case_tag = classify_case(alpha, law.lambda_plus, law.lambda_minus);
  law.delta = delta;
  law.y2 = y2;
  law.chi01_law = chi01;

  auto row1 = [&](double v) {
    Mat2 s = sigma_tilde_at(sys, nf, {0.0, v});
    return Vec2{s(0, 0), s(0, 1)};
  };
  auto row2 = [&](double u) {
    Mat2 s = sigma_tilde_at(sys, nf, {u, 0.0});
    return Vec2{s(1, 0), s(1, 1)};
  };
  law.var_N_plus = var_N_plus(row1, law.lambda_plus, law.lambda_minus, y2, kernel);
  auto [sp, sm] = sigma_pm_variance(row2, law.lambda_plus, law.lambda_minus, delta);
  law.sigma_plus = sp;
  law.sigma_minus = sm;
  law.validate();
  return law;
}

Eta0Sample sample_eta0(const LimitLaw& law, Rng& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    double plus = law.chi01_law.sample(rng);
    if (law.alpha == 1.0 && law.var_N_plus > 0)
      plus += std::sqrt(law.var_N_plus) * rng.next_normal();
    if (plus == 0.0) continue;  // probability-0 event; numeric resample guard
    Eta0Sample s;
    s.plus = plus;
    s.minus = std::pow(std::abs(plus), law.lambda_minus / law.lambda_plus) * law.y2;
    return s;
  }
  throw std::runtime_error("sample_eta0: eta0+ = 0 repeatedly (atom at 0?)");
}

double sample_theta(const LimitLaw& law, double eta0_plus, Rng& rng) {
  if (eta0_plus == 0.0) throw std::invalid_argument("sample_theta: eta0+ must be nonzero");
  double var = eta0_plus > 0 ? law.sigma_plus : law.sigma_minus;
  double gauss = var > 0 ? std::sqrt(var) * rng.next_normal() : 0.0;
  double power = std::pow(std::abs(eta0_plus) / law.delta,
                          law.lambda_minus / law.lambda_plus) *
                 law.y2;
  switch (law.case_tag) {
    case CaseTag::AlphaLmGreater: return gauss;
    case CaseTag::AlphaLmEqual: return power + gauss;
    case CaseTag::AlphaLmLess: return power;
  }
  return 0;
}

Mat2 gaussian_covariance_far(const SaddleSystem& sys, Vec2 x, double T, double h) {
  if (T < 0) throw std::invalid_argument("gaussian_covariance_far: T must be >= 0");
  struct State {
    Vec2 x;
    Mat2 c;
  };
  auto rhs = [&](const State& s) {
    Mat2 a = sys.drift_jacobian(s.x);
    Mat2 sig = sys.sigma_at(s.x);
    return State{sys.drift(s.x), a * s.c + s.c * a.transpose() + sig * sig.transpose()};
  };
  auto axpy = [](const State& s, double c, const State& d) {
    return State{s.x + c * d.x, s.c + c * d.c};
  };
  State s{x, Mat2{}};
  long n = static_cast<long>(std::ceil(T / h - 1e-12));
  for (long i = 0; i < n; ++i) {
    double step = std::min(h, T - i * h);
    State k1 = rhs(s);
    State k2 = rhs(axpy(s, step / 2, k1));
    State k3 = rhs(axpy(s, step / 2, k2));
    State k4 = rhs(axpy(s, step, k3));
    s.x = s.x + (step / 6) * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    s.c = s.c + (step / 6) * (k1.c + 2 * (k2.c + k3.c) + k4.c);
    if (std::abs(s.x.x) > sys.guard_radius || std::abs(s.x.y) > sys.guard_radius)
      throw TrajectoryEscape(sys.guard_radius);
  }
  return s.c;
}

PushforwardFar pushforward_far(const Mixture2D& xi0, const SaddleSystem& sys, Vec2 x,
                               double T, double alpha, double h) {
  PushforwardFar out;
  if (T == 0) {
    out.endpoint = x;
    out.Phi = Mat2::identity();
    out.cov_N = Mat2{};
    out.law = xi0;
    return out;
  }
  auto path = variational_flow(sys, x, T, h);
  out.endpoint = path.base.back();
  out.Phi = path.Phi.back();
  out.cov_N = gaussian_covariance_far(sys, x, T, h);
  out.law = xi0.pushforward(out.Phi);
  if (alpha == 1.0) out.law = out.law.convolve_gaussian(out.cov_N);
  return out;
}

double transversal_projection(Vec2 b_q, Vec2 tangent_dir, Vec2 v) {
  double det = cross(b_q, tangent_dir);
  if (std::abs(det) < 1e-12 * b_q.norm() * tangent_dir.norm())
    throw std::domain_error("transversal_projection: drift nearly tangent to boundary");
  // v = c b_q + w tangent_dir  =>  w = (b_q x v) / (b_q x tangent_dir)
  return cross(b_q, v) / det;
}

ThetaPrimeSample sample_theta_prime(const LimitLaw& law, const Mat2& Dg_plus,
                                    const Mat2& Dg_minus, Rng& rng) {
  Eta0Sample eta = sample_eta0(law, rng);
  double theta = sample_theta(law, eta.plus, rng);
  const Mat2& dg = eta.plus > 0 ? Dg_plus : Dg_minus;
  ThetaPrimeSample s;
  s.eta0_plus = eta.plus;
  s.phi = dg * Vec2{0.0, theta};
  s.time = (1.0 / law.lambda_plus) * std::log(law.delta / std::abs(eta.plus));
  return s;
}

FullExitLaw::Sample FullExitLaw::sample(Rng& rng) const {
  Eta0Sample eta = sample_eta0(saddle, rng);
  double theta = sample_theta(saddle, eta.plus, rng);
  bool plus = eta.plus > 0;

  Vec2 phi_box = (plus ? Dg_plus : Dg_minus) * Vec2{0.0, theta};
  Vec2 xi_leg = (plus ? Phi_plus : Phi_minus) * phi_box;
  if (beta == 1.0) {
    Mat2 chol = cholesky_psd(plus ? covN_plus : covN_minus);
    double z1, z2;
    rng.next_normal_pair(z1, z2);
    xi_leg = xi_leg + Vec2{chol(0, 0) * z1, chol(1, 0) * z1 + chol(1, 1) * z2};
  }

  Sample s;
  s.sign = plus ? 1 : -1;
  s.w = transversal_projection(plus ? b_q_plus : b_q_minus,
                               plus ? tangent_plus : tangent_minus, xi_leg);
  s.time = approach_time +
           (1.0 / saddle.lambda_plus) * std::log(saddle.delta / std::abs(eta.plus)) +
           (plus ? travel_plus : travel_minus);
  return s;
}

FullExitLaw compose_full_exit_law(const SaddleSystem& sys, const NormalForm& nf,
                                  const LimitLaw& law, double approach_time,
                                  double travel_plus, double travel_minus,
                                  Vec2 tangent_plus, Vec2 tangent_minus, double h) {
  if (!sys.q_plus || !sys.q_minus)
    throw std::invalid_argument("compose_full_exit_law: system lacks exit points q+-");

  FullExitLaw full;
  full.saddle = law;
  full.approach_time = approach_time;
  full.travel_plus = travel_plus;
  full.travel_minus = travel_minus;
  full.tangent_plus = tangent_plus;
  full.tangent_minus = tangent_minus;
  full.beta = law.beta;

  PolyMat dg = PolyMat::jacobian(nf.g);
  auto eval_dg = [&](Vec2 y) {
    Mat2 m;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m(i, j) = dg.m[i][j].eval(y.x, y.y);
    return m;
  };
  full.Dg_plus = eval_dg({law.delta, 0});
  full.Dg_minus = eval_dg({-law.delta, 0});

  Vec2 start_plus{nf.g.c1.eval(law.delta, 0), nf.g.c2.eval(law.delta, 0)};
  Vec2 start_minus{nf.g.c1.eval(-law.delta, 0), nf.g.c2.eval(-law.delta, 0)};
  full.Phi_plus = variational_flow(sys, start_plus, travel_plus, h).Phi.back();
  full.Phi_minus = variational_flow(sys, start_minus, travel_minus, h).Phi.back();
  full.covN_plus = gaussian_covariance_far(sys, start_plus, travel_plus, h);
  full.covN_minus = gaussian_covariance_far(sys, start_minus, travel_minus, h);
  full.b_q_plus = sys.drift(*sys.q_plus);
  full.b_q_minus = sys.drift(*sys.q_minus);
  return full;
}

}  // namespace saddle
