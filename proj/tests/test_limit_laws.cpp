#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "saddle/limit_laws.hpp"
#include "saddle/normal_form.hpp"
#include "saddle/stats.hpp"
#include "helpers.hpp"

#include <cmath>

using namespace saddle;
using namespace saddle::testing;

TEST_CASE("beta exponent") {
  CHECK(beta_exponent(1, 1, 2) == 1.0);
  CHECK(beta_exponent(1, 1, 1) == 1.0);
  CHECK(beta_exponent(0.5, 2, 1) == 0.25);
  CHECK_THROWS(beta_exponent(0, 1, 1));
  // Continuity across the case boundary: alpha l- rising to l+.
  for (int k = 1; k <= 10; ++k) {
    double alpha = 1.0 - std::pow(10.0, -k);
    CHECK(beta_exponent(alpha, 1, 1) == doctest::Approx(alpha));
  }
}

TEST_CASE("p range") {
  Interval a = p_range(1, 1, 1);
  CHECK(a.lo == 0.0);
  CHECK(a.hi == doctest::Approx(0.5));
  Interval b = p_range(1, 1, 2);
  CHECK(b.lo == doctest::Approx(0.5));
  CHECK(b.hi == doctest::Approx(2.0 / 3.0));
  Interval c = p_range(1, 2, 1);
  CHECK(c.lo == 0.0);
  CHECK(c.hi == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("var N+ quadrature") {
  auto const_row = [](double) { return Vec2{1.0, 0.0}; };
  CHECK(var_N_plus(const_row, 1, 1, 1) == doctest::Approx(0.5).epsilon(1e-8));
  auto zero_row = [](double) { return Vec2{0.0, 0.0}; };
  CHECK(var_N_plus(zero_row, 1, 1, 1) == doctest::Approx(0.0));
  auto linear_row = [](double v) { return Vec2{v, 0.0}; };
  CHECK(var_N_plus(linear_row, 1, 1, 1) == doctest::Approx(0.25).epsilon(1e-8));
  // The kernel switch changes the decay rate.
  CHECK(var_N_plus(const_row, 1, 2, 1, KernelVariant::LambdaMinus) ==
        doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("sigma pm quadrature") {
  auto const_row = [](double) { return Vec2{0.0, 1.0}; };
  auto [sp, sm] = sigma_pm_variance(const_row, 1, 1, 0.1);
  CHECK(sp == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(sm == doctest::Approx(0.5).epsilon(1e-8));

  auto linear_row = [](double u) { return Vec2{u, 0.0}; };
  auto [sp2, sm2] = sigma_pm_variance(linear_row, 1, 1, 0.1);
  CHECK(sp2 == doctest::Approx(0.0025).epsilon(1e-8));
  CHECK(sm2 == doctest::Approx(0.0025).epsilon(1e-8));  // even in |.|
}

TEST_CASE("limit law assembly for the symmetric linear saddle") {
  SaddleSystem sys = linear_system(1, 1);
  NormalForm nf = poincare_dulac(sys, 3);
  LimitLaw law = make_limit_law(sys, nf, 1.0, 0.5, 0.3, Mixture1D::gaussian(0, 1));
  CHECK(law.beta == 1.0);
  CHECK(law.var_N_plus == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(law.sigma_plus == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(law.case_tag == CaseTag::AlphaLmEqual);
}

TEST_CASE("limit law rejects an atom at zero") {
  SaddleSystem sys = linear_system(1, 1);
  NormalForm nf = poincare_dulac(sys, 3);
  CHECK_THROWS_AS(make_limit_law(sys, nf, 0.5, 0.5, 0.3, Mixture1D::point_mass(0.0)),
                  std::logic_error);
}

TEST_CASE("eta0 sampling") {
  LimitLaw law;
  law.alpha = 1.0;
  law.beta = 1.0;
  law.lambda_plus = 1;
  law.lambda_minus = 2;
  law.y2 = 0.5;
  law.delta = 0.5;
  law.chi01_law = Mixture1D::point_mass(1.0);
  law.var_N_plus = 0.0;
  law.case_tag = CaseTag::AlphaLmGreater;

  Rng rng(21, 0);
  Eta0Sample s = sample_eta0(law, rng);
  CHECK(s.plus == 1.0);
  CHECK(s.minus == doctest::Approx(0.5));  // |1|^2 * 0.5

  // l-/l+ = 2, eta0+ = -3, y2 = 0.5 -> eta0- = 4.5.
  law.chi01_law = Mixture1D::point_mass(-3.0);
  Eta0Sample t = sample_eta0(law, rng);
  CHECK(t.minus == doctest::Approx(4.5));

  // alpha < 1 kills the Gaussian part entirely.
  law.alpha = 0.7;
  law.beta = beta_exponent(0.7, 1, 2);
  law.var_N_plus = 123.0;
  for (int k = 0; k < 10; ++k) CHECK(sample_eta0(law, rng).plus == -3.0);
}

TEST_CASE("eta0 moments against the analytic law") {
  LimitLaw law;
  law.alpha = 1.0;
  law.beta = 1.0;
  law.lambda_plus = 1;
  law.lambda_minus = 1;
  law.y2 = 0.3;
  law.delta = 0.5;
  law.chi01_law = Mixture1D::gaussian(0.2, 1.0);
  law.var_N_plus = 0.5;
  law.case_tag = CaseTag::AlphaLmEqual;

  Rng rng(22, 0);
  long n = 1000000;
  double s1 = 0, s2 = 0;
  for (long i = 0; i < n; ++i) {
    double v = sample_eta0(law, rng).plus;
    s1 += v;
    s2 += v * v;
  }
  double mean = s1 / n, var = s2 / n - mean * mean;
  double true_var = 1.5;
  CHECK(std::abs(mean - 0.2) < 4 * std::sqrt(true_var / n));
  CHECK(std::abs(var - true_var) < 4 * std::sqrt(2.0 / n) * true_var);
}

TEST_CASE("theta cases") {
  LimitLaw law;
  law.alpha = 1.0;
  law.lambda_plus = 1;
  law.lambda_minus = 1;
  law.y2 = 0.3;
  law.delta = 0.5;
  law.sigma_plus = 0.0;
  law.sigma_minus = 0.0;
  Rng rng(23, 0);

  // Slow case: deterministic power term; ratio 1 at eta0+ = delta.
  law.case_tag = CaseTag::AlphaLmLess;
  CHECK(sample_theta(law, 0.5, rng) == doctest::Approx(0.3));
  CHECK(sample_theta(law, 0.25, rng) == doctest::Approx(0.15));

  // Boundary case with zero variance reduces to the same value.
  law.case_tag = CaseTag::AlphaLmEqual;
  CHECK(sample_theta(law, 0.5, rng) == doctest::Approx(0.3));

  // Fast case: centered Gaussian with the sign-matched variance.
  law.case_tag = CaseTag::AlphaLmGreater;
  law.sigma_plus = 0.5;
  long n = 200000;
  double s1 = 0, s2 = 0;
  for (long i = 0; i < n; ++i) {
    double t = sample_theta(law, 1.0, rng);
    s1 += t;
    s2 += t * t;
  }
  CHECK(std::abs(s1 / n) < 4 * std::sqrt(0.5 / n));
  CHECK(s2 / n == doctest::Approx(0.5).epsilon(0.02));

  CHECK_THROWS(sample_theta(law, 0.0, rng));
}

TEST_CASE("gaussian covariance far closed form") {
  SaddleSystem sys = linear_system(1, 1);
  double T = 1.0;
  Mat2 c = gaussian_covariance_far(sys, {0.01, 0.1}, T);
  CHECK(c(0, 0) == doctest::Approx((std::exp(2 * T) - 1) / 2).epsilon(1e-8));
  CHECK(c(1, 1) == doctest::Approx((1 - std::exp(-2 * T)) / 2).epsilon(1e-8));
  CHECK(c(0, 1) == doctest::Approx(0.0));

  SaddleSystem quiet = linear_system(1, 1);
  quiet.sigma = PolyMat{};
  Mat2 z = gaussian_covariance_far(quiet, {0.01, 0.1}, T);
  CHECK(z.frobenius() == doctest::Approx(0.0));

  // Short-time slope is sigma sigma^T.
  Mat2 small = gaussian_covariance_far(sys, {0.01, 0.1}, 1e-4);
  CHECK(small(0, 0) == doctest::Approx(1e-4).epsilon(1e-3));
  CHECK(small(1, 1) == doctest::Approx(1e-4).epsilon(1e-3));
}

TEST_CASE("covariance stays symmetric psd along the cubic orbit") {
  SaddleSystem sys = cubic_system();
  for (double T : {0.2, 0.6, 1.0}) {
    Mat2 c = gaussian_covariance_far(sys, {0.05, 0.2}, T);
    CHECK(c(0, 1) == doctest::Approx(c(1, 0)).epsilon(1e-10));
    CHECK(c(0, 0) >= 0);
    CHECK(c.det() >= -1e-12);
  }
}

TEST_CASE("pushforward far") {
  SaddleSystem sys = linear_system(1, 1);
  // T = 0 is the identity pushforward.
  auto id = pushforward_far(Mixture2D::standard_normal(), sys, {0.1, 0.2}, 0.0, 0.5);
  CHECK((id.Phi - Mat2::identity()).frobenius() == 0.0);
  CHECK(id.endpoint.x == 0.1);

  // Point mass, alpha < 1: pure linear transport.
  auto pm = pushforward_far(Mixture2D::point_mass({1.0, 2.0}), sys, {0.05, 0.2}, 1.0, 0.5);
  REQUIRE(pm.law.components().size() == 1);
  CHECK(pm.law.components()[0].point_mass);
  CHECK(pm.law.components()[0].mean.x == doctest::Approx(std::exp(1.0)).epsilon(1e-8));
  CHECK(pm.law.components()[0].mean.y == doctest::Approx(2 * std::exp(-1.0)).epsilon(1e-8));

  // Gaussian, alpha < 1: N(0, Phi Phi^T), checked by MC moments.
  auto gs = pushforward_far(Mixture2D::standard_normal(), sys, {0.05, 0.2}, 1.0, 0.5);
  REQUIRE(gs.law.components().size() == 1);
  Mat2 expect = gs.Phi * gs.Phi.transpose();
  CHECK((gs.law.components()[0].cov - expect).frobenius() < 1e-10);
  Rng rng(24, 0);
  long n = 200000;
  double sxx = 0;
  for (long i = 0; i < n; ++i) {
    Vec2 v = gs.law.sample(rng);
    sxx += v.x * v.x;
  }
  CHECK(sxx / n == doctest::Approx(expect(0, 0)).epsilon(0.02));

  // alpha = 1 convolves in the leg Gaussian.
  auto g1 = pushforward_far(Mixture2D::point_mass({0.0, 0.0}), sys, {0.05, 0.2}, 1.0, 1.0);
  CHECK(g1.law.components()[0].cov(0, 0) ==
        doctest::Approx((std::exp(2.0) - 1) / 2).epsilon(1e-6));
}

TEST_CASE("transversal projection") {
  CHECK(transversal_projection({1, 0}, {0, 1}, {3, 5}) == doctest::Approx(5.0));
  CHECK(transversal_projection({1, 1}, {1, 0}, {2, 3}) == doctest::Approx(-1.0));
  CHECK(transversal_projection({2, 1}, {0, 1}, {4, 2}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(transversal_projection({1, 1}, {2, 2}, {1, 0}), std::domain_error);
}

TEST_CASE("theta prime sampler identities") {
  SaddleSystem sys = linear_system(1, 1);
  NormalForm nf = poincare_dulac(sys, 3);
  LimitLaw law = make_limit_law(sys, nf, 1.0, 0.5, 0.3, Mixture1D::gaussian(0, 1));
  Rng rng(25, 0);
  for (int k = 0; k < 1000; ++k) {
    ThetaPrimeSample s = sample_theta_prime(law, Mat2::identity(), Mat2::identity(), rng);
    CHECK(s.time == doctest::Approx((std::log(law.delta) - std::log(std::abs(s.eta0_plus)))
                                    / law.lambda_plus));
    CHECK(s.phi.x == 0.0);
  }
}

TEST_CASE("theta prime deterministic composition") {
  // g identity, slow case, point mass chi at delta: (delta, (0, y2), 0).
  LimitLaw law;
  law.alpha = 0.5;
  law.lambda_plus = 2;
  law.lambda_minus = 1;
  law.beta = beta_exponent(0.5, 2, 1);
  law.case_tag = classify_case(0.5, 2, 1);
  law.y2 = 0.3;
  law.delta = 0.5;
  law.chi01_law = Mixture1D::point_mass(0.5);
  Rng rng(26, 0);
  ThetaPrimeSample s = sample_theta_prime(law, Mat2::identity(), Mat2::identity(), rng);
  CHECK(s.eta0_plus == 0.5);
  CHECK(s.phi.y == doctest::Approx(0.3));
  CHECK(s.time == doctest::Approx(0.0));
}

TEST_CASE("sign marginal matches the convolution probability") {
  SaddleSystem sys = linear_system(1, 1);
  NormalForm nf = poincare_dulac(sys, 3);
  LimitLaw law = make_limit_law(sys, nf, 1.0, 0.5, 0.3, Mixture1D::gaussian(0.4, 1.0));
  double p_analytic = law.chi01_law.prob_positive(law.var_N_plus);
  Rng rng(27, 0);
  long n = 400000, pos = 0;
  for (long i = 0; i < n; ++i)
    if (sample_eta0(law, rng).plus > 0) ++pos;
  double se = std::sqrt(p_analytic * (1 - p_analytic) / n);
  CHECK(std::abs(double(pos) / n - p_analytic) < 4 * se);
}

TEST_CASE("full exit law composition on the symmetric benchmark") {
  SaddleSystem sys = load_system(data_path("linear_sym.json"));
  NormalForm nf = poincare_dulac(sys, 3);
  double delta = 0.1;
  LimitLaw law = make_limit_law(sys, nf, 0.5, delta, 0.05, Mixture1D::point_mass(0.1));
  double T_leg = std::log(0.4 / delta);
  FullExitLaw full = compose_full_exit_law(sys, nf, law, 1.0, T_leg, T_leg, {0, 1}, {0, 1});

  // All variances zero and point-mass chi: a single deterministic triple.
  Rng rng(28, 0);
  FullExitLaw::Sample a = full.sample(rng);
  FullExitLaw::Sample b = full.sample(rng);
  CHECK(a.sign == 1);
  CHECK(a.w == b.w);
  CHECK(a.time == b.time);
  CHECK(a.time == doctest::Approx(1.0 + std::log(delta / 0.1) + T_leg));

  // Symmetric chi with alpha < 1: P{sign = +} = 1/2.
  LimitLaw sym = make_limit_law(sys, nf, 0.5, delta, 0.05, Mixture1D::gaussian(0, 1));
  FullExitLaw full2 = compose_full_exit_law(sys, nf, sym, 1.0, T_leg, T_leg, {0, 1}, {0, 1});
  long n = 200000, pos = 0;
  for (long i = 0; i < n; ++i)
    if (full2.sample(rng).sign > 0) ++pos;
  CHECK(std::abs(double(pos) / n - 0.5) < 4 * std::sqrt(0.25 / n));

  SaddleSystem no_q = linear_system(1, 1);
  CHECK_THROWS(compose_full_exit_law(no_q, nf, law, 1.0, T_leg, T_leg, {0, 1}, {0, 1}));
}
