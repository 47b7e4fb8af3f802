#pragma once

// Adaptive Simpson quadrature for the limit-law variance integrals.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace saddle {

namespace detail {

template <typename F>
double simpson(const F& f, double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive(const F& f, double a, double b, double fa, double fm, double fb,
                double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(f, a, m, fa, flm, fm);
  double right = simpson(f, m, b, fm, frm, fb);
  if (depth <= 0) throw std::runtime_error("adaptive Simpson: recursion limit reached");
  if (std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace detail

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol = 1e-10) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = detail::simpson(f, a, b, fa, fm, fb);
  return detail::adaptive(f, a, b, fa, fm, fb, whole, tol, 48);
}

/// Integral over [0, infinity) of an integrand dominated by
/// exp(-decay_rate * s): truncated where the envelope drops below 1e-14.
template <typename F>
double exponential_tail_integral(const F& f, double decay_rate, double tol = 1e-10) {
  if (decay_rate <= 0)
    throw std::invalid_argument("exponential_tail_integral: decay rate must be positive");
  double s_star = std::log(1e14) / decay_rate;
  return adaptive_simpson(f, 0.0, s_star, tol);
}

}  // namespace saddle
