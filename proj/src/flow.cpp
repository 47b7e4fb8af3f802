#include "saddle/flow.hpp"

#include <cmath>

namespace saddle {

namespace {

void check_guard(const SaddleSystem& sys, Vec2 x) {
  if (std::abs(x.x) > sys.guard_radius || std::abs(x.y) > sys.guard_radius ||
      !std::isfinite(x.x) || !std::isfinite(x.y))
    throw TrajectoryEscape(sys.guard_radius);
}

Vec2 rk4_step(const SaddleSystem& sys, Vec2 x, double h) {
  Vec2 k1 = sys.drift(x);
  Vec2 k2 = sys.drift(x + (h / 2) * k1);
  Vec2 k3 = sys.drift(x + (h / 2) * k2);
  Vec2 k4 = sys.drift(x + h * k3);
  return x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace

Vec2 flow_map(const SaddleSystem& sys, Vec2 x, double t, double h) {
  if (h <= 0) throw std::invalid_argument("flow_map: step h must be positive");
  if (t == 0) return x;
  double dir = t > 0 ? 1.0 : -1.0;
  double remaining = std::abs(t);
  check_guard(sys, x);
  while (remaining > 0) {
    double step = std::min(h, remaining);
    x = rk4_step(sys, x, dir * step);
    check_guard(sys, x);
    remaining -= step;
  }
  return x;
}

VariationalPath variational_flow(const SaddleSystem& sys, Vec2 x, double T, double h) {
  if (T < 0) throw std::invalid_argument("variational_flow: T must be nonnegative");
  if (h <= 0) throw std::invalid_argument("variational_flow: step h must be positive");

  // Joint RK4 on the 6-dimensional system (x, Phi).
  struct State {
    Vec2 x;
    Mat2 phi;
  };
  auto rhs = [&](const State& s) {
    return State{sys.drift(s.x), sys.drift_jacobian(s.x) * s.phi};
  };
  auto axpy = [](const State& s, double c, const State& d) {
    return State{s.x + c * d.x, s.phi + c * d.phi};
  };

  State s{x, Mat2::identity()};
  VariationalPath path;
  path.times.push_back(0);
  path.Phi.push_back(s.phi);
  path.base.push_back(s.x);

  long n = static_cast<long>(std::ceil(T / h - 1e-12));
  for (long i = 0; i < n; ++i) {
    double step = std::min(h, T - i * h);
    State k1 = rhs(s);
    State k2 = rhs(axpy(s, step / 2, k1));
    State k3 = rhs(axpy(s, step / 2, k2));
    State k4 = rhs(axpy(s, step, k3));
    s.x = s.x + (step / 6) * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    s.phi = s.phi + (step / 6) * (k1.phi + 2 * (k2.phi + k3.phi) + k4.phi);
    check_guard(sys, s.x);
    path.times.push_back(std::min((i + 1) * h, T));
    path.Phi.push_back(s.phi);
    path.base.push_back(s.x);
  }
  return path;
}

}  // namespace saddle
