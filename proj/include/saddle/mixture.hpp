#pragma once

// Finite mixtures of point masses and Gaussians.
//
// These are the only initial-perturbation laws we admit: they are closed
// under linear pushforward and Gaussian convolution, so every law the
// limit theorems need stays exactly computable.

#include "saddle/linalg.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace saddle {

class Rng;

struct MixtureComponent2 {
  double weight = 1.0;
  Vec2 mean;
  Mat2 cov;          // zero matrix for a point mass
  bool point_mass = false;
};

struct MixtureComponent1 {
  double weight = 1.0;
  double mean = 0.0;
  double var = 0.0;  // 0 for an atom
};

/// One-dimensional mixture of atoms and Gaussians.
class Mixture1D {
 public:
  Mixture1D() = default;
  explicit Mixture1D(std::vector<MixtureComponent1> comps) : comps_(std::move(comps)) {
    normalize();
  }
  static Mixture1D point_mass(double v) { return Mixture1D({{1.0, v, 0.0}}); }
  static Mixture1D gaussian(double mean, double var) { return Mixture1D({{1.0, mean, var}}); }

  const std::vector<MixtureComponent1>& components() const { return comps_; }

  double mean() const {
    double s = 0;
    for (const auto& c : comps_) s += c.weight * c.mean;
    return s;
  }
  double variance() const {
    double m = mean(), s = 0;
    for (const auto& c : comps_) s += c.weight * (c.var + (c.mean - m) * (c.mean - m));
    return s;
  }

  /// True if the law of X + N(0, extra_var) has an atom at 0.
  bool has_atom_at_zero(double extra_var = 0.0) const {
    for (const auto& c : comps_)
      if (c.var + extra_var == 0.0 && c.mean == 0.0 && c.weight > 0) return true;
    return false;
  }

  /// P{X + N(0, extra_var) > 0} with an independent centered Gaussian.
  double prob_positive(double extra_var = 0.0) const {
    double p = 0;
    for (const auto& c : comps_) {
      double v = c.var + extra_var;
      if (v == 0.0) {
        p += c.weight * (c.mean > 0 ? 1.0 : 0.0);
      } else {
        p += c.weight * 0.5 * std::erfc(-c.mean / std::sqrt(2.0 * v));
      }
    }
    return p;
  }

  double sample(Rng& rng) const;

 private:
  void normalize() {
    double w = 0;
    for (const auto& c : comps_) w += c.weight;
    if (w <= 0) throw std::invalid_argument("mixture weights must be positive");
    for (auto& c : comps_) c.weight /= w;
  }
  std::vector<MixtureComponent1> comps_;
};

/// Two-dimensional mixture of point masses and Gaussians.
class Mixture2D {
 public:
  Mixture2D() : comps_{{1.0, {0, 0}, Mat2{}, true}} {}
  explicit Mixture2D(std::vector<MixtureComponent2> comps) : comps_(std::move(comps)) {
    normalize();
  }
  static Mixture2D point_mass(Vec2 v) { return Mixture2D({{1.0, v, Mat2{}, true}}); }
  static Mixture2D gaussian(Vec2 mean, Mat2 cov) { return Mixture2D({{1.0, mean, cov, false}}); }
  static Mixture2D standard_normal() { return gaussian({0, 0}, Mat2::identity()); }

  const std::vector<MixtureComponent2>& components() const { return comps_; }

  /// Law of M X.
  Mixture2D pushforward(const Mat2& map) const {
    auto comps = comps_;
    for (auto& c : comps) {
      c.mean = map * c.mean;
      c.cov = map * c.cov * map.transpose();
    }
    return Mixture2D(comps);
  }

  /// Law of X + N(0, cov) with an independent Gaussian.
  Mixture2D convolve_gaussian(const Mat2& cov) const {
    auto comps = comps_;
    for (auto& c : comps) {
      c.cov = c.cov + cov;
      c.point_mass = c.point_mass && cov.frobenius() == 0.0;
    }
    return Mixture2D(comps);
  }

  Mixture1D marginal_first() const {
    std::vector<MixtureComponent1> comps;
    for (const auto& c : comps_) comps.push_back({c.weight, c.mean.x, c.cov(0, 0)});
    return Mixture1D(comps);
  }

  /// True if some atom of the mixture lies on the line spanned by dir.
  bool has_atom_on_line(Vec2 dir, double tol = 0.0) const {
    for (const auto& c : comps_)
      if (c.point_mass && std::abs(cross(c.mean, dir)) <= tol * dir.norm() * c.mean.norm())
        return true;
    return false;
  }

  Vec2 sample(Rng& rng) const;

 private:
  void normalize() {
    double w = 0;
    for (const auto& c : comps_) w += c.weight;
    if (w <= 0) throw std::invalid_argument("mixture weights must be positive");
    for (auto& c : comps_) c.weight /= w;
  }
  std::vector<MixtureComponent2> comps_;
};

}  // namespace saddle
