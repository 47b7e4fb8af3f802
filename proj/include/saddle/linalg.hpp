#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace saddle {

struct Vec2 {
  double x = 0, y = 0;
  double& operator[](int i) { return i == 0 ? x : y; }
  double operator[](int i) const { return i == 0 ? x : y; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double c, Vec2 v) { return {c * v.x, c * v.y}; }
  double norm() const { return std::hypot(x, y); }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

struct Mat2 {
  // Row-major: m[0]=a11, m[1]=a12, m[2]=a21, m[3]=a22.
  std::array<double, 4> m{0, 0, 0, 0};

  static Mat2 identity() { return {{1, 0, 0, 1}}; }
  static Mat2 diag(double a, double b) { return {{a, 0, 0, b}}; }

  double& operator()(int i, int j) { return m[2 * i + j]; }
  double operator()(int i, int j) const { return m[2 * i + j]; }

  Vec2 operator*(Vec2 v) const {
    return {m[0] * v.x + m[1] * v.y, m[2] * v.x + m[3] * v.y};
  }
  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {{a.m[0] * b.m[0] + a.m[1] * b.m[2], a.m[0] * b.m[1] + a.m[1] * b.m[3],
             a.m[2] * b.m[0] + a.m[3] * b.m[2], a.m[2] * b.m[1] + a.m[3] * b.m[3]}};
  }
  friend Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {{a.m[0] + b.m[0], a.m[1] + b.m[1], a.m[2] + b.m[2], a.m[3] + b.m[3]}};
  }
  friend Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {{a.m[0] - b.m[0], a.m[1] - b.m[1], a.m[2] - b.m[2], a.m[3] - b.m[3]}};
  }
  friend Mat2 operator*(double c, const Mat2& a) {
    return {{c * a.m[0], c * a.m[1], c * a.m[2], c * a.m[3]}};
  }

  Mat2 transpose() const { return {{m[0], m[2], m[1], m[3]}}; }
  double det() const { return m[0] * m[3] - m[1] * m[2]; }

  Mat2 inverse() const {
    double d = det();
    if (d == 0) throw std::domain_error("singular 2x2 matrix");
    return {{m[3] / d, -m[1] / d, -m[2] / d, m[0] / d}};
  }

  double frobenius() const {
    return std::sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3]);
  }
};

/// Lower-triangular factor L with L L^T = C for a symmetric PSD 2x2 matrix.
/// Degenerate (rank < 2) matrices are handled with a small clamp.
inline Mat2 cholesky_psd(const Mat2& c) {
  double a = std::max(c(0, 0), 0.0);
  double l11 = std::sqrt(a);
  double l21 = l11 > 0 ? c(1, 0) / l11 : 0.0;
  double rest = c(1, 1) - l21 * l21;
  double l22 = std::sqrt(std::max(rest, 0.0));
  return {{l11, 0, l21, l22}};
}

}  // namespace saddle
