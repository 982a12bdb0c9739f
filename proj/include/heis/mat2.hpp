#pragma once

#include <cmath>
#include <complex>

namespace heis {

/// 2x2 real matrix acting on the horizontal plane, row-major.
struct Mat2 {
  double a11 = 0.0, a12 = 0.0;
  double a21 = 0.0, a22 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  static Mat2 rotation(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c, -s, s, c};
  }

  /// Matrix of z -> conj(z) in the (x, y) basis.
  static Mat2 conjugation() { return {1.0, 0.0, 0.0, -1.0}; }

  Mat2 operator+(const Mat2& o) const {
    return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22};
  }
  Mat2 operator-(const Mat2& o) const {
    return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
  }
  Mat2 operator*(const Mat2& o) const {
    return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
            a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
  }
  Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }

  double det() const { return a11 * a22 - a12 * a21; }

  double frobenius() const {
    return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22);
  }
};

/// Singular values via the closed form for 2x2 matrices.
struct Sv2 {
  double max = 0.0;
  double min = 0.0;
};

inline Sv2 singular_values(const Mat2& m) {
  const double e = 0.5 * (m.a11 + m.a22);
  const double f = 0.5 * (m.a11 - m.a22);
  const double g = 0.5 * (m.a21 + m.a12);
  const double h = 0.5 * (m.a21 - m.a12);
  const double q = std::hypot(e, h);
  const double r = std::hypot(f, g);
  return {q + r, std::fabs(q - r)};
}

/// Spectral norm (largest singular value); the matrix norm used throughout.
inline double op_norm(const Mat2& m) { return singular_values(m).max; }

}  // namespace heis
