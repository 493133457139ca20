#pragma once
// 2x2 complex matrices for the transfer-matrix algebra. Inverses go through
// the adjugate so the determinant bookkeeping stays explicit.

#include <complex>

namespace allab {

using cx = std::complex<double>;

struct Mat2 {
  cx a{}, b{}, c{}, d{};  // [[a, b], [c, d]]

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  cx trace() const { return a + d; }
  cx det() const { return a * d - b * c; }

  Mat2 adjugate() const { return {d, -b, -c, a}; }

  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d,
            c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Mat2 operator*(cx s) const { return {a * s, b * s, c * s, d * s}; }
  Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
};

inline Mat2 inverse(const Mat2& m) {
  cx det = m.det();
  Mat2 adj = m.adjugate();
  cx s = 1.0 / det;
  return adj * s;
}

// inverse when the determinant is already known (e.g. products of transfer
// matrices, where det accumulates as a product of real weights)
inline Mat2 inverse_with_det(const Mat2& m, cx det) {
  return m.adjugate() * (1.0 / det);
}

inline double frob_norm(const Mat2& m) {
  return std::sqrt(std::norm(m.a) + std::norm(m.b) + std::norm(m.c) + std::norm(m.d));
}

struct Vec2 {
  cx x{}, y{};
};

inline Vec2 operator*(const Mat2& m, const Vec2& v) {
  return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}

inline Vec2 operator+(const Vec2& u, const Vec2& v) { return {u.x + v.x, u.y + v.y}; }
inline Vec2 operator-(const Vec2& u, const Vec2& v) { return {u.x - v.x, u.y - v.y}; }
inline Vec2 operator*(cx s, const Vec2& v) { return {s * v.x, s * v.y}; }
inline double norm2(const Vec2& v) { return std::sqrt(std::norm(v.x) + std::norm(v.y)); }

}
