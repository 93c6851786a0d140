#pragma once

// Exact small-dimension linear algebra on 3-vectors and symmetric 3x3
// matrices. Everything except the eigensolver is templated on the scalar
// type so the same kernels run on plain doubles and on autodiff scalars.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

#include "anids/errors.hpp"

namespace anids {

inline constexpr double kPdPivotTol = 1e-12;

// Numeric value of a scalar; the autodiff module overloads this for its
// tape scalar (found via ADL).
inline constexpr double value_of(double x) { return x; }

template <class T>
struct Vec3 {
  T x{0.0}, y{0.0}, z{0.0};

  Vec3() = default;
  Vec3(T x_, T y_, T z_) : x(std::move(x_)), y(std::move(y_)), z(std::move(z_)) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) {
    x = x + o.x;
    y = y + o.y;
    z = z + o.z;
    return *this;
  }
  T operator[](int k) const { return k == 0 ? x : (k == 1 ? y : z); }
};

using Vec3d = Vec3<double>;

template <class T, class S>
auto operator*(const Vec3<T>& v, const S& s) -> Vec3<decltype(v.x * s)> {
  return {v.x * s, v.y * s, v.z * s};
}
template <class T, class S>
auto operator*(const S& s, const Vec3<T>& v) -> Vec3<decltype(v.x * s)> {
  return {v.x * s, v.y * s, v.z * s};
}

template <class T, class U>
auto dot(const Vec3<T>& a, const Vec3<U>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <class T>
T norm_sq(const Vec3<T>& v) {
  return dot(v, v);
}

template <class T>
T norm(const Vec3<T>& v) {
  using std::sqrt;
  return sqrt(norm_sq(v));
}

inline Vec3d cross(const Vec3d& a, const Vec3d& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline Vec3d normalized(const Vec3d& v) { return v * (1.0 / norm(v)); }

// Symmetric 3x3; storing the six independent entries keeps M = M^T true
// by construction.
template <class T>
struct SymMat3 {
  T xx{0.0}, xy{0.0}, xz{0.0}, yy{0.0}, yz{0.0}, zz{0.0};

  static SymMat3 identity() {
    SymMat3 m;
    m.xx = T{1.0};
    m.yy = T{1.0};
    m.zz = T{1.0};
    return m;
  }

  static SymMat3 diag(T a, T b, T c) {
    SymMat3 m;
    m.xx = std::move(a);
    m.yy = std::move(b);
    m.zz = std::move(c);
    return m;
  }

  SymMat3 operator+(const SymMat3& o) const {
    return {xx + o.xx, xy + o.xy, xz + o.xz, yy + o.yy, yz + o.yz, zz + o.zz};
  }
  SymMat3 operator-(const SymMat3& o) const {
    return {xx - o.xx, xy - o.xy, xz - o.xz, yy - o.yy, yz - o.yz, zz - o.zz};
  }
  SymMat3& operator+=(const SymMat3& o) {
    xx = xx + o.xx;
    xy = xy + o.xy;
    xz = xz + o.xz;
    yy = yy + o.yy;
    yz = yz + o.yz;
    zz = zz + o.zz;
    return *this;
  }

  T trace() const { return xx + yy + zz; }

  T operator()(int r, int c) const {
    if (r > c) std::swap(r, c);
    if (r == 0) return c == 0 ? xx : (c == 1 ? xy : xz);
    if (r == 1) return c == 1 ? yy : yz;
    return zz;
  }

  Vec3<T> matvec(const Vec3<T>& v) const {
    return {xx * v.x + xy * v.y + xz * v.z, xy * v.x + yy * v.y + yz * v.z,
            xz * v.x + yz * v.y + zz * v.z};
  }
};

using SymMat3d = SymMat3<double>;

template <class T, class S>
auto operator*(const S& s, const SymMat3<T>& m) -> SymMat3<decltype(s * m.xx)> {
  return {s * m.xx, s * m.xy, s * m.xz, s * m.yy, s * m.yz, s * m.zz};
}

// u u^T for a (unit) direction u.
inline SymMat3d outer(const Vec3d& u) {
  return {u.x * u.x, u.x * u.y, u.x * u.z, u.y * u.y, u.y * u.z, u.z * u.z};
}

inline double max_abs(const SymMat3d& m) {
  double r = 0.0;
  for (double v : {m.xx, m.xy, m.xz, m.yy, m.yz, m.zz}) r = std::max(r, std::abs(v));
  return r;
}

// Lower-triangular 3x3; the upper triangle is structurally zero.
template <class T>
struct LowerTri3 {
  T l00{0.0}, l10{0.0}, l11{0.0}, l20{0.0}, l21{0.0}, l22{0.0};

  // L L^T
  SymMat3<T> reassemble() const {
    SymMat3<T> m;
    m.xx = l00 * l00;
    m.xy = l10 * l00;
    m.xz = l20 * l00;
    m.yy = l10 * l10 + l11 * l11;
    m.yz = l20 * l10 + l21 * l11;
    m.zz = l20 * l20 + l21 * l21 + l22 * l22;
    return m;
  }

  Vec3<T> matvec(const Vec3<T>& v) const {
    return {l00 * v.x, l10 * v.x + l11 * v.y, l20 * v.x + l21 * v.y + l22 * v.z};
  }
};

using LowerTri3d = LowerTri3<double>;

template <class T>
LowerTri3<T> cholesky3(const SymMat3<T>& m, double tol = kPdPivotTol) {
  using std::sqrt;
  LowerTri3<T> L;
  T p0 = m.xx;
  if (!(value_of(p0) > tol)) throw NotPositiveDefinite("cholesky3: pivot 0 not positive");
  L.l00 = sqrt(p0);
  L.l10 = m.xy / L.l00;
  L.l20 = m.xz / L.l00;
  T p1 = m.yy - L.l10 * L.l10;
  if (!(value_of(p1) > tol)) throw NotPositiveDefinite("cholesky3: pivot 1 not positive");
  L.l11 = sqrt(p1);
  L.l21 = (m.yz - L.l20 * L.l10) / L.l11;
  T p2 = m.zz - L.l20 * L.l20 - L.l21 * L.l21;
  if (!(value_of(p2) > tol)) throw NotPositiveDefinite("cholesky3: pivot 2 not positive");
  L.l22 = sqrt(p2);
  return L;
}

// Solve L y = b (forward substitution).
template <class T>
Vec3<T> solve_lower(const LowerTri3<T>& L, const Vec3<T>& b) {
  Vec3<T> y;
  y.x = b.x / L.l00;
  y.y = (b.y - L.l10 * y.x) / L.l11;
  y.z = (b.z - L.l20 * y.x - L.l21 * y.y) / L.l22;
  return y;
}

// Solve L^T z = b (back substitution on the transpose).
template <class T>
Vec3<T> solve_lower_transposed(const LowerTri3<T>& L, const Vec3<T>& b) {
  Vec3<T> z;
  z.z = b.z / L.l22;
  z.y = (b.y - L.l21 * z.z) / L.l11;
  z.x = (b.x - L.l10 * z.y - L.l20 * z.z) / L.l00;
  return z;
}

// Inverse of a positive-definite matrix through its Cholesky factor, so
// the PD gate and tolerance are shared with cholesky3.
template <class T>
SymMat3<T> invert3(const SymMat3<T>& m, double tol = kPdPivotTol) {
  LowerTri3<T> L = cholesky3(m, tol);
  auto col = [&](const Vec3<T>& e) { return solve_lower_transposed(L, solve_lower(L, e)); };
  Vec3<T> c0 = col({T{1.0}, T{0.0}, T{0.0}});
  Vec3<T> c1 = col({T{0.0}, T{1.0}, T{0.0}});
  Vec3<T> c2 = col({T{0.0}, T{0.0}, T{1.0}});
  SymMat3<T> inv;
  inv.xx = c0.x;
  inv.xy = c1.x;
  inv.xz = c2.x;
  inv.yy = c1.y;
  inv.yz = c2.y;
  inv.zz = c2.z;
  return inv;
}

struct Eig3 {
  std::array<double, 3> values;  // ascending
  std::array<Vec3d, 3> vectors;  // orthonormal, vectors[k] pairs with values[k]
};

// Cyclic Jacobi rotations; converges unconditionally for symmetric 3x3
// and stays accurate near degenerate spectra.
Eig3 eigh3(const SymMat3d& m);

// General (non-symmetric) 3x3, used for rotations.
struct Mat3d {
  std::array<std::array<double, 3>, 3> a{};

  static Mat3d identity() {
    Mat3d r;
    r.a[0][0] = r.a[1][1] = r.a[2][2] = 1.0;
    return r;
  }

  Vec3d matvec(const Vec3d& v) const {
    return {a[0][0] * v.x + a[0][1] * v.y + a[0][2] * v.z,
            a[1][0] * v.x + a[1][1] * v.y + a[1][2] * v.z,
            a[2][0] * v.x + a[2][1] * v.y + a[2][2] * v.z};
  }

  double det() const {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  }
};

// R S R^T
SymMat3d rotate_sym(const Mat3d& r, const SymMat3d& s);

// Unit quaternion -> rotation matrix; (1,0,0,0) is the identity.
Mat3d rotation_from_quaternion(double w, double x, double y, double z);

}  // namespace anids
