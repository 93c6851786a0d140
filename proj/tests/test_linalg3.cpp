#include <doctest.h>

#include <cmath>

#include "anids/la3.hpp"
#include "anids/rng.hpp"
#include "oracles.hpp"

using namespace anids;

namespace {
double max_entry_dev(const SymMat3d& a, const SymMat3d& b) { return max_abs(a - b); }
}  // namespace

TEST_CASE("cholesky3 identity and diagonal") {
  LowerTri3d L = cholesky3(SymMat3d::identity());
  CHECK(L.l00 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(L.l11 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(L.l22 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(L.l10 == 0.0);

  LowerTri3d D = cholesky3(SymMat3d::diag(4.0, 9.0, 16.0));
  CHECK(D.l00 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(D.l11 == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(D.l22 == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("cholesky3 dense example reassembles") {
  SymMat3d m{2.0, 1.0, 0.0, 2.0, 0.0, 1.0};  // [[2,1,0],[1,2,0],[0,0,1]]
  LowerTri3d L = cholesky3(m);
  CHECK(L.l00 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(L.l10 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(L.l11 == doctest::Approx(std::sqrt(1.5)).epsilon(1e-12));
  CHECK(L.l22 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(max_entry_dev(L.reassemble(), m) <= 1e-12 * max_abs(m));
}

TEST_CASE("cholesky3 rejects non-positive-definite input") {
  CHECK_THROWS_AS(cholesky3(SymMat3d::diag(1.0, -1.0, 1.0)), NotPositiveDefinite);
  CHECK_THROWS_AS(cholesky3(SymMat3d::diag(0.0, 1.0, 1.0)), NotPositiveDefinite);
  // pivot below tolerance even though entries are positive
  SymMat3d nearly{1.0, 1.0, 0.0, 1.0, 0.0, 1.0};  // second pivot exactly 0
  CHECK_THROWS_AS(cholesky3(nearly), NotPositiveDefinite);
}

TEST_CASE("cholesky3 reassembly is the identity on random PD matrices") {
  rng::Stream s(7);
  for (int k = 0; k < 200; ++k) {
    SymMat3d m = oracles::random_pd(s);
    SymMat3d back = cholesky3(m).reassemble();
    CHECK(max_entry_dev(back, m) <= 1e-12 * std::max(1.0, max_abs(m)));
  }
}

TEST_CASE("invert3 basics") {
  SymMat3d inv_id = invert3(SymMat3d::identity());
  CHECK(max_entry_dev(inv_id, SymMat3d::identity()) <= 1e-14);

  SymMat3d inv_d = invert3(SymMat3d::diag(0.04, 0.04, 0.04));
  CHECK(inv_d.xx == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(inv_d.yy == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(inv_d.zz == doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("invert3 product with the original is the identity") {
  rng::Stream s(11);
  for (int k = 0; k < 200; ++k) {
    SymMat3d m = oracles::random_pd(s);
    SymMat3d inv = invert3(m);
    // multiply m * inv explicitly
    double prod[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        prod[i][j] = m(i, 0) * inv(0, j) + m(i, 1) * inv(1, j) + m(i, 2) * inv(2, j);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(std::abs(prod[i][j] - (i == j ? 1.0 : 0.0)) <= 1e-10);
  }
}

TEST_CASE("eigh3 identity") {
  Eig3 e = eigh3(SymMat3d::identity());
  for (int k = 0; k < 3; ++k) CHECK(e.values[k] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("eigh3 rank-one update has the analytic spectrum") {
  // a I - a gamma u u^T with a = 1, gamma = 0.5, u = x-hat
  SymMat3d m = SymMat3d::identity() - 0.5 * outer(Vec3d{1, 0, 0});
  Eig3 e = eigh3(m);
  CHECK(e.values[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.values[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(e.vectors[0].x) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(e.vectors[0].y) <= 1e-10);
  CHECK(std::abs(e.vectors[0].z) <= 1e-10);
}

TEST_CASE("eigh3 reconstructs random symmetric matrices") {
  rng::Stream s(13);
  for (int k = 0; k < 300; ++k) {
    SymMat3d m = oracles::random_symmetric(s, 2.0);
    Eig3 e = eigh3(m);
    CHECK(e.values[0] <= e.values[1]);
    CHECK(e.values[1] <= e.values[2]);

    // V Lambda V^T == m
    SymMat3d back;
    for (int i = 0; i < 3; ++i) back += e.values[i] * outer(e.vectors[i]);
    CHECK(max_entry_dev(back, m) <= 1e-9 * std::max(1.0, max_abs(m)));

    // orthonormality
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double expected = i == j ? 1.0 : 0.0;
        CHECK(std::abs(dot(e.vectors[i], e.vectors[j]) - expected) <= 1e-10);
      }

    // |det V| = 1
    Mat3d v;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) v.a[r][c] = e.vectors[c][r];
    CHECK(std::abs(std::abs(v.det()) - 1.0) <= 1e-9);
  }
}

TEST_CASE("eigh3 handles degenerate and tiny-offdiagonal spectra") {
  Eig3 e = eigh3(SymMat3d::diag(2.0, 2.0, 2.0));
  for (int k = 0; k < 3; ++k) CHECK(e.values[k] == doctest::Approx(2.0));

  SymMat3d m = SymMat3d::diag(1.0, 1.0 + 1e-14, 1.0 - 1e-14);
  m.xy = 1e-15;
  Eig3 e2 = eigh3(m);
  CHECK(e2.values[0] <= e2.values[2]);
}

TEST_CASE("triangular solves match the explicit inverse") {
  rng::Stream s(17);
  for (int k = 0; k < 100; ++k) {
    SymMat3d m = oracles::random_pd(s);
    LowerTri3d L = cholesky3(m);
    Vec3d b = s.gaussian3();
    Vec3d y = solve_lower(L, b);
    Vec3d back = L.matvec(y);
    CHECK(norm(back - b) <= 1e-12 * std::max(1.0, norm(b)));

    Vec3d z = solve_lower_transposed(L, b);
    // multiply by L^T explicitly
    Vec3d lt{L.l00 * z.x + L.l10 * z.y + L.l20 * z.z, L.l11 * z.y + L.l21 * z.z, L.l22 * z.z};
    CHECK(norm(lt - b) <= 1e-12 * std::max(1.0, norm(b)));
  }
}

TEST_CASE("rotations: quaternion matrices are orthogonal with det +1") {
  rng::Stream s(19);
  for (int k = 0; k < 50; ++k) {
    Mat3d r = s.rotation();
    CHECK(r.det() == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double d = r.a[0][i] * r.a[0][j] + r.a[1][i] * r.a[1][j] + r.a[2][i] * r.a[2][j];
        CHECK(std::abs(d - (i == j ? 1.0 : 0.0)) <= 1e-12);
      }
  }
}

TEST_CASE("rotate_sym matches explicit congruence") {
  rng::Stream s(23);
  for (int k = 0; k < 50; ++k) {
    Mat3d r = s.rotation();
    SymMat3d m = oracles::random_symmetric(s);
    SymMat3d got = rotate_sym(r, m);
    // check v^T (R m R^T) v == (R^T v)^T m (R^T v) on random vectors
    for (int t = 0; t < 5; ++t) {
      Vec3d v = s.gaussian3();
      Vec3d rtv{r.a[0][0] * v.x + r.a[1][0] * v.y + r.a[2][0] * v.z,
                r.a[0][1] * v.x + r.a[1][1] * v.y + r.a[2][1] * v.z,
                r.a[0][2] * v.x + r.a[1][2] * v.y + r.a[2][2] * v.z};
      double lhs = dot(v, got.matvec(v));
      double rhs = dot(rtv, m.matvec(rtv));
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
    }
  }
}
