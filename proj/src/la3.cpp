#include "anids/la3.hpp"

#include <cmath>

namespace anids {

Eig3 eigh3(const SymMat3d& m) {
  double a[3][3] = {{m.xx, m.xy, m.xz}, {m.xy, m.yy, m.yz}, {m.xz, m.yz, m.zz}};
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  double scale = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) scale = std::max(scale, std::abs(a[r][c]));
  const double stop = (scale > 0 ? scale : 1.0) * 1e-15;

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    if (off < stop) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        double apq = a[p][q];
        if (std::abs(apq) < stop * 1e-3) continue;
        double tau = (a[q][q] - a[p][p]) / (2.0 * apq);
        double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        // A <- J^T A J with the Givens rotation J in the (p,q) plane
        double app = a[p][p], aqq = a[q][q];
        a[p][p] = app - t * apq;
        a[q][q] = aqq + t * apq;
        a[p][q] = a[q][p] = 0.0;
        int r = 3 - p - q;  // the remaining index
        double arp = a[r][p], arq = a[r][q];
        a[r][p] = a[p][r] = c * arp - s * arq;
        a[r][q] = a[q][r] = s * arp + c * arq;
        for (int k = 0; k < 3; ++k) {
          double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::array<int, 3> order = {0, 1, 2};
  double w[3] = {a[0][0], a[1][1], a[2][2]};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return w[i] < w[j]; });

  Eig3 out;
  for (int k = 0; k < 3; ++k) {
    int j = order[k];
    out.values[k] = w[j];
    out.vectors[k] = Vec3d{v[0][j], v[1][j], v[2][j]};
  }
  return out;
}

SymMat3d rotate_sym(const Mat3d& r, const SymMat3d& s) {
  // B = R S, then R S R^T
  double b[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      b[i][j] = r.a[i][0] * s(0, j) + r.a[i][1] * s(1, j) + r.a[i][2] * s(2, j);
  SymMat3d out;
  auto entry = [&](int i, int j) {
    return b[i][0] * r.a[j][0] + b[i][1] * r.a[j][1] + b[i][2] * r.a[j][2];
  };
  out.xx = entry(0, 0);
  out.xy = entry(0, 1);
  out.xz = entry(0, 2);
  out.yy = entry(1, 1);
  out.yz = entry(1, 2);
  out.zz = entry(2, 2);
  return out;
}

Mat3d rotation_from_quaternion(double w, double x, double y, double z) {
  double n = std::sqrt(w * w + x * x + y * y + z * z);
  w /= n;
  x /= n;
  y /= n;
  z /= n;
  Mat3d r;
  r.a[0][0] = 1 - 2 * (y * y + z * z);
  r.a[0][1] = 2 * (x * y - w * z);
  r.a[0][2] = 2 * (x * z + w * y);
  r.a[1][0] = 2 * (x * y + w * z);
  r.a[1][1] = 1 - 2 * (x * x + z * z);
  r.a[1][2] = 2 * (y * z - w * x);
  r.a[2][0] = 2 * (x * z - w * y);
  r.a[2][1] = 2 * (y * z + w * x);
  r.a[2][2] = 1 - 2 * (x * x + y * y);
  return r;
}

}  // namespace anids
