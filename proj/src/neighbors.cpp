#include "anids/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

#include "anids/errors.hpp"

namespace anids {

namespace {
constexpr double kCoincidenceTol = 1e-6;

int64_t cell_key(int cx, int cy, int cz) {
  // 21 bits per axis, offset to stay positive
  constexpr int64_t kOff = 1 << 20;
  return (((cx + kOff) * (int64_t{1} << 21)) + (cy + kOff)) * (int64_t{1} << 21) + (cz + kOff);
}
}  // namespace

NeighborList build_neighbors(std::span<const Vec3d> pos, double cutoff) {
  if (!(cutoff > 0)) throw std::invalid_argument("build_neighbors: cutoff must be positive");
  const int n = static_cast<int>(pos.size());
  NeighborList nl;
  nl.atoms.resize(n);
  if (n < 2) return nl;

  const double cell = cutoff;
  std::unordered_map<int64_t, std::vector<int>> grid;
  grid.reserve(static_cast<size_t>(n) * 2);
  auto cell_of = [&](const Vec3d& p) {
    return std::array<int, 3>{static_cast<int>(std::floor(p.x / cell)),
                              static_cast<int>(std::floor(p.y / cell)),
                              static_cast<int>(std::floor(p.z / cell))};
  };
  for (int i = 0; i < n; ++i) {
    auto c = cell_of(pos[i]);
    grid[cell_key(c[0], c[1], c[2])].push_back(i);
  }

  const double cut_sq = cutoff * cutoff;
  for (int i = 0; i < n; ++i) {
    auto c = cell_of(pos[i]);
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = grid.find(cell_key(c[0] + dx, c[1] + dy, c[2] + dz));
          if (it == grid.end()) continue;
          for (int j : it->second) {
            if (j <= i) continue;  // each unordered pair once
            Vec3d r = pos[i] - pos[j];
            double d2 = norm_sq(r);
            if (d2 > cut_sq) continue;
            double d = std::sqrt(d2);
            if (d < kCoincidenceTol)
              throw CoincidentAtoms("atoms " + std::to_string(i) + " and " + std::to_string(j) +
                                    " are " + std::to_string(d) + " A apart");
            nl.atoms[i].push_back({j, r, d});
            nl.atoms[j].push_back({i, -r, d});
          }
        }
      }
    }
  }
  // canonical per-atom order, independent of grid traversal
  for (auto& edges : nl.atoms)
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) { return a.j < b.j; });
  return nl;
}

}  // namespace anids
