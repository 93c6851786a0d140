#pragma once

#include <span>
#include <vector>

#include "anids/la3.hpp"
#include "anids/molecule.hpp"

namespace anids {

// Per-atom adjacency within a distance cutoff. Boundary pairs
// (|r_ij| == cutoff) are included; the list is symmetric and self-edges
// are excluded.
struct NeighborList {
  struct Edge {
    int j;
    Vec3d r;      // X_i - X_j
    double dist;  // |r|
  };
  std::vector<std::vector<Edge>> atoms;

  int size() const { return static_cast<int>(atoms.size()); }
  const std::vector<Edge>& of(int i) const { return atoms[i]; }
};

// Cell-grid pair search; throws CoincidentAtoms when two atoms are
// closer than 1e-6 Angstrom.
NeighborList build_neighbors(std::span<const Vec3d> pos, double cutoff);

inline NeighborList build_neighbors(const Molecule& mol, double cutoff) {
  return build_neighbors(std::span<const Vec3d>(mol.pos), cutoff);
}

}  // namespace anids
