#pragma once

#include <span>
#include <vector>

#include "anids/la3.hpp"
#include "anids/molecule.hpp"

namespace anids {

// Per-atom anchored well with a full 3x3 stiffness: E = 1/2 (x-c)^T K (x-c).
struct HarmonicSite {
  Vec3d center;
  SymMat3d stiffness;  // positive semi-definite
};

// Bond-length spring: E = 1/2 k (|x_i - x_j| - r0)^2.
struct BondSpring {
  int i, j;
  double k;
  double r0;
};

struct LJPairOverride {
  int i, j;
  double epsilon, sigma;
};

// Analytic toy energy surfaces with exact forces. The harmonic kind
// combines anchored wells and bond springs (either list may be empty);
// the Lennard-Jones kind acts on all pairs with optional per-pair
// parameter overrides.
struct ToyPotential {
  enum class Kind { Harmonic, LennardJones };

  Kind kind = Kind::Harmonic;
  std::vector<HarmonicSite> sites;
  std::vector<BondSpring> bonds;
  double lj_epsilon = 1.0;  // eV
  double lj_sigma = 1.0;    // Angstrom
  std::vector<LJPairOverride> lj_pairs;

  double energy(std::span<const Vec3d> pos) const;
  std::vector<Vec3d> forces(std::span<const Vec3d> pos) const;

  // Isotropic wells of stiffness k at the given centers.
  static ToyPotential harmonic_wells(std::span<const Vec3d> centers, double k);
  // Two atoms joined by one bond spring; no anchoring.
  static ToyPotential harmonic_diatomic(double k, double r0);
  static ToyPotential lennard_jones(double epsilon, double sigma);
};

struct SamplerOptions {
  double dt = 2e-3;        // integrator step, (Angstrom^2 / eV) time units
  int burn_in = 2000;      // discarded steps before the first frame
  int stride = 25;         // steps between recorded frames
  double max_coord = 1e3;  // divergence guard, Angstrom
};

// Overdamped Langevin (Euler-Maruyama) sampling of exp(-E/kT). Frames
// carry the exact energy and analytic forces of the potential and are
// bitwise deterministic for a fixed seed.
std::vector<Molecule> sample_boltzmann(const ToyPotential& pot, const Molecule& start,
                                       int n_frames, double kT, uint64_t seed,
                                       const SamplerOptions& opts = {});

}  // namespace anids
