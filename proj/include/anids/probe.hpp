#pragma once

// Analysis probe: eigendecompose the learned covariances, perturb along
// each eigenvector, and measure the energy sensitivity of each direction
// with sMAPE against the toy potential.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "anids/config.hpp"
#include "anids/la3.hpp"
#include "anids/molecule.hpp"
#include "anids/potential.hpp"

namespace anids {

// 2|a - b| / (|a| + |b|), in [0, 2]; defined as 0 when both are zero.
double smape(double e_ref, double e_pert);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

struct EigenProbeAtom {
  std::array<double, 3> eigenvalues;       // ascending, A^2
  std::array<Vec3d, 3> eigenvectors;
  std::array<double, 3> sensitivity;       // mean sMAPE per direction
  double bond_cos = 0.0;                   // |v_min . u_nearest|
  int nearest = -1;                        // nearest-neighbor index, -1 if isolated
};

struct EigenProbeReport {
  std::vector<EigenProbeAtom> atoms;
  // eigenvalue-vs-sensitivity rank correlation over each atom's three
  // probe directions, averaged over atoms
  double spearman_rho = 0.0;
  double delta = 0.0;

  std::string to_json() const;
  std::string to_csv() const;
};

// For each atom and eigenvector v_k, perturb by +-m v_k for n_magnitudes
// random magnitudes m <= delta and average the sMAPE between E(X) and the
// perturbed energies.
EigenProbeReport run_probe(const TrainConfig& cfg, std::span<const double> params,
                           const Molecule& mol, const ToyPotential& pot,
                           const ProbeConfig& probe, uint64_t seed);

}  // namespace anids
