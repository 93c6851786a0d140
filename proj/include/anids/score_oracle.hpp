#pragma once

// Ground-truth machinery kept independent of the training path:
// Gaussian-mixture log-density and score with per-atom full covariances,
// the nearest-component approximation, and the Boltzmann score of a toy
// potential.

#include <span>
#include <vector>

#include "anids/la3.hpp"
#include "anids/potential.hpp"

namespace anids {

// Mixture of |D| equally weighted components; within a component the
// density factorizes over atoms: prod_i N(x_i; center_ki, cov_ki).
struct MixtureModel {
  std::vector<std::vector<Vec3d>> centers;    // [component][atom]
  std::vector<std::vector<SymMat3d>> covs;    // [component][atom]

  int n_components() const { return static_cast<int>(centers.size()); }
  int n_atoms() const { return centers.empty() ? 0 : static_cast<int>(centers[0].size()); }
};

struct TemperatureContext {
  double kT;  // eV
};

double mixture_log_density(const MixtureModel& model, std::span<const Vec3d> x);

// Gradient of the log-density w.r.t. every coordinate: the
// responsibility-weighted sum of per-component scores
// -cov_ki^{-1} (x_i - center_ki).
std::vector<Vec3d> mixture_score(const MixtureModel& model, std::span<const Vec3d> x);

// Score of the single highest-responsibility component; approaches the
// exact score as the components separate.
std::vector<Vec3d> nearest_component_score(const MixtureModel& model, std::span<const Vec3d> x);

// grad log p_Boltzmann = F(x) / kT = -grad E / kT.
std::vector<Vec3d> boltzmann_score(const ToyPotential& pot, const TemperatureContext& tc,
                                   std::span<const Vec3d> x);

}  // namespace anids
