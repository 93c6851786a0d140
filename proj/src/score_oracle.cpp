#include "anids/score_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace anids {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// log N(x; c, cov) for one atom, via the Cholesky factor.
double gaussian_log_density(const Vec3d& x, const Vec3d& c, const SymMat3d& cov) {
  LowerTri3d L = cholesky3(cov);
  Vec3d u = solve_lower(L, x - c);
  double log_det = 2.0 * (std::log(L.l00) + std::log(L.l11) + std::log(L.l22));
  return -0.5 * (3.0 * kLog2Pi + log_det + norm_sq(u));
}

// Per-component joint log densities over all atoms.
std::vector<double> component_log_densities(const MixtureModel& model, std::span<const Vec3d> x) {
  if (static_cast<int>(x.size()) != model.n_atoms())
    throw std::invalid_argument("mixture: coordinate count does not match the model");
  std::vector<double> lc(model.n_components(), 0.0);
  for (int k = 0; k < model.n_components(); ++k)
    for (int i = 0; i < model.n_atoms(); ++i)
      lc[k] += gaussian_log_density(x[i], model.centers[k][i], model.covs[k][i]);
  return lc;
}

double log_sum_exp(std::span<const double> v) {
  double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

double mixture_log_density(const MixtureModel& model, std::span<const Vec3d> x) {
  std::vector<double> lc = component_log_densities(model, x);
  return log_sum_exp(lc) - std::log(static_cast<double>(model.n_components()));
}

std::vector<Vec3d> mixture_score(const MixtureModel& model, std::span<const Vec3d> x) {
  std::vector<double> lc = component_log_densities(model, x);
  double lse = log_sum_exp(lc);
  std::vector<Vec3d> score(x.size());
  for (int k = 0; k < model.n_components(); ++k) {
    double w = std::exp(lc[k] - lse);  // posterior responsibility of component k
    for (int i = 0; i < model.n_atoms(); ++i) {
      SymMat3d inv = invert3(model.covs[k][i]);
      score[i] += (-w) * inv.matvec(x[i] - model.centers[k][i]);
    }
  }
  return score;
}

std::vector<Vec3d> nearest_component_score(const MixtureModel& model, std::span<const Vec3d> x) {
  std::vector<double> lc = component_log_densities(model, x);
  int best = static_cast<int>(std::max_element(lc.begin(), lc.end()) - lc.begin());
  std::vector<Vec3d> score(x.size());
  for (int i = 0; i < model.n_atoms(); ++i) {
    SymMat3d inv = invert3(model.covs[best][i]);
    score[i] = -1.0 * inv.matvec(x[i] - model.centers[best][i]);
  }
  return score;
}

std::vector<Vec3d> boltzmann_score(const ToyPotential& pot, const TemperatureContext& tc,
                                   std::span<const Vec3d> x) {
  std::vector<Vec3d> f = pot.forces(x);
  for (auto& v : f) v = v * (1.0 / tc.kT);
  return f;
}

}  // namespace anids
