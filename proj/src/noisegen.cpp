#include "anids/noisegen.hpp"

#include <stdexcept>
#include <string>

namespace anids {

const char* to_string(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::AniDS: return "anids";
    case NoiseMode::DenoiseVAE: return "denoisevae";
    case NoiseMode::DeNS: return "dens";
  }
  return "?";
}

NoiseMode noise_mode_from_string(std::string_view s) {
  if (s == "anids") return NoiseMode::AniDS;
  if (s == "denoisevae") return NoiseMode::DenoiseVAE;
  if (s == "dens") return NoiseMode::DeNS;
  throw std::invalid_argument("unknown noise mode '" + std::string(s) +
                              "' (expected anids|dens|denoisevae)");
}

double equivariance_probe(const EncoderConfig& cfg, std::span<const double> gen_params,
                          const Molecule& mol, NoiseMode mode, double dens_sigma,
                          const Mat3d& rotation, const Vec3d& translation) {
  NeighborList topo = build_neighbors(mol, cfg.cutoff);
  CovarianceSetD base = generate_covariances<double>(cfg, gen_params, mol.z, mol.pos, topo, mode,
                                                     dens_sigma);

  Molecule moved = mol;
  for (auto& p : moved.pos) p = rotation.matvec(p) + translation;
  NeighborList topo_moved = build_neighbors(moved, cfg.cutoff);
  CovarianceSetD got = generate_covariances<double>(cfg, gen_params, moved.z, moved.pos,
                                                    topo_moved, mode, dens_sigma);

  double worst = 0.0;
  for (int i = 0; i < base.size(); ++i) {
    SymMat3d expected = rotate_sym(rotation, base.sigma[i]);
    worst = std::max(worst, max_abs(got.sigma[i] - expected));
  }
  return worst;
}

}  // namespace anids
