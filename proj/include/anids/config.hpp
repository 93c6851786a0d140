#pragma once

#include <cstdint>
#include <string>

#include "anids/encoder.hpp"
#include "anids/molecule.hpp"
#include "anids/noisegen.hpp"
#include "anids/potential.hpp"

namespace anids {

// Everything a training run depends on: loss weights, noise knobs,
// encoder dimensions, optimizer hyperparameters, seed.
struct TrainConfig {
  // encoder (shared dims; the denoiser additionally has the force channel)
  int n_species = 8;
  int dim = 64;
  int n_rbf = 16;
  int n_layers = 2;
  double cutoff = 5.0;

  // losses
  double lambda_anids = 1.0;
  double lambda_kl = 1.0;
  double lambda_gamma = 1.0;
  double lambda_energy = 1.0;
  double lambda_force = 1.0;
  double sigma_p = 0.1;   // prior scale, Angstrom
  double kappa = 0.5;     // hinge target for the anisotropic mass
  double p_anids = 0.25;  // per-structure corruption probability
  double r_anids = 0.25;  // per-atom corruption rate
  NoiseMode noise_mode = NoiseMode::AniDS;
  double dens_sigma = 0.1;  // fixed scale for the dens mode

  // optimizer / loop
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;
  int batch = 8;
  int64_t steps = 1000;
  uint64_t seed = 0;

  EncoderConfig generator_encoder() const {
    return {n_species, dim, n_rbf, n_layers, cutoff, false};
  }
  EncoderConfig denoiser_encoder() const { return {n_species, dim, n_rbf, n_layers, cutoff, true}; }

  void validate() const;  // throws std::invalid_argument
};

struct DataConfig {
  ToyPotential potential;
  Molecule start;       // species + initial coordinates for the sampler
  int n_frames = 1000;
  double kT = 0.1;      // eV
  SamplerOptions sampler;
  double val_fraction = 0.1;
};

struct ProbeConfig {
  double delta = 0.05;   // max perturbation magnitude, Angstrom
  int n_magnitudes = 8;  // random magnitudes averaged per direction
};

struct RunConfig {
  TrainConfig train;
  DataConfig data;
  ProbeConfig probe;
};

// Flat JSON object for TrainConfig keys plus nested "data" and "probe"
// sections; absent keys keep their defaults. The grammar is documented
// in the README.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& json_text);

// FNV-1a over the canonical serialized TrainConfig.
std::string config_hash(const TrainConfig& cfg);

}  // namespace anids
