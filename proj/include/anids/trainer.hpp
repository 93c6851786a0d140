#pragma once

// Optimizer and the two training procedures: pretraining (corrupt every
// atom, denoising + regularizers) and supervised training with partial
// corruption and auxiliary denoising. The per-molecule forward is
// templated on the scalar type; the tape path and the finite-difference
// oracle therefore run through identical code.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "anids/ad.hpp"
#include "anids/config.hpp"
#include "anids/losses.hpp"
#include "anids/molecule.hpp"
#include "anids/noisegen.hpp"

namespace anids {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled
};

class AdamW {
 public:
  AdamW() = default;
  explicit AdamW(size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  // Bias-corrected update with decoupled weight decay. Parameters in
  // [frozen_begin, frozen_end) are left untouched (moments included).
  // Throws NonFiniteGradient before mutating anything.
  void step(std::span<double> params, std::span<const double> grads, const AdamWConfig& cfg,
            size_t frozen_begin = 0, size_t frozen_end = 0);

  int64_t step_count() const { return t_; }

  std::vector<double> m_, v_;
  int64_t t_ = 0;
};

enum class Scheme { Pretrain, Supervised };

// All randomness of one molecule's step, drawn up front from keyed
// streams so replays and finite-difference evaluations see identical
// draws regardless of parameter values.
struct MolDraws {
  bool corrupt = true;
  std::vector<uint8_t> mask;
  std::vector<Vec3d> eps;
};

MolDraws draw_for(const TrainConfig& cfg, int64_t step, int slot, int n_atoms, Scheme scheme);

namespace detail {

template <class T>
struct GenDen {
  std::span<const T> gen, den;
};

template <class T>
GenDen<T> split_params(const TrainConfig& cfg, std::span<const T> params) {
  const int gs = generator_size(cfg.generator_encoder());
  const int ds = denoiser_size(cfg.denoiser_encoder());
  if (params.size() != static_cast<size_t>(gs + ds))
    throw DimensionMismatch("split_params: expected " + std::to_string(gs + ds) +
                            " parameters, got " + std::to_string(params.size()));
  return {params.subspan(0, gs), params.subspan(gs, ds)};
}

}  // namespace detail

// Loss of a single molecule under the given draws. Gradients flow into
// both the denoiser and, through the reparameterized perturbation
// X + L eps and the regularizers, the generator.
template <class T>
LossBreakdown<T> molecule_losses(const TrainConfig& cfg, std::span<const T> params,
                                 const Molecule& mol, const MolDraws& draws, Scheme scheme) {
  auto [gen, den] = detail::split_params<T>(cfg, params);
  const EncoderConfig gcfg = cfg.generator_encoder();
  const EncoderConfig dcfg = cfg.denoiser_encoder();
  const int n = mol.size();

  LossBreakdown<T> out;
  LossWeights w{cfg.lambda_anids, cfg.lambda_kl, cfg.lambda_gamma, cfg.lambda_energy,
                cfg.lambda_force};

  const int ds_core = encoder_core_size(dcfg);
  const MlpDims edge = edge_head_dims(dcfg);
  std::span<const T> den_core = den.subspan(0, ds_core);
  std::span<const T> den_noise = den.subspan(ds_core, edge.size());
  std::span<const T> den_force = den.subspan(ds_core + edge.size(), edge.size());
  std::span<const T> den_energy = den.subspan(ds_core + 2 * edge.size());

  if (scheme == Scheme::Supervised && (!mol.energy || !mol.has_forces()))
    throw MissingLabels("supervised step requires energy and force labels");

  if (scheme == Scheme::Supervised && !draws.corrupt) {
    // clean branch: plain supervised learning, no generator, no force encoding
    w.anids = w.kl = w.gamma = 0.0;
    NeighborList topo = build_neighbors(mol, cfg.cutoff);
    std::vector<Vec3<T>> pos = to_positions<T>(mol.pos);
    std::vector<T> h = encode<T>(dcfg, den_core, mol.z, pos, topo);
    out.energy = energy_loss<T>(*mol.energy, energy_readout<T>(dcfg, den_energy, h));
    std::vector<Vec3<T>> f_pred = vector_readout<T>(dcfg, den_force, h, pos, topo);
    std::vector<uint8_t> none(n, 0);
    out.force = force_loss<T>(mol.forces, f_pred, none);
    finish_total(out, w);
    return out;
  }

  // corruption path (all of pretraining; supervised with probability p)
  NeighborList topo = build_neighbors(mol, cfg.cutoff);
  CovarianceSet<T> cov = generate_covariances<T>(gcfg, gen, mol.z, mol.pos, topo, cfg.noise_mode,
                                                 cfg.dens_sigma);
  PerturbedMolecule<T> pert = apply_perturbation<T>(mol.pos, cov, draws.mask, draws.eps);

  // topology of the corrupted structure from the numeric positions
  std::vector<Vec3d> pos_values(n);
  for (int i = 0; i < n; ++i)
    pos_values[i] = {value_of(pert.pos[i].x), value_of(pert.pos[i].y), value_of(pert.pos[i].z)};
  NeighborList topo_tilde = build_neighbors(pos_values, cfg.cutoff);

  // force encoding only for corrupted atoms, and only when labels exist
  std::vector<Vec3d> force_feat;
  if (scheme == Scheme::Supervised) {
    force_feat.assign(n, Vec3d{});
    for (int i = 0; i < n; ++i)
      if (draws.mask[i]) force_feat[i] = mol.forces[i];
  }
  std::vector<T> h = encode<T>(dcfg, den_core, mol.z, pert.pos, topo_tilde, force_feat);

  if (cfg.lambda_anids != 0.0 && pert.n_masked > 0) {
    std::vector<Vec3<T>> noise_pred = vector_readout<T>(dcfg, den_noise, h, pert.pos, topo_tilde);
    out.anids = anids_loss<T>(noise_pred, cov, pert);
  }
  out.kl = kl_loss<T>(cov, cfg.sigma_p, scheme == Scheme::Pretrain
                                            ? std::span<const uint8_t>{}
                                            : std::span<const uint8_t>(pert.mask));
  out.gamma = gamma_hinge<T>(cov.big_gamma, cfg.kappa,
                             scheme == Scheme::Pretrain ? std::span<const uint8_t>{}
                                                        : std::span<const uint8_t>(pert.mask));

  if (scheme == Scheme::Supervised) {
    out.energy = energy_loss<T>(*mol.energy, energy_readout<T>(dcfg, den_energy, h));
    std::vector<Vec3<T>> f_pred = vector_readout<T>(dcfg, den_force, h, pert.pos, topo_tilde);
    out.force = force_loss<T>(mol.forces, f_pred, pert.mask);
  } else {
    w.energy = w.force = 0.0;
  }
  finish_total(out, w);
  return out;
}

// Batch mean of the per-molecule losses (components and total alike).
template <class T>
LossBreakdown<T> batch_losses(const TrainConfig& cfg, std::span<const T> params,
                              std::span<const Molecule> batch, int64_t step, Scheme scheme) {
  LossBreakdown<T> acc;
  for (size_t slot = 0; slot < batch.size(); ++slot) {
    MolDraws draws = draw_for(cfg, step, static_cast<int>(slot), batch[slot].size(), scheme);
    LossBreakdown<T> one = molecule_losses<T>(cfg, params, batch[slot], draws, scheme);
    acc.anids += one.anids;
    acc.kl += one.kl;
    acc.gamma += one.gamma;
    acc.energy += one.energy;
    acc.force += one.force;
    acc.total += one.total;
  }
  T inv{1.0 / static_cast<double>(batch.size())};
  acc.anids = acc.anids * inv;
  acc.kl = acc.kl * inv;
  acc.gamma = acc.gamma * inv;
  acc.energy = acc.energy * inv;
  acc.force = acc.force * inv;
  acc.total = acc.total * inv;
  return acc;
}

struct LossRow {
  int64_t step;
  LossBreakdownD loss;
};

struct TrainRun {
  TrainConfig cfg;
  std::vector<double> params;  // [generator | denoiser]
  int gen_size = 0;
  AdamW opt;
  int64_t step = 0;
  std::vector<LossRow> log;

  static TrainRun create(const TrainConfig& cfg);

  std::span<const double> generator_params() const {
    return std::span<const double>(params).subspan(0, gen_size);
  }
  std::span<const double> denoiser_params() const {
    return std::span<const double>(params).subspan(gen_size);
  }
  AdamWConfig optimizer_config() const {
    return {cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps, cfg.weight_decay};
  }
};

// One optimization step each; the returned breakdown is the batch loss
// at the pre-update parameters, also appended to run.log.
LossBreakdownD pretrain_step(TrainRun& run, std::span<const Molecule> batch);
LossBreakdownD supervised_step(TrainRun& run, std::span<const Molecule> batch,
                               bool freeze_generator = false);

// Clean-forward force metrics on held-out frames. mae and label_rms are
// per-component; cosine is the mean per-atom direction cosine.
struct ForceEval {
  double mae = 0.0;
  double label_rms = 0.0;
  double cosine = 0.0;
};
ForceEval eval_forces(const TrainConfig& cfg, std::span<const double> params,
                      std::span<const Molecule> frames);

// Training-log CSV: header "step,anids,kl,gamma,energy,force,total".
std::string log_to_csv(std::span<const LossRow> rows);
void save_log_csv(const std::string& path, std::span<const LossRow> rows);

// Checkpoints carry config + named parameter tensors + optimizer state;
// a round trip restores bitwise-identical forward passes.
void save_checkpoint(const std::string& path, const TrainRun& run);
TrainRun load_checkpoint(const std::string& path);

}  // namespace anids
