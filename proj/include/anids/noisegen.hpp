#pragma once

// Structure-aware anisotropic noise generation: per-atom full 3x3
// covariances built as an isotropic base minus normalized rank-one
// corrections along neighbor directions, their Cholesky factors, and
// perturbation sampling through them.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "anids/encoder.hpp"
#include "anids/errors.hpp"
#include "anids/la3.hpp"
#include "anids/molecule.hpp"
#include "anids/neighbors.hpp"
#include "anids/rng.hpp"

namespace anids {

enum class NoiseMode {
  AniDS,       // full anisotropic covariance
  DenoiseVAE,  // per-atom isotropic: sigma_i = a_i I (gamma forced to 0)
  DeNS         // fixed isotropic: sigma^2 I, generator unused
};

const char* to_string(NoiseMode mode);
NoiseMode noise_mode_from_string(std::string_view s);  // throws std::invalid_argument

template <class T>
struct CovarianceSet {
  std::vector<SymMat3<T>> sigma;       // covariance per atom, A^2
  std::vector<LowerTri3<T>> chol;      // L_i with L_i L_i^T = sigma_i
  std::vector<T> a;                    // isotropic base per atom
  std::vector<T> big_gamma;            // anisotropic mass per atom, in [0, 1)
  std::vector<std::vector<T>> gamma;   // per-edge weights, aligned with the neighbor list

  int size() const { return static_cast<int>(sigma.size()); }
};

using CovarianceSetD = CovarianceSet<double>;

// The strict bound sum_j gamma_j < 1 can be lost to rounding once the
// regulator's relative weight drops below machine epsilon; weights are
// rescaled onto this ceiling in that regime so the PD guarantee survives
// in floating point.
inline constexpr double kGammaCeiling = 1.0 - 1e-7;

// Normalized anisotropic weights for one atom:
//   gamma_j = exp(b_j) / (sum_l exp(b_l) + c),  Gamma = sum_j gamma_j < 1.
// Logits are max-shifted (including the regulator's logit ln c) before
// exponentiation, which leaves the weights unchanged and cannot overflow.
template <class T>
std::pair<std::vector<T>, T> anisotropic_weights(std::span<const T> b, const T& c) {
  using std::exp;
  using std::log;
  std::vector<T> gamma(b.size());
  if (b.empty()) return {std::move(gamma), T{0.0}};
  T log_c = log(c);
  double shift = value_of(log_c);
  for (const T& bj : b) shift = std::max(shift, value_of(bj));
  T denom = exp(log_c - shift);
  for (const T& bj : b) denom += exp(bj - shift);
  T big_gamma{0.0};
  for (size_t j = 0; j < b.size(); ++j) {
    gamma[j] = exp(b[j] - shift) / denom;
    big_gamma += gamma[j];
  }
  if (value_of(big_gamma) > kGammaCeiling) {
    T scale = T{kGammaCeiling} / big_gamma;
    big_gamma = T{0.0};
    for (T& g : gamma) {
      g = g * scale;
      big_gamma += g;
    }
  }
  return {std::move(gamma), big_gamma};
}

// sigma = a (I - sum_j gamma_j u_j u_j^T) with unit directions u_j.
// Eigenvalues are bounded below by a (1 - Gamma) > 0 when Gamma < 1.
template <class T>
SymMat3<T> build_covariance(const T& a, std::span<const T> gamma, std::span<const Vec3d> units) {
  SymMat3<T> corr;  // sum_j gamma_j u_j u_j^T
  for (size_t j = 0; j < gamma.size(); ++j) {
    SymMat3d p = outer(units[j]);
    corr += SymMat3<T>{gamma[j] * p.xx, gamma[j] * p.xy, gamma[j] * p.xz,
                       gamma[j] * p.yy, gamma[j] * p.yz, gamma[j] * p.zz};
  }
  SymMat3<T> m = SymMat3<T>::identity() - corr;
  return a * m;
}

// Full generator pass: encoder + heads + covariance assembly + Cholesky.
// Positions are the clean coordinates (doubles); gradients, when T is the
// autodiff scalar, flow only through the generator parameters.
template <class T>
CovarianceSet<T> generate_covariances(const EncoderConfig& cfg, std::span<const T> gen_params,
                                      std::span<const int> z, std::span<const Vec3d> pos,
                                      const NeighborList& topo, NoiseMode mode,
                                      double dens_sigma) {
  const int n = topo.size();
  CovarianceSet<T> out;
  out.sigma.resize(n);
  out.chol.resize(n);
  out.a.resize(n);
  out.big_gamma.assign(n, T{0.0});
  out.gamma.resize(n);

  if (mode == NoiseMode::DeNS) {
    const double s2 = dens_sigma * dens_sigma;
    for (int i = 0; i < n; ++i) {
      out.a[i] = T{s2};
      out.sigma[i] = SymMat3<T>::diag(T{s2}, T{s2}, T{s2});
      out.chol[i] = cholesky3(out.sigma[i]);
    }
    return out;
  }

  if (gen_params.size() != static_cast<size_t>(generator_size(cfg)))
    throw DimensionMismatch("generate_covariances: wrong generator parameter size");
  std::span<const T> core = gen_params.subspan(0, encoder_core_size(cfg));
  std::span<const T> head = gen_params.subspan(encoder_core_size(cfg));

  std::vector<Vec3<T>> posT = to_positions<T>(pos);
  std::vector<T> h = encode<T>(cfg, core, z, posT, topo);
  HeadsOut<T> ho = heads<T>(cfg, head, h, posT, topo);

  std::vector<Vec3d> units;
  for (int i = 0; i < n; ++i) {
    out.a[i] = ho.a[i];
    if (mode == NoiseMode::AniDS && !topo.of(i).empty()) {
      auto [gamma, big] = anisotropic_weights<T>(ho.b[i], ho.c[i]);
      units.clear();
      for (const auto& e : topo.of(i)) units.push_back(e.r * (1.0 / e.dist));
      out.sigma[i] = build_covariance<T>(out.a[i], gamma, units);
      out.gamma[i] = std::move(gamma);
      out.big_gamma[i] = big;
    } else {
      // DenoiseVAE mode, or an isolated atom: purely isotropic a_i I
      out.sigma[i] = SymMat3<T>::diag(out.a[i], out.a[i], out.a[i]);
    }
    out.chol[i] = cholesky3(out.sigma[i]);
  }
  return out;
}

template <class T>
struct PerturbedMolecule {
  std::vector<Vec3<T>> pos;       // X-tilde; equals the input for masked-out atoms
  std::vector<Vec3d> eps;         // the standard-normal draws, zero for masked-out atoms
  std::vector<uint8_t> mask;      // 1 = corrupted
  int n_masked = 0;
};

// X-tilde_i = X_i + L_i eps_i on masked-in atoms, with eps recorded so
// losses can reuse the exact draws (the reparameterization path through
// L_i stays differentiable in T).
template <class T>
PerturbedMolecule<T> apply_perturbation(std::span<const Vec3d> pos, const CovarianceSet<T>& cov,
                                        std::span<const uint8_t> mask,
                                        std::span<const Vec3d> eps) {
  const int n = static_cast<int>(pos.size());
  PerturbedMolecule<T> out;
  out.pos.resize(n);
  out.eps.assign(n, Vec3d{});
  out.mask.assign(mask.begin(), mask.end());
  for (int i = 0; i < n; ++i) {
    if (mask[i]) {
      out.eps[i] = eps[i];
      Vec3<T> step = cov.chol[i].matvec({T{eps[i].x}, T{eps[i].y}, T{eps[i].z}});
      out.pos[i] = Vec3<T>{T{pos[i].x} + step.x, T{pos[i].y} + step.y, T{pos[i].z} + step.z};
      ++out.n_masked;
    } else {
      out.pos[i] = {T{pos[i].x}, T{pos[i].y}, T{pos[i].z}};
    }
  }
  return out;
}

// Draws eps from per-atom streams keyed by (seed, frame_key, atom), so
// results do not depend on evaluation order.
template <class T>
PerturbedMolecule<T> sample_perturbation(const Molecule& mol, const CovarianceSet<T>& cov,
                                         std::span<const uint8_t> mask, uint64_t seed,
                                         uint64_t frame_key) {
  std::vector<Vec3d> eps(mol.size());
  for (int i = 0; i < mol.size(); ++i)
    eps[i] = rng::Stream(seed, frame_key, static_cast<uint64_t>(i)).gaussian3();
  return apply_perturbation<T>(mol.pos, cov, mask, eps);
}

// max_i || sigma_i(R X + t) - R sigma_i(X) R^T ||_inf for one rigid motion.
double equivariance_probe(const EncoderConfig& cfg, std::span<const double> gen_params,
                          const Molecule& mol, NoiseMode mode, double dens_sigma,
                          const Mat3d& rotation, const Vec3d& translation);

}  // namespace anids
