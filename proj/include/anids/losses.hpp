#pragma once

// Training objectives: the anisotropic denoising loss, the KL
// regularizer against the isotropic prior, the anisotropic-mass hinge,
// and the supervised energy/force losses. All are templated on the
// scalar type so the same expressions run under autodiff and as plain
// doubles.

#include <span>
#include <vector>

#include "anids/ad.hpp"
#include "anids/errors.hpp"
#include "anids/la3.hpp"
#include "anids/noisegen.hpp"

namespace anids {

template <class T>
struct LossBreakdown {
  T anids{0.0}, kl{0.0}, gamma{0.0}, energy{0.0}, force{0.0}, total{0.0};
};

using LossBreakdownD = LossBreakdown<double>;

// Denoising regression target for one atom: L^{-T} eps, which equals
// sigma^{-1} (X-tilde - X) exactly since X-tilde - X = L eps.
template <class T>
Vec3<T> denoise_target(const LowerTri3<T>& L, const Vec3d& eps) {
  return solve_lower_transposed(L, Vec3<T>{T{eps.x}, T{eps.y}, T{eps.z}});
}

// Mean over corrupted atoms of || target_i - pred_i ||^2.
template <class T>
T anids_loss(std::span<const Vec3<T>> pred, const CovarianceSet<T>& cov,
             const PerturbedMolecule<T>& pert) {
  const int n = static_cast<int>(pert.mask.size());
  if (pred.size() != static_cast<size_t>(n) || cov.size() != n)
    throw DimensionMismatch("anids_loss: predictions/covariances/mask disagree");
  if (pert.n_masked == 0) throw EmptyMask("anids_loss: no corrupted atoms");
  T acc{0.0};
  for (int i = 0; i < n; ++i) {
    if (!pert.mask[i]) continue;
    Vec3<T> d = denoise_target(cov.chol[i], pert.eps[i]) - pred[i];
    acc += norm_sq(d);
  }
  return acc / T{static_cast<double>(pert.n_masked)};
}

// KL( N(0, sigma_i) || N(0, sigma_p^2 I) ) averaged over the selected
// atoms (empty mask = all atoms):
//   1/2 ( tr(sigma_i)/sigma_p^2 - 3 + 3 ln sigma_p^2 - ln|sigma_i| ),
// with ln|sigma| = 2 sum_k ln L_kk from the cached Cholesky factor.
template <class T>
T kl_loss(const CovarianceSet<T>& cov, double sigma_p, std::span<const uint8_t> mask = {}) {
  using std::log;
  const int n = cov.size();
  const double sp2 = sigma_p * sigma_p;
  const double log_prior_det = 3.0 * std::log(sp2);
  T acc{0.0};
  int count = 0;
  for (int i = 0; i < n; ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const LowerTri3<T>& L = cov.chol[i];
    T log_det = 2.0 * (log(L.l00) + log(L.l11) + log(L.l22));
    acc += 0.5 * (cov.sigma[i].trace() / sp2 - 3.0 + log_prior_det - log_det);
    ++count;
  }
  return acc / T{static_cast<double>(count > 0 ? count : 1)};
}

// One-sided hinge-squared penalty (1/|M|) sum_i max(0, kappa - Gamma_i)^2;
// zero once every selected Gamma_i sits at or above kappa.
template <class T>
T gamma_hinge(std::span<const T> big_gamma, double kappa, std::span<const uint8_t> mask = {}) {
  T acc{0.0};
  int count = 0;
  for (size_t i = 0; i < big_gamma.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    acc += pow2(relu(T{kappa} - big_gamma[i]));
    ++count;
  }
  return acc / T{static_cast<double>(count > 0 ? count : 1)};
}

// |E - E_hat|, assembled from relu so the op set stays minimal.
template <class T>
T energy_loss(double label, const T& pred) {
  T d = T{label} - pred;
  return relu(d) + relu(-d);
}

// Mean squared force error over the UNperturbed atoms (mask == 0), with
// a max(1, count) guard so a fully corrupted structure contributes 0.
template <class T>
T force_loss(std::span<const Vec3d> label, std::span<const Vec3<T>> pred,
             std::span<const uint8_t> pert_mask) {
  if (label.size() != pred.size() || label.size() != pert_mask.size())
    throw DimensionMismatch("force_loss: labels/predictions/mask disagree");
  T acc{0.0};
  int count = 0;
  for (size_t i = 0; i < label.size(); ++i) {
    if (pert_mask[i]) continue;
    Vec3<T> d{pred[i].x - label[i].x, pred[i].y - label[i].y, pred[i].z - label[i].z};
    acc += norm_sq(d);
    ++count;
  }
  return acc / T{static_cast<double>(count > 0 ? count : 1)};
}

struct LossWeights {
  double anids = 1.0, kl = 1.0, gamma = 1.0, energy = 1.0, force = 1.0;
};

template <class T>
void finish_total(LossBreakdown<T>& b, const LossWeights& w) {
  b.total = w.anids * b.anids + w.kl * b.kl + w.gamma * b.gamma + w.energy * b.energy +
            w.force * b.force;
}

inline LossBreakdownD values_of(const LossBreakdown<Scalar>& b) {
  return {b.anids.value(), b.kl.value(),    b.gamma.value(),
          b.energy.value(), b.force.value(), b.total.value()};
}

inline const LossBreakdownD& values_of(const LossBreakdownD& b) { return b; }

}  // namespace anids
