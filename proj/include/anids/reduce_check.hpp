#pragma once

// Equivalence suite for the special-case noise modes: with gamma == 0 and
// a fixed scale the anisotropic machinery must reproduce classical
// fixed-scale denoising targets and losses exactly, and the per-atom
// isotropic mode must agree with the scalar-variance formulation at its
// optimum. The comparison formulas here are written out independently of
// the covariance-based loss path.

#include <cstdint>
#include <string>

namespace anids {

struct ReduceCheckReport {
  double dens_target_dev = 0.0;        // max |L^-T eps - (X~-X)/sigma^2|
  double dens_loss_dev = 0.0;          // |anids_loss - classical fixed-scale loss|
  double denoisevae_target_dev = 0.0;  // max |L^-T eps - (X~-X)/a_i|
  double denoisevae_loss_dev = 0.0;    // |anids_loss - per-atom isotropic loss|
  double denoisevae_argmin_dev = 0.0;  // both objectives at phi* = (X~-X)/a_i
  double continuity_dev = 0.0;         // anids loss vs isotropic loss as gamma -> 0
  double tolerance = 1e-10;

  bool pass() const {
    return dens_target_dev <= tolerance && dens_loss_dev <= tolerance &&
           denoisevae_target_dev <= tolerance && denoisevae_loss_dev <= tolerance &&
           denoisevae_argmin_dev <= tolerance && continuity_dev <= tolerance;
  }
  std::string summary() const;
};

ReduceCheckReport reduce_check(uint64_t seed);

}  // namespace anids
