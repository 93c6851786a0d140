#include "anids/potential.hpp"

#include <cmath>
#include <stdexcept>

#include "anids/errors.hpp"
#include "anids/rng.hpp"

namespace anids {

namespace {

struct LJParams {
  double eps, sigma;
};

LJParams lj_for(const ToyPotential& pot, int i, int j) {
  for (const auto& o : pot.lj_pairs) {
    if ((o.i == i && o.j == j) || (o.i == j && o.j == i)) return {o.epsilon, o.sigma};
  }
  return {pot.lj_epsilon, pot.lj_sigma};
}

}  // namespace

double ToyPotential::energy(std::span<const Vec3d> pos) const {
  double e = 0.0;
  if (kind == Kind::Harmonic) {
    for (size_t i = 0; i < sites.size(); ++i) {
      Vec3d d = pos[i] - sites[i].center;
      e += 0.5 * dot(d, sites[i].stiffness.matvec(d));
    }
    for (const auto& b : bonds) {
      double r = norm(pos[b.i] - pos[b.j]);
      double s = r - b.r0;
      e += 0.5 * b.k * s * s;
    }
  } else {
    const int n = static_cast<int>(pos.size());
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        auto [eps, sigma] = lj_for(*this, i, j);
        double r = norm(pos[i] - pos[j]);
        double sr6 = std::pow(sigma / r, 6);
        e += 4.0 * eps * (sr6 * sr6 - sr6);
      }
    }
  }
  return e;
}

std::vector<Vec3d> ToyPotential::forces(std::span<const Vec3d> pos) const {
  std::vector<Vec3d> f(pos.size());
  if (kind == Kind::Harmonic) {
    for (size_t i = 0; i < sites.size(); ++i) {
      Vec3d d = pos[i] - sites[i].center;
      f[i] += -1.0 * sites[i].stiffness.matvec(d);
    }
    for (const auto& b : bonds) {
      Vec3d rij = pos[b.i] - pos[b.j];
      double r = norm(rij);
      Vec3d g = rij * (b.k * (r - b.r0) / r);  // dE/dx_i
      f[b.i] += -1.0 * g;
      f[b.j] += g;
    }
  } else {
    const int n = static_cast<int>(pos.size());
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        auto [eps, sigma] = lj_for(*this, i, j);
        Vec3d rij = pos[i] - pos[j];
        double r2 = norm_sq(rij);
        double sr6 = std::pow(sigma * sigma / r2, 3);
        // dE/dr * 1/r
        double coef = 24.0 * eps * (sr6 - 2.0 * sr6 * sr6) / r2;
        Vec3d g = rij * coef;
        f[i] += -1.0 * g;
        f[j] += g;
      }
    }
  }
  return f;
}

ToyPotential ToyPotential::harmonic_wells(std::span<const Vec3d> centers, double k) {
  ToyPotential pot;
  pot.kind = Kind::Harmonic;
  for (const Vec3d& c : centers) pot.sites.push_back({c, SymMat3d::diag(k, k, k)});
  return pot;
}

ToyPotential ToyPotential::harmonic_diatomic(double k, double r0) {
  ToyPotential pot;
  pot.kind = Kind::Harmonic;
  pot.bonds.push_back({0, 1, k, r0});
  return pot;
}

ToyPotential ToyPotential::lennard_jones(double epsilon, double sigma) {
  ToyPotential pot;
  pot.kind = Kind::LennardJones;
  pot.lj_epsilon = epsilon;
  pot.lj_sigma = sigma;
  return pot;
}

std::vector<Molecule> sample_boltzmann(const ToyPotential& pot, const Molecule& start,
                                       int n_frames, double kT, uint64_t seed,
                                       const SamplerOptions& opts) {
  if (!(kT > 0)) throw std::invalid_argument("sample_boltzmann: temperature must be positive");
  const int n = start.size();
  std::vector<Vec3d> x = start.pos;
  const double noise = std::sqrt(2.0 * kT * opts.dt);

  std::vector<Molecule> frames;
  frames.reserve(n_frames);

  auto step = [&](int64_t t) {
    std::vector<Vec3d> f = pot.forces(x);
    for (int i = 0; i < n; ++i) {
      rng::Stream s(seed, static_cast<uint64_t>(t), static_cast<uint64_t>(i));
      x[i] += f[i] * opts.dt + s.gaussian3() * noise;
      for (double c : {x[i].x, x[i].y, x[i].z}) {
        if (!(std::abs(c) <= opts.max_coord))
          throw Diverged("sample_boltzmann: coordinate exceeded " +
                         std::to_string(opts.max_coord) + " A; reduce dt");
      }
    }
  };

  int64_t t = 0;
  for (int b = 0; b < opts.burn_in; ++b) step(t++);
  for (int fidx = 0; fidx < n_frames; ++fidx) {
    for (int s = 0; s < opts.stride; ++s) step(t++);
    Molecule m;
    m.z = start.z;
    m.pos = x;
    m.forces = pot.forces(x);
    m.energy = pot.energy(x);
    frames.push_back(std::move(m));
  }
  return frames;
}

}  // namespace anids
