#include "anids/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "anids/neighbors.hpp"
#include "anids/noisegen.hpp"
#include "anids/rng.hpp"
#include "anids/trainer.hpp"

namespace anids {

double smape(double e_ref, double e_pert) {
  double denom = std::abs(e_ref) + std::abs(e_pert);
  if (denom == 0.0) return 0.0;
  return 2.0 * std::abs(e_ref - e_pert) / denom;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  const int n = static_cast<int>(v.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return v[i] < v[j]; });
  std::vector<double> rank(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    double r = 0.5 * (i + j) + 1.0;  // average rank of the tie group, 1-based
    for (int k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  std::vector<double> ra = average_ranks(a), rb = average_ranks(b);
  const int n = static_cast<int>(a.size());
  double ma = 0, mb = 0;
  for (int i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0, da = 0, db = 0;
  for (int i = 0; i < n; ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  if (da == 0 || db == 0) return 0.0;
  return num / std::sqrt(da * db);
}

EigenProbeReport run_probe(const TrainConfig& cfg, std::span<const double> params,
                           const Molecule& mol, const ToyPotential& pot,
                           const ProbeConfig& probe, uint64_t seed) {
  auto [gen, den] = detail::split_params<double>(cfg, params);
  (void)den;
  NeighborList topo = build_neighbors(mol, cfg.cutoff);
  CovarianceSetD cov = generate_covariances<double>(cfg.generator_encoder(), gen, mol.z, mol.pos,
                                                    topo, cfg.noise_mode, cfg.dens_sigma);

  const double e_ref = pot.energy(mol.pos);
  EigenProbeReport report;
  report.delta = probe.delta;

  double rho_sum = 0.0;
  int rho_count = 0;
  for (int i = 0; i < mol.size(); ++i) {
    EigenProbeAtom atom;
    Eig3 eig = eigh3(cov.sigma[i]);
    atom.eigenvalues = eig.values;
    atom.eigenvectors = eig.vectors;

    for (int k = 0; k < 3; ++k) {
      rng::Stream ms(seed, static_cast<uint64_t>(i), static_cast<uint64_t>(k));
      double acc = 0.0;
      int count = 0;
      for (int m = 0; m < probe.n_magnitudes; ++m) {
        double mag = ms.uniform() * probe.delta;
        for (double sign : {1.0, -1.0}) {
          std::vector<Vec3d> x = mol.pos;
          x[i] += eig.vectors[k] * (sign * mag);
          acc += smape(e_ref, pot.energy(x));
          ++count;
        }
      }
      atom.sensitivity[k] = count ? acc / count : 0.0;
    }
    rho_sum += spearman(std::span<const double>(atom.eigenvalues),
                        std::span<const double>(atom.sensitivity));
    ++rho_count;

    if (!topo.of(i).empty()) {
      const auto& near = *std::min_element(
          topo.of(i).begin(), topo.of(i).end(),
          [](const auto& a, const auto& b) { return a.dist < b.dist; });
      atom.nearest = near.j;
      Vec3d u = near.r * (1.0 / near.dist);
      atom.bond_cos = std::abs(dot(eig.vectors[0], u));
    }
    report.atoms.push_back(atom);
  }
  report.spearman_rho = rho_count ? rho_sum / rho_count : 0.0;
  return report;
}

std::string EigenProbeReport::to_json() const {
  nlohmann::json j;
  j["delta"] = delta;
  j["spearman_rho"] = spearman_rho;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : atoms) {
    nlohmann::json ja;
    ja["eigenvalues"] = a.eigenvalues;
    nlohmann::json vecs = nlohmann::json::array();
    for (const Vec3d& v : a.eigenvectors) vecs.push_back({v.x, v.y, v.z});
    ja["eigenvectors"] = vecs;
    ja["sensitivity"] = a.sensitivity;
    ja["bond_cos"] = a.bond_cos;
    ja["nearest"] = a.nearest;
    arr.push_back(std::move(ja));
  }
  j["atoms"] = std::move(arr);
  return j.dump(1);
}

std::string EigenProbeReport::to_csv() const {
  std::string out = "atom,direction,eigenvalue,sensitivity,bond_cos,nearest\n";
  char buf[160];
  for (size_t i = 0; i < atoms.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      std::snprintf(buf, sizeof(buf), "%zu,%d,%.17g,%.17g,%.17g,%d\n", i, k,
                    atoms[i].eigenvalues[k], atoms[i].sensitivity[k], atoms[i].bond_cos,
                    atoms[i].nearest);
      out += buf;
    }
  }
  return out;
}

}  // namespace anids
