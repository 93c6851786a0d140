#include "anids/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace anids {

using nlohmann::json;

void TrainConfig::validate() const {
  auto bad = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (n_species < 1 || dim < 1 || n_rbf < 2 || n_layers < 1) bad("encoder dims out of range");
  if (!(cutoff > 0)) bad("cutoff must be positive");
  if (!(sigma_p > 0)) bad("sigma_p must be positive");
  if (!(kappa > 0) || !(kappa < 1)) bad("kappa must lie in (0, 1)");
  if (p_anids < 0 || p_anids > 1) bad("p_anids must lie in [0, 1]");
  if (r_anids < 0 || r_anids > 1) bad("r_anids must lie in [0, 1]");
  for (double l : {lambda_anids, lambda_kl, lambda_gamma, lambda_energy, lambda_force})
    if (l < 0) bad("loss weights must be non-negative");
  if (!(lr > 0) || batch < 1) bad("optimizer hyperparameters out of range");
  if (!(dens_sigma > 0)) bad("dens_sigma must be positive");
}

namespace {

Vec3d vec_from_json(const json& j) { return {j.at(0), j.at(1), j.at(2)}; }

SymMat3d sym_from_json(const json& j) {
  return {j.at(0), j.at(1), j.at(2), j.at(3), j.at(4), j.at(5)};
}

ToyPotential potential_from_json(const json& j) {
  ToyPotential pot;
  std::string kind = j.at("kind");
  if (kind == "harmonic") {
    pot.kind = ToyPotential::Kind::Harmonic;
    for (const json& s : j.value("sites", json::array())) {
      HarmonicSite site;
      site.center = vec_from_json(s.at("center"));
      if (s.contains("stiffness")) {
        site.stiffness = sym_from_json(s.at("stiffness"));
      } else {
        double k = s.at("k");
        site.stiffness = SymMat3d::diag(k, k, k);
      }
      pot.sites.push_back(site);
    }
    for (const json& b : j.value("bonds", json::array()))
      pot.bonds.push_back({b.at("i"), b.at("j"), b.at("k"), b.at("r0")});
  } else if (kind == "lennard-jones") {
    pot.kind = ToyPotential::Kind::LennardJones;
    pot.lj_epsilon = j.value("epsilon", 1.0);
    pot.lj_sigma = j.value("sigma", 1.0);
    for (const json& p : j.value("pairs", json::array()))
      pot.lj_pairs.push_back({p.at("i"), p.at("j"), p.at("epsilon"), p.at("sigma")});
  } else {
    throw std::invalid_argument("config: unknown potential kind '" + kind + "'");
  }
  return pot;
}

Molecule start_from_json(const json& j) {
  Molecule mol;
  for (const json& s : j.at("species")) {
    int z = symbol_to_z(std::string(s));
    if (z == 0) throw std::invalid_argument("config: unknown species '" + std::string(s) + "'");
    mol.z.push_back(z);
  }
  for (const json& p : j.at("positions")) mol.pos.push_back(vec_from_json(p));
  if (mol.z.size() != mol.pos.size())
    throw std::invalid_argument("config: species/positions length mismatch");
  return mol;
}

void read_train(TrainConfig& t, const json& j) {
  t.n_species = j.value("n_species", t.n_species);
  t.dim = j.value("dim", t.dim);
  t.n_rbf = j.value("n_rbf", t.n_rbf);
  t.n_layers = j.value("n_layers", t.n_layers);
  t.cutoff = j.value("cutoff", t.cutoff);
  t.lambda_anids = j.value("lambda_anids", t.lambda_anids);
  t.lambda_kl = j.value("lambda_kl", t.lambda_kl);
  t.lambda_gamma = j.value("lambda_gamma", t.lambda_gamma);
  t.lambda_energy = j.value("lambda_energy", t.lambda_energy);
  t.lambda_force = j.value("lambda_force", t.lambda_force);
  t.sigma_p = j.value("sigma_p", t.sigma_p);
  t.kappa = j.value("kappa", t.kappa);
  t.p_anids = j.value("p_anids", t.p_anids);
  t.r_anids = j.value("r_anids", t.r_anids);
  if (j.contains("noise_mode")) t.noise_mode = noise_mode_from_string(std::string(j.at("noise_mode")));
  t.dens_sigma = j.value("dens_sigma", t.dens_sigma);
  t.lr = j.value("lr", t.lr);
  t.beta1 = j.value("beta1", t.beta1);
  t.beta2 = j.value("beta2", t.beta2);
  t.adam_eps = j.value("adam_eps", t.adam_eps);
  t.weight_decay = j.value("weight_decay", t.weight_decay);
  t.batch = j.value("batch", t.batch);
  t.steps = j.value("steps", t.steps);
  t.seed = j.value("seed", t.seed);
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j = json::parse(json_text);
  RunConfig rc;
  read_train(rc.train, j);
  rc.train.validate();
  if (j.contains("data")) {
    const json& d = j.at("data");
    if (d.contains("potential")) rc.data.potential = potential_from_json(d.at("potential"));
    if (d.contains("start")) rc.data.start = start_from_json(d.at("start"));
    rc.data.n_frames = d.value("n_frames", rc.data.n_frames);
    rc.data.kT = d.value("kt", rc.data.kT);
    rc.data.sampler.dt = d.value("dt", rc.data.sampler.dt);
    rc.data.sampler.burn_in = d.value("burn_in", rc.data.sampler.burn_in);
    rc.data.sampler.stride = d.value("stride", rc.data.sampler.stride);
    rc.data.val_fraction = d.value("val_fraction", rc.data.val_fraction);
  }
  if (j.contains("probe")) {
    const json& p = j.at("probe");
    rc.probe.delta = p.value("delta", rc.probe.delta);
    rc.probe.n_magnitudes = p.value("n_magnitudes", rc.probe.n_magnitudes);
  }
  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string train_config_to_json(const TrainConfig& t) {
  json j;
  j["n_species"] = t.n_species;
  j["dim"] = t.dim;
  j["n_rbf"] = t.n_rbf;
  j["n_layers"] = t.n_layers;
  j["cutoff"] = t.cutoff;
  j["lambda_anids"] = t.lambda_anids;
  j["lambda_kl"] = t.lambda_kl;
  j["lambda_gamma"] = t.lambda_gamma;
  j["lambda_energy"] = t.lambda_energy;
  j["lambda_force"] = t.lambda_force;
  j["sigma_p"] = t.sigma_p;
  j["kappa"] = t.kappa;
  j["p_anids"] = t.p_anids;
  j["r_anids"] = t.r_anids;
  j["noise_mode"] = to_string(t.noise_mode);
  j["dens_sigma"] = t.dens_sigma;
  j["lr"] = t.lr;
  j["beta1"] = t.beta1;
  j["beta2"] = t.beta2;
  j["adam_eps"] = t.adam_eps;
  j["weight_decay"] = t.weight_decay;
  j["batch"] = t.batch;
  j["steps"] = t.steps;
  j["seed"] = t.seed;
  return j.dump();
}

TrainConfig train_config_from_json(const std::string& json_text) {
  TrainConfig t;
  read_train(t, json::parse(json_text));
  t.validate();
  return t;
}

std::string config_hash(const TrainConfig& cfg) {
  std::string s = train_config_to_json(cfg);
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace anids
