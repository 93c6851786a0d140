#include "anids/trainer.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "anids/rng.hpp"

namespace anids {

void AdamW::step(std::span<double> params, std::span<const double> grads, const AdamWConfig& cfg,
                 size_t frozen_begin, size_t frozen_end) {
  if (params.size() != grads.size() || params.size() != m_.size())
    throw DimensionMismatch("AdamW::step: size mismatch");
  for (size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i]))
      throw NonFiniteGradient("AdamW::step: non-finite gradient at parameter " +
                              std::to_string(i));
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    if (i >= frozen_begin && i < frozen_end) continue;
    m_[i] = cfg.beta1 * m_[i] + (1.0 - cfg.beta1) * grads[i];
    v_[i] = cfg.beta2 * v_[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    double m_hat = m_[i] / bc1;
    double v_hat = v_[i] / bc2;
    params[i] -= cfg.lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.weight_decay * params[i]);
  }
}

MolDraws draw_for(const TrainConfig& cfg, int64_t step, int slot, int n_atoms, Scheme scheme) {
  MolDraws d;
  d.mask.assign(n_atoms, 1);
  d.eps.assign(n_atoms, Vec3d{});
  const auto ustep = static_cast<uint64_t>(step);
  const auto uslot = static_cast<uint64_t>(slot);
  if (scheme == Scheme::Supervised) {
    d.corrupt = rng::Stream(cfg.seed, ustep, uslot * 4 + 0).uniform() < cfg.p_anids;
    if (d.corrupt) {
      rng::Stream ms(cfg.seed, ustep, uslot * 4 + 1);
      for (int i = 0; i < n_atoms; ++i) d.mask[i] = ms.uniform() < cfg.r_anids ? 1 : 0;
    } else {
      d.mask.assign(n_atoms, 0);
    }
  }
  if (d.corrupt) {
    for (int i = 0; i < n_atoms; ++i)
      d.eps[i] =
          rng::Stream(cfg.seed, ustep, uslot * 4 + 2, static_cast<uint64_t>(i)).gaussian3();
  }
  return d;
}

TrainRun TrainRun::create(const TrainConfig& cfg) {
  cfg.validate();
  TrainRun run;
  run.cfg = cfg;
  ParamLayout gl = generator_layout(cfg.generator_encoder());
  ParamLayout dl = denoiser_layout(cfg.denoiser_encoder());
  std::vector<double> gen = init_params(gl, rng::mix(cfg.seed, 0x67656eULL));
  std::vector<double> den = init_params(dl, rng::mix(cfg.seed, 0x64656eULL));
  run.params = std::move(gen);
  run.params.insert(run.params.end(), den.begin(), den.end());
  run.gen_size = gl.total;
  run.opt = AdamW(run.params.size());
  return run;
}

namespace {

LossBreakdownD run_step(TrainRun& run, std::span<const Molecule> batch, Scheme scheme,
                        bool freeze_generator) {
  if (batch.empty()) throw std::invalid_argument("training step: empty batch");
  ad::Tape tape;
  tape.reserve(1 << 16);
  std::vector<Scalar> p;
  p.reserve(run.params.size());
  for (double v : run.params) p.push_back(tape.leaf(v));

  LossBreakdown<Scalar> lb = batch_losses<Scalar>(run.cfg, p, batch, run.step, scheme);
  if (!std::isfinite(lb.total.value()))
    throw NonFiniteGradient("training step: non-finite loss");

  std::vector<double> adj;
  tape.backward(lb.total, adj);
  std::vector<double> grads(run.params.size());
  for (size_t i = 0; i < grads.size(); ++i) grads[i] = adj[i];  // leaves occupy nodes 0..P-1

  run.opt.step(run.params, grads, run.optimizer_config(), 0,
               freeze_generator ? static_cast<size_t>(run.gen_size) : 0);

  LossBreakdownD values = values_of(lb);
  run.log.push_back({run.step, values});
  ++run.step;
  return values;
}

void format_double(std::string& out, double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  out.append(buf, p);
}

}  // namespace

LossBreakdownD pretrain_step(TrainRun& run, std::span<const Molecule> batch) {
  return run_step(run, batch, Scheme::Pretrain, false);
}

LossBreakdownD supervised_step(TrainRun& run, std::span<const Molecule> batch,
                               bool freeze_generator) {
  return run_step(run, batch, Scheme::Supervised, freeze_generator);
}

ForceEval eval_forces(const TrainConfig& cfg, std::span<const double> params,
                      std::span<const Molecule> frames) {
  const EncoderConfig dcfg = cfg.denoiser_encoder();
  auto [gen, den] = detail::split_params<double>(cfg, params);
  (void)gen;
  const int ds_core = encoder_core_size(dcfg);
  const MlpDims edge = edge_head_dims(dcfg);
  std::span<const double> den_core = den.subspan(0, ds_core);
  std::span<const double> den_force = den.subspan(ds_core + edge.size(), edge.size());

  double abs_err = 0.0, sq_label = 0.0, cos_sum = 0.0;
  int64_t n_comp = 0, n_cos = 0;
  for (const Molecule& mol : frames) {
    if (!mol.has_forces()) throw MissingLabels("eval_forces: frame has no force labels");
    NeighborList topo = build_neighbors(mol, cfg.cutoff);
    std::vector<Vec3d> h_pos = mol.pos;
    std::vector<double> h = encode<double>(dcfg, den_core, mol.z, h_pos, topo);
    std::vector<Vec3d> pred = vector_readout<double>(dcfg, den_force, h, h_pos, topo);
    for (int i = 0; i < mol.size(); ++i) {
      const Vec3d& f = mol.forces[i];
      const Vec3d& g = pred[i];
      for (int c = 0; c < 3; ++c) {
        abs_err += std::abs(g[c] - f[c]);
        sq_label += f[c] * f[c];
        ++n_comp;
      }
      double nf = norm(f), ng = norm(g);
      if (nf > 1e-12 && ng > 1e-12) {
        cos_sum += dot(f, g) / (nf * ng);
        ++n_cos;
      }
    }
  }
  ForceEval ev;
  ev.mae = n_comp ? abs_err / n_comp : 0.0;
  ev.label_rms = n_comp ? std::sqrt(sq_label / n_comp) : 0.0;
  ev.cosine = n_cos ? cos_sum / n_cos : 0.0;
  return ev;
}

std::string log_to_csv(std::span<const LossRow> rows) {
  std::string out = "step,anids,kl,gamma,energy,force,total\n";
  for (const LossRow& r : rows) {
    out += std::to_string(r.step);
    for (double v : {r.loss.anids, r.loss.kl, r.loss.gamma, r.loss.energy, r.loss.force,
                     r.loss.total}) {
      out += ',';
      format_double(out, v);
    }
    out += '\n';
  }
  return out;
}

void save_log_csv(const std::string& path, std::span<const LossRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << log_to_csv(rows);
}

namespace {

nlohmann::json tensors_to_json(const ParamLayout& layout, std::span<const double> flat,
                               const std::string& prefix) {
  nlohmann::json arr = nlohmann::json::array();
  for (const TensorSpec& t : layout.tensors) {
    nlohmann::json jt;
    jt["name"] = prefix + t.name;
    jt["shape"] = t.shape;
    jt["data"] = std::vector<double>(flat.begin() + t.offset, flat.begin() + t.offset + t.size);
    arr.push_back(std::move(jt));
  }
  return arr;
}

void tensors_from_json(const nlohmann::json& arr, const ParamLayout& layout,
                       std::span<double> flat, const std::string& prefix) {
  size_t idx = 0;
  for (const TensorSpec& t : layout.tensors) {
    if (idx >= arr.size()) throw std::runtime_error("checkpoint: missing tensor " + t.name);
    const nlohmann::json& jt = arr.at(idx++);
    if (jt.at("name") != prefix + t.name)
      throw std::runtime_error("checkpoint: expected tensor '" + prefix + t.name + "', found '" +
                               std::string(jt.at("name")) + "'");
    std::vector<double> data = jt.at("data").get<std::vector<double>>();
    if (static_cast<int>(data.size()) != t.size)
      throw std::runtime_error("checkpoint: tensor '" + t.name + "' has wrong size");
    std::copy(data.begin(), data.end(), flat.begin() + t.offset);
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainRun& run) {
  nlohmann::json j;
  j["format"] = "anids-checkpoint-v1";
  j["config"] = nlohmann::json::parse(train_config_to_json(run.cfg));
  j["config_hash"] = config_hash(run.cfg);
  j["step"] = run.step;
  j["seed"] = run.cfg.seed;

  ParamLayout gl = generator_layout(run.cfg.generator_encoder());
  ParamLayout dl = denoiser_layout(run.cfg.denoiser_encoder());
  nlohmann::json tensors = tensors_to_json(gl, run.generator_params(), "generator.");
  for (auto& t : tensors_to_json(dl, run.denoiser_params(), "denoiser.")) tensors.push_back(t);
  j["tensors"] = std::move(tensors);

  j["optimizer"] = {{"step", run.opt.t_}, {"m", run.opt.m_}, {"v", run.opt.v_}};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(1) << '\n';
}

TrainRun load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("format", "") != std::string("anids-checkpoint-v1"))
    throw std::runtime_error("checkpoint: unknown format");

  TrainConfig cfg = train_config_from_json(j.at("config").dump());
  TrainRun run = TrainRun::create(cfg);
  run.step = j.at("step");

  ParamLayout gl = generator_layout(cfg.generator_encoder());
  ParamLayout dl = denoiser_layout(cfg.denoiser_encoder());
  const nlohmann::json& tensors = j.at("tensors");
  if (tensors.size() != gl.tensors.size() + dl.tensors.size())
    throw std::runtime_error("checkpoint: tensor count mismatch");
  nlohmann::json gen_part = nlohmann::json::array();
  nlohmann::json den_part = nlohmann::json::array();
  for (size_t i = 0; i < tensors.size(); ++i)
    (i < gl.tensors.size() ? gen_part : den_part).push_back(tensors.at(i));
  std::span<double> flat(run.params);
  tensors_from_json(gen_part, gl, flat.subspan(0, gl.total), "generator.");
  tensors_from_json(den_part, dl, flat.subspan(gl.total), "denoiser.");

  const nlohmann::json& opt = j.at("optimizer");
  run.opt.t_ = opt.at("step");
  run.opt.m_ = opt.at("m").get<std::vector<double>>();
  run.opt.v_ = opt.at("v").get<std::vector<double>>();
  if (run.opt.m_.size() != run.params.size() || run.opt.v_.size() != run.params.size())
    throw std::runtime_error("checkpoint: optimizer state size mismatch");
  return run;
}

}  // namespace anids
