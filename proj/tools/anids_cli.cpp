// Command-line surface: dataset generation, pretraining, supervised
// training, the covariance eigen-probe, and the special-case equivalence
// suite. Outputs are CSV/JSON for offline analysis.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "anids/config.hpp"
#include "anids/dataset.hpp"
#include "anids/probe.hpp"
#include "anids/reduce_check.hpp"
#include "anids/trainer.hpp"

namespace fs = std::filesystem;
using namespace anids;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<uint64_t> seed;
  std::optional<int64_t> steps;
  std::optional<std::string> noise_mode;
};

RunConfig load_with_overrides(const CommonArgs& args) {
  RunConfig rc = args.config_path.empty() ? RunConfig{} : load_config(args.config_path);
  if (args.seed) rc.train.seed = *args.seed;
  if (args.steps) rc.train.steps = *args.steps;
  if (args.noise_mode) rc.train.noise_mode = noise_mode_from_string(*args.noise_mode);
  rc.train.validate();
  return rc;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
  auto* opt = cmd->add_option("--config", args.config_path, "JSON config file");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--steps", args.steps, "override the number of steps");
  cmd->add_option("--noise-mode", args.noise_mode, "anids|dens|denoisevae")
      ->check(CLI::IsMember({"anids", "dens", "denoisevae"}));
}

int run_training(const CommonArgs& args, const std::string& data_manifest,
                 const std::string& init_checkpoint, const std::string& resume_checkpoint,
                 bool supervised, bool freeze_generator) {
  RunConfig rc = load_with_overrides(args);
  Dataset ds = load_dataset(data_manifest);
  if (ds.train.empty()) throw std::runtime_error("dataset has no training frames");

  TrainRun run;
  if (!resume_checkpoint.empty()) {
    run = load_checkpoint(resume_checkpoint);
    if (args.seed) throw std::runtime_error("--seed cannot be combined with --resume");
  } else if (!init_checkpoint.empty()) {
    TrainRun init = load_checkpoint(init_checkpoint);
    rc.train.dim = init.cfg.dim;  // model shape comes from the checkpoint
    rc.train.n_rbf = init.cfg.n_rbf;
    rc.train.n_layers = init.cfg.n_layers;
    rc.train.n_species = init.cfg.n_species;
    rc.train.cutoff = init.cfg.cutoff;
    run = TrainRun::create(rc.train);
    run.params = init.params;
  } else {
    run = TrainRun::create(rc.train);
  }

  const int64_t n_steps = rc.train.steps;
  const int batch = run.cfg.batch;
  std::vector<Molecule> batch_buf;
  for (int64_t s = 0; s < n_steps; ++s) {
    batch_buf.clear();
    for (int b = 0; b < batch; ++b)
      batch_buf.push_back(ds.train[(run.step * batch + b) % ds.train.size()]);
    LossBreakdownD loss = supervised ? supervised_step(run, batch_buf, freeze_generator)
                                     : pretrain_step(run, batch_buf);
    if (s == 0 || (s + 1) % std::max<int64_t>(1, n_steps / 10) == 0) {
      std::printf("step %6lld  total %.6f  anids %.6f  kl %.6f  gamma %.6f  E %.6f  F %.6f\n",
                  static_cast<long long>(run.step), loss.total, loss.anids, loss.kl, loss.gamma,
                  loss.energy, loss.force);
    }
  }

  fs::create_directories(args.out_dir);
  std::string ck = (fs::path(args.out_dir) / "checkpoint.json").string();
  std::string log = (fs::path(args.out_dir) / "log.csv").string();
  save_checkpoint(ck, run);
  save_log_csv(log, run.log);
  std::printf("wrote %s and %s\n", ck.c_str(), log.c_str());

  if (supervised && !ds.val.empty()) {
    ForceEval ev = eval_forces(run.cfg, run.params, ds.val);
    std::printf("held-out forces: mae %.6f  rms %.6f  cosine %.4f\n", ev.mae, ev.label_rms,
                ev.cosine);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structure-aware anisotropic denoising for atomistic systems"};
  app.require_subcommand(1);

  CommonArgs gen_args, pre_args, train_args, probe_args;
  std::string data_manifest, init_checkpoint, resume_checkpoint, structure_file, checkpoint_file;
  bool freeze_generator = false;
  uint64_t rc_seed = 0;

  auto* gen = app.add_subcommand("gen-data", "sample a toy-potential dataset to extxyz");
  add_common(gen, gen_args, true);

  auto* pre = app.add_subcommand("pretrain", "denoising pretraining (all atoms corrupted)");
  add_common(pre, pre_args, true);
  pre->add_option("--data", data_manifest, "dataset manifest")->required()->check(CLI::ExistingFile);
  pre->add_option("--resume", resume_checkpoint, "continue from a checkpoint")
      ->check(CLI::ExistingFile);

  auto* train = app.add_subcommand("train", "supervised training with partial corruption");
  add_common(train, train_args, true);
  train->add_option("--data", data_manifest, "dataset manifest")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--checkpoint", init_checkpoint, "initialize parameters from a checkpoint")
      ->check(CLI::ExistingFile);
  train->add_option("--resume", resume_checkpoint, "continue from a checkpoint")
      ->check(CLI::ExistingFile);
  train->add_flag("--freeze-generator", freeze_generator,
                  "keep noise-generator parameters fixed");

  auto* probe = app.add_subcommand("probe", "covariance eigen-probe with energy sensitivities");
  add_common(probe, probe_args, true);
  probe->add_option("--checkpoint", checkpoint_file, "trained checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  probe->add_option("--structure", structure_file, "extxyz structure (first frame used)")
      ->required()
      ->check(CLI::ExistingFile);

  auto* reduce = app.add_subcommand("reduce-check", "verify the special-case noise modes");
  reduce->add_option("--seed", rc_seed, "random seed for the suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // --help is a success
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) {
      RunConfig rc = load_with_overrides(gen_args);
      DatasetPaths paths = write_dataset(rc.data, gen_args.out_dir, rc.train.seed);
      std::printf("wrote %s and %s\n", paths.frames_file.c_str(), paths.manifest_file.c_str());
      return 0;
    }
    if (pre->parsed())
      return run_training(pre_args, data_manifest, "", resume_checkpoint, false, false);
    if (train->parsed())
      return run_training(train_args, data_manifest, init_checkpoint, resume_checkpoint, true,
                          freeze_generator);
    if (probe->parsed()) {
      RunConfig rc = load_with_overrides(probe_args);
      TrainRun run = load_checkpoint(checkpoint_file);
      std::vector<Molecule> frames = load_extxyz(structure_file);
      if (frames.empty()) throw std::runtime_error("structure file has no frames");
      EigenProbeReport rep = run_probe(run.cfg, run.params, frames.front(), rc.data.potential,
                                       rc.probe, rc.train.seed);
      fs::create_directories(probe_args.out_dir);
      std::string jpath = (fs::path(probe_args.out_dir) / "probe.json").string();
      std::string cpath = (fs::path(probe_args.out_dir) / "probe.csv").string();
      std::ofstream(jpath, std::ios::binary) << rep.to_json() << '\n';
      std::ofstream(cpath, std::ios::binary) << rep.to_csv();
      std::printf("wrote %s and %s (spearman_rho %.4f)\n", jpath.c_str(), cpath.c_str(),
                  rep.spearman_rho);
      return 0;
    }
    if (reduce->parsed()) {
      ReduceCheckReport rep = reduce_check(rc_seed);
      std::fputs(rep.summary().c_str(), stdout);
      return rep.pass() ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
