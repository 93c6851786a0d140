#include "anids/dataset.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "anids/potential.hpp"

namespace anids {

namespace fs = std::filesystem;

DatasetPaths write_dataset(const DataConfig& cfg, const std::string& out_dir, uint64_t seed) {
  if (cfg.start.size() == 0)
    throw std::invalid_argument("write_dataset: config has no start structure");
  fs::create_directories(out_dir);
  std::vector<Molecule> frames =
      sample_boltzmann(cfg.potential, cfg.start, cfg.n_frames, cfg.kT, seed, cfg.sampler);

  DatasetPaths paths;
  paths.frames_file = (fs::path(out_dir) / "data.extxyz").string();
  paths.manifest_file = (fs::path(out_dir) / "manifest.json").string();
  save_extxyz(paths.frames_file, frames);

  const int n = static_cast<int>(frames.size());
  int n_val = static_cast<int>(n * cfg.val_fraction);
  std::vector<int> train_idx, val_idx;
  for (int i = 0; i < n; ++i) (i < n - n_val ? train_idx : val_idx).push_back(i);

  nlohmann::json j;
  j["frames"] = "data.extxyz";
  j["n_frames"] = n;
  j["train"] = train_idx;
  j["val"] = val_idx;
  std::ofstream out(paths.manifest_file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + paths.manifest_file);
  out << j.dump(1) << '\n';
  return paths;
}

Dataset load_dataset(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest " + manifest_path);
  nlohmann::json j = nlohmann::json::parse(in);
  fs::path dir = fs::path(manifest_path).parent_path();
  std::vector<Molecule> frames = load_extxyz((dir / std::string(j.at("frames"))).string());
  Dataset ds;
  for (int i : j.at("train").get<std::vector<int>>()) ds.train.push_back(frames.at(i));
  for (int i : j.at("val").get<std::vector<int>>()) ds.val.push_back(frames.at(i));
  return ds;
}

}  // namespace anids
