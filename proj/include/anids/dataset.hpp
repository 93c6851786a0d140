#pragma once

#include <string>
#include <vector>

#include "anids/config.hpp"
#include "anids/molecule.hpp"

namespace anids {

struct DatasetPaths {
  std::string frames_file;
  std::string manifest_file;
};

struct Dataset {
  std::vector<Molecule> train;
  std::vector<Molecule> val;
};

// Samples frames from the configured potential, writes them to a single
// extxyz file plus a JSON manifest with the train/val split. Outputs are
// byte-identical for a fixed (config, seed).
DatasetPaths write_dataset(const DataConfig& cfg, const std::string& out_dir, uint64_t seed);

Dataset load_dataset(const std::string& manifest_path);

}  // namespace anids
