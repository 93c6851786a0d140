#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anids/la3.hpp"

namespace anids {

struct Molecule {
  std::vector<int> z;          // atomic numbers, >= 1
  std::vector<Vec3d> pos;      // Angstrom
  std::vector<Vec3d> forces;   // eV/Angstrom; empty when absent
  std::optional<double> energy;  // eV

  int size() const { return static_cast<int>(z.size()); }
  bool has_forces() const { return !forces.empty(); }
};

// Element symbol <-> atomic number. Unknown symbols yield 0.
int symbol_to_z(std::string_view symbol);
const char* z_to_symbol(int z);  // nullptr when out of range

// Extended-XYZ: count line, comment line with key=value properties
// (energy=... is read, Lattice and other keys are ignored), then one row
// per atom: symbol x y z [fx fy fz].
std::vector<Molecule> parse_extxyz(std::string_view text);
std::string write_extxyz(std::span<const Molecule> mols);

std::vector<Molecule> load_extxyz(const std::string& path);
void save_extxyz(const std::string& path, std::span<const Molecule> mols);

}  // namespace anids
