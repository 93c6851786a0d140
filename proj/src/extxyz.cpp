#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "anids/errors.hpp"
#include "anids/molecule.hpp"

namespace anids {

namespace {

constexpr std::array<const char*, 119> kSymbols = {
    "?",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al",
    "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co",
    "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb",
    "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs",
    "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm",
    "Yb", "Lu", "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
    "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk",
    "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg",
    "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

const std::unordered_map<std::string_view, int>& symbol_table() {
  static const auto* table = [] {
    auto* t = new std::unordered_map<std::string_view, int>();
    for (int z = 1; z < static_cast<int>(kSymbols.size()); ++z) (*t)[kSymbols[z]] = z;
    return t;
  }();
  return *table;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view tok, int line, const char* what) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(tok) + "'");
  return v;
}

// key=value pairs on the comment line; values may be double-quoted.
std::optional<double> read_energy_key(std::string_view comment, int line) {
  size_t i = 0;
  while (i < comment.size()) {
    while (i < comment.size() && comment[i] == ' ') ++i;
    size_t eq = comment.find('=', i);
    if (eq == std::string_view::npos) break;
    std::string_view key = comment.substr(i, eq - i);
    size_t v0 = eq + 1;
    size_t v1;
    if (v0 < comment.size() && comment[v0] == '"') {
      v1 = comment.find('"', v0 + 1);
      if (v1 == std::string_view::npos) throw ParseError(line, "unterminated quote in comment");
      ++v1;
    } else {
      v1 = comment.find(' ', v0);
      if (v1 == std::string_view::npos) v1 = comment.size();
    }
    if (key == "energy") {
      std::string_view val = comment.substr(v0, v1 - v0);
      return parse_double(val, line, "energy value");
    }
    i = v1;
  }
  return std::nullopt;
}

void format_double(std::string& out, double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  out.append(buf, p);
}

}  // namespace

int symbol_to_z(std::string_view symbol) {
  auto it = symbol_table().find(symbol);
  return it == symbol_table().end() ? 0 : it->second;
}

const char* z_to_symbol(int z) {
  if (z < 1 || z >= static_cast<int>(kSymbols.size())) return nullptr;
  return kSymbols[z];
}

std::vector<Molecule> parse_extxyz(std::string_view text) {
  std::vector<Molecule> mols;
  size_t cursor = 0;
  int line_no = 0;

  auto next_line = [&](std::string_view& out) -> bool {
    if (cursor >= text.size()) return false;
    size_t nl = text.find('\n', cursor);
    if (nl == std::string_view::npos) nl = text.size();
    out = text.substr(cursor, nl - cursor);
    if (!out.empty() && out.back() == '\r') out.remove_suffix(1);
    cursor = nl + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  while (next_line(line)) {
    auto toks = split_ws(line);
    if (toks.empty()) continue;  // tolerate blank separator lines
    if (toks.size() != 1) throw ParseError(line_no, "expected a lone atom count");
    long n = -1;
    auto [p, ec] = std::from_chars(toks[0].data(), toks[0].data() + toks[0].size(), n);
    if (ec != std::errc{} || p != toks[0].data() + toks[0].size() || n < 1)
      throw ParseError(line_no, "bad atom count '" + std::string(toks[0]) + "'");

    std::string_view comment;
    if (!next_line(comment)) throw ParseError(line_no, "missing comment line");
    Molecule mol;
    mol.energy = read_energy_key(comment, line_no);

    int n_cols = 0;  // 4 or 7, fixed by the first atom row of the frame
    for (long i = 0; i < n; ++i) {
      std::string_view row;
      if (!next_line(row)) throw ParseError(line_no, "unexpected end of file inside frame");
      auto cols = split_ws(row);
      if (n_cols == 0) {
        if (cols.size() != 4 && cols.size() != 7)
          throw ParseError(line_no, "expected 4 or 7 columns, got " + std::to_string(cols.size()));
        n_cols = static_cast<int>(cols.size());
      } else if (static_cast<int>(cols.size()) != n_cols) {
        throw ParseError(line_no, "expected " + std::to_string(n_cols) + " columns, got " +
                                      std::to_string(cols.size()));
      }
      int z = symbol_to_z(cols[0]);
      if (z == 0) throw ParseError(line_no, "unknown species '" + std::string(cols[0]) + "'");
      mol.z.push_back(z);
      mol.pos.push_back({parse_double(cols[1], line_no, "coordinate"),
                         parse_double(cols[2], line_no, "coordinate"),
                         parse_double(cols[3], line_no, "coordinate")});
      if (n_cols == 7) {
        mol.forces.push_back({parse_double(cols[4], line_no, "force"),
                              parse_double(cols[5], line_no, "force"),
                              parse_double(cols[6], line_no, "force")});
      }
    }
    mols.push_back(std::move(mol));
  }
  return mols;
}

std::string write_extxyz(std::span<const Molecule> mols) {
  std::string out;
  for (const Molecule& mol : mols) {
    out += std::to_string(mol.size());
    out += '\n';
    if (mol.energy) {
      out += "energy=";
      format_double(out, *mol.energy);
    }
    out += '\n';
    for (int i = 0; i < mol.size(); ++i) {
      const char* sym = z_to_symbol(mol.z[i]);
      out += sym ? sym : "?";
      for (double c : {mol.pos[i].x, mol.pos[i].y, mol.pos[i].z}) {
        out += ' ';
        format_double(out, c);
      }
      if (mol.has_forces()) {
        for (double c : {mol.forces[i].x, mol.forces[i].y, mol.forces[i].z}) {
          out += ' ';
          format_double(out, c);
        }
      }
      out += '\n';
    }
  }
  return out;
}

std::vector<Molecule> load_extxyz(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_extxyz(ss.str());
}

void save_extxyz(const std::string& path, std::span<const Molecule> mols) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << write_extxyz(mols);
}

}  // namespace anids
