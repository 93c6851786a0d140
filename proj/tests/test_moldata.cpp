#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "anids/errors.hpp"
#include "anids/molecule.hpp"
#include "anids/neighbors.hpp"
#include "anids/potential.hpp"
#include "anids/rng.hpp"
#include "oracles.hpp"

using namespace anids;

TEST_CASE("extxyz: one-atom frame with energy") {
  auto mols = parse_extxyz("1\nenergy=-1.5\nH 0 0 0\n");
  REQUIRE(mols.size() == 1);
  CHECK(mols[0].z == std::vector<int>{1});
  REQUIRE(mols[0].energy.has_value());
  CHECK(*mols[0].energy == doctest::Approx(-1.5));
  CHECK_FALSE(mols[0].has_forces());
}

TEST_CASE("extxyz: zero-atom header is rejected") {
  CHECK_THROWS_AS(parse_extxyz("0\n\n"), ParseError);
}

TEST_CASE("extxyz: malformed inputs carry line numbers") {
  try {
    parse_extxyz("2\ncomment=1\nH 0 0 0\nXx 1 1 1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 4);
  }
  CHECK_THROWS_AS(parse_extxyz("abc\n"), ParseError);
  CHECK_THROWS_AS(parse_extxyz("2\nc=1\nH 0 0 0\nH 1 1\n"), ParseError);   // short row
  CHECK_THROWS_AS(parse_extxyz("2\nc=1\nH 0 0 0\n"), ParseError);          // truncated frame
  CHECK_THROWS_AS(parse_extxyz("1\nc=1\nH 0 0 0 1 1\n"), ParseError);      // 6 columns
  // mixed force presence within one frame
  CHECK_THROWS_AS(parse_extxyz("2\nc=1\nH 0 0 0 1 2 3\nH 1 1 1\n"), ParseError);
}

TEST_CASE("extxyz: lattice and unknown keys are ignored") {
  auto mols = parse_extxyz(
      "1\nLattice=\"9 0 0 0 9 0 0 0 9\" Properties=species:S:1:pos:R:3 energy=2.25\nO 1 2 3\n");
  REQUIRE(mols.size() == 1);
  CHECK(mols[0].z[0] == 8);
  CHECK(*mols[0].energy == doctest::Approx(2.25));
}

TEST_CASE("extxyz: three-frame round trip is the identity") {
  rng::Stream s(41);
  std::vector<Molecule> frames;
  for (int f = 0; f < 3; ++f) {
    Molecule m = oracles::random_molecule(s, 4 + f, 5.0, 8);
    m.energy = s.gaussian();
    for (int i = 0; i < m.size(); ++i) m.forces.push_back(s.gaussian3());
    frames.push_back(m);
  }
  auto back = parse_extxyz(write_extxyz(frames));
  REQUIRE(back.size() == 3);
  for (int f = 0; f < 3; ++f) {
    CHECK(back[f].z == frames[f].z);
    CHECK(*back[f].energy == *frames[f].energy);  // shortest-round-trip formatting is exact
    for (int i = 0; i < frames[f].size(); ++i) {
      CHECK(norm(back[f].pos[i] - frames[f].pos[i]) <= 1e-8);
      CHECK(norm(back[f].forces[i] - frames[f].forces[i]) <= 1e-8);
    }
  }
  // write -> parse -> write is byte-stable
  CHECK(write_extxyz(back) == write_extxyz(frames));
}

TEST_CASE("neighbors: diatomic inside and outside the cutoff") {
  Molecule m;
  m.z = {1, 1};
  m.pos = {{0, 0, 0}, {1, 0, 0}};
  NeighborList close = build_neighbors(m, 1.5);
  CHECK(close.of(0).size() == 1);
  CHECK(close.of(1).size() == 1);
  CHECK(close.of(0)[0].j == 1);
  CHECK(close.of(0)[0].dist == doctest::Approx(1.0));
  // r = X_i - X_j exactly
  CHECK(close.of(0)[0].r.x == -1.0);
  CHECK(close.of(1)[0].r.x == 1.0);

  NeighborList far = build_neighbors(m, 0.5);
  CHECK(far.of(0).empty());
  CHECK(far.of(1).empty());
}

TEST_CASE("neighbors: boundary pairs are included") {
  Molecule m;
  m.z = {1, 1};
  m.pos = {{0, 0, 0}, {2.0, 0, 0}};
  NeighborList nl = build_neighbors(m, 2.0);
  CHECK(nl.of(0).size() == 1);
}

TEST_CASE("neighbors: coincident atoms are rejected") {
  Molecule m;
  m.z = {1, 1};
  m.pos = {{0, 0, 0}, {1e-7, 0, 0}};
  CHECK_THROWS_AS(build_neighbors(m, 1.0), CoincidentAtoms);
}

TEST_CASE("neighbors: 50 random atoms match the brute-force scan") {
  rng::Stream s(43);
  for (double cutoff : {0.7, 1.3, 2.9}) {
    std::vector<Vec3d> pos;
    for (int i = 0; i < 50; ++i) pos.push_back({s.uniform(0, 6), s.uniform(0, 6), s.uniform(0, 6)});
    NeighborList nl = build_neighbors(pos, cutoff);

    std::set<std::pair<int, int>> got;
    for (int i = 0; i < nl.size(); ++i)
      for (const auto& e : nl.of(i)) got.insert({std::min(i, e.j), std::max(i, e.j)});
    auto brute = oracles::brute_force_pairs(pos, cutoff);
    std::set<std::pair<int, int>> expected(brute.begin(), brute.end());
    CHECK(got == expected);

    // symmetry: j in N(i) <=> i in N(j)
    for (int i = 0; i < nl.size(); ++i)
      for (const auto& e : nl.of(i)) {
        bool found = false;
        for (const auto& back : nl.of(e.j)) found |= back.j == i;
        CHECK(found);
      }
  }
}

TEST_CASE("toy potentials: analytic forces match -dE/dx") {
  rng::Stream s(47);

  auto check_forces = [&](const ToyPotential& pot, std::vector<Vec3d> pos) {
    std::vector<Vec3d> f = pot.forces(pos);
    for (size_t i = 0; i < pos.size(); ++i) {
      for (int c = 0; c < 3; ++c) {
        double fd = oracles::central_diff(
            [&](double v) {
              std::vector<Vec3d> p = pos;
              if (c == 0) p[i].x = v;
              if (c == 1) p[i].y = v;
              if (c == 2) p[i].z = v;
              return pot.energy(p);
            },
            pos[i][c]);
        CHECK(oracles::rel_err(f[i][c], -fd, 1e-7) <= 1e-5);
      }
    }
  };

  for (int trial = 0; trial < 40; ++trial) {
    // anchored wells with anisotropic stiffness on 3 atoms
    ToyPotential wells;
    wells.kind = ToyPotential::Kind::Harmonic;
    std::vector<Vec3d> pos;
    for (int i = 0; i < 3; ++i) {
      Vec3d c = s.gaussian3();
      wells.sites.push_back({c, oracles::random_pd(s, 0.5)});
      pos.push_back(c + s.gaussian3() * 0.3);
    }
    check_forces(wells, pos);

    // bond springs only
    ToyPotential bonded = ToyPotential::harmonic_diatomic(8.0, 1.4);
    std::vector<Vec3d> dpos = {s.gaussian3(), s.gaussian3()};
    if (norm(dpos[0] - dpos[1]) < 0.3) dpos[1] += Vec3d{1.0, 0, 0};
    check_forces(bonded, dpos);

    // Lennard-Jones trimer away from the singular core
    ToyPotential lj = ToyPotential::lennard_jones(0.4, 1.0);
    std::vector<Vec3d> lpos = {{0, 0, 0}, {1.2, 0.1, 0}, {0.4, 1.3, 0.2}};
    for (auto& p : lpos) p += s.gaussian3() * 0.05;
    check_forces(lj, lpos);
  }

  // 100 random configurations on one potential, per the contract
  ToyPotential pot;
  pot.kind = ToyPotential::Kind::Harmonic;
  pot.sites.push_back({{0, 0, 0}, oracles::random_pd(s, 0.5)});
  pot.sites.push_back({{1.5, 0, 0}, oracles::random_pd(s, 0.5)});
  pot.bonds.push_back({0, 1, 4.0, 1.5});
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec3d> pos = {s.gaussian3() * 0.5, Vec3d{1.5, 0, 0} + s.gaussian3() * 0.5};
    check_forces(pot, pos);
  }
}

TEST_CASE("sampler: equipartition for a one-atom well") {
  // var per axis = kT / k
  ToyPotential pot;
  std::vector<Vec3d> centers = {{0, 0, 0}};
  pot = ToyPotential::harmonic_wells(centers, 1.0);
  Molecule start;
  start.z = {1};
  start.pos = {{0, 0, 0}};

  SamplerOptions opts;
  opts.dt = 5e-3;
  opts.burn_in = 2000;
  opts.stride = 40;
  auto frames = sample_boltzmann(pot, start, 60000, 0.1, 2024, opts);

  double mean[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
  for (const auto& f : frames)
    for (int c = 0; c < 3; ++c) {
      mean[c] += f.pos[0][c];
      sq[c] += f.pos[0][c] * f.pos[0][c];
    }
  for (int c = 0; c < 3; ++c) {
    double n = static_cast<double>(frames.size());
    double var = sq[c] / n - (mean[c] / n) * (mean[c] / n);
    CHECK(std::abs(var - 0.1) <= 0.005);  // within 5%
  }

  // frames carry exact labels
  for (int k = 0; k < 5; ++k) {
    const Molecule& f = frames[k * 100];
    CHECK(*f.energy == doctest::Approx(pot.energy(f.pos)));
    CHECK(norm(f.forces[0] - pot.forces(f.pos)[0]) == 0.0);
  }
}

TEST_CASE("sampler: zero-temperature limit relaxes to the minimum") {
  ToyPotential pot = ToyPotential::harmonic_wells(std::vector<Vec3d>{{1, 2, 3}}, 2.0);
  Molecule start;
  start.z = {1};
  start.pos = {{1.4, 2.3, 2.6}};
  SamplerOptions opts;
  opts.dt = 1e-2;
  opts.burn_in = 3000;
  opts.stride = 10;
  auto frames = sample_boltzmann(pot, start, 10, 1e-12, 1, opts);
  for (const auto& f : frames) CHECK(norm(f.pos[0] - Vec3d{1, 2, 3}) <= 1e-4);
}

TEST_CASE("sampler: fixed seed is bitwise deterministic") {
  ToyPotential pot = ToyPotential::harmonic_diatomic(10.0, 1.5);
  Molecule start;
  start.z = {1, 8};
  start.pos = {{0, 0, 0}, {1.5, 0, 0}};
  SamplerOptions opts;
  opts.dt = 1e-3;
  opts.burn_in = 100;
  opts.stride = 5;
  auto a = sample_boltzmann(pot, start, 50, 0.1, 77, opts);
  auto b = sample_boltzmann(pot, start, 50, 0.1, 77, opts);
  REQUIRE(a.size() == b.size());
  for (size_t f = 0; f < a.size(); ++f) {
    CHECK(*a[f].energy == *b[f].energy);
    for (int i = 0; i < a[f].size(); ++i) {
      CHECK(a[f].pos[i].x == b[f].pos[i].x);
      CHECK(a[f].pos[i].y == b[f].pos[i].y);
      CHECK(a[f].pos[i].z == b[f].pos[i].z);
    }
  }
}

TEST_CASE("sampler: divergence guard") {
  ToyPotential pot = ToyPotential::lennard_jones(5.0, 1.0);
  Molecule start;
  start.z = {1, 1};
  start.pos = {{0, 0, 0}, {0.4, 0, 0}};  // deep in the repulsive core
  SamplerOptions opts;
  opts.dt = 10.0;  // absurd step
  opts.burn_in = 0;
  opts.stride = 1;
  CHECK_THROWS_AS(sample_boltzmann(pot, start, 10, 0.1, 5, opts), Diverged);
}
