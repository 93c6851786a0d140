#pragma once

// Invariant message-passing encoder and its prediction heads. All
// forward passes are templated on the scalar type T: plain double for
// inference/oracles, ad::Scalar for training. Only invariant quantities
// (species, pair distances, force-projection scalars) enter the network,
// so per-atom embeddings are exactly invariant under global rotation and
// translation of the input coordinates.

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anids/ad.hpp"
#include "anids/errors.hpp"
#include "anids/la3.hpp"
#include "anids/neighbors.hpp"
#include "anids/rng.hpp"

namespace anids {

struct EncoderConfig {
  int n_species = 8;
  int dim = 64;
  int n_rbf = 16;
  int n_layers = 2;
  double cutoff = 5.0;      // Angstrom; shared by the neighbor graph and the RBF grid
  bool force_input = false;  // extra per-edge force-projection channel

  int msg_in() const { return 2 * dim + n_rbf + (force_input ? 1 : 0); }
  int edge_in() const { return 2 * dim + n_rbf; }
};

struct MlpDims {
  int in, hid, out;
  int size() const { return hid * in + hid + out * hid + out; }
};

inline MlpDims msg_dims(const EncoderConfig& c) { return {c.msg_in(), c.dim, c.dim}; }
inline MlpDims upd_dims(const EncoderConfig& c) { return {2 * c.dim, c.dim, c.dim}; }
inline MlpDims node_head_dims(const EncoderConfig& c) { return {c.dim, c.dim, 1}; }
inline MlpDims edge_head_dims(const EncoderConfig& c) { return {c.edge_in(), c.dim, 1}; }

inline int encoder_core_size(const EncoderConfig& c) {
  return c.n_species * c.dim + c.n_layers * (msg_dims(c).size() + upd_dims(c).size());
}

// Named-tensor description of a flat parameter vector; this is also the
// schema of the checkpoint file.
struct TensorSpec {
  std::string name;
  std::vector<int> shape;
  int offset = 0;
  int size = 0;
  int fan_in = 0;
};

struct ParamLayout {
  std::vector<TensorSpec> tensors;
  int total = 0;

  void add(std::string name, std::vector<int> shape, int fan_in) {
    int sz = 1;
    for (int s : shape) sz *= s;
    tensors.push_back({std::move(name), std::move(shape), total, sz, fan_in});
    total += sz;
  }

  void add_mlp(const std::string& prefix, const MlpDims& d) {
    add(prefix + ".w1", {d.hid, d.in}, d.in);
    add(prefix + ".b1", {d.hid}, d.in);
    add(prefix + ".w2", {d.out, d.hid}, d.hid);
    add(prefix + ".b2", {d.out}, d.hid);
  }

  const TensorSpec* find(std::string_view name) const {
    for (const auto& t : tensors)
      if (t.name == name) return &t;
    return nullptr;
  }
};

inline ParamLayout encoder_core_layout(const EncoderConfig& c, const std::string& prefix = "") {
  ParamLayout l;
  l.add(prefix + "embed", {c.n_species, c.dim}, c.dim);
  for (int i = 0; i < c.n_layers; ++i) {
    std::string lp = prefix + "layer" + std::to_string(i);
    l.add_mlp(lp + ".msg", msg_dims(c));
    l.add_mlp(lp + ".upd", upd_dims(c));
  }
  return l;
}

// Generator params: encoder core + the a/b/c heads.
inline ParamLayout generator_layout(const EncoderConfig& c) {
  ParamLayout l = encoder_core_layout(c);
  l.add_mlp("head_a", node_head_dims(c));
  l.add_mlp("head_b", edge_head_dims(c));
  l.add_mlp("head_c", node_head_dims(c));
  return l;
}

// Denoiser params: encoder core + vector readouts + energy head.
inline ParamLayout denoiser_layout(const EncoderConfig& c) {
  ParamLayout l = encoder_core_layout(c);
  l.add_mlp("noise", edge_head_dims(c));
  l.add_mlp("force", edge_head_dims(c));
  l.add_mlp("energy", node_head_dims(c));
  return l;
}

inline int generator_size(const EncoderConfig& c) {
  return encoder_core_size(c) + 2 * node_head_dims(c).size() + edge_head_dims(c).size();
}
inline int denoiser_size(const EncoderConfig& c) {
  return encoder_core_size(c) + 2 * edge_head_dims(c).size() + node_head_dims(c).size();
}

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], streamed per tensor.
inline std::vector<double> init_params(const ParamLayout& layout, uint64_t seed) {
  std::vector<double> p(layout.total);
  for (size_t t = 0; t < layout.tensors.size(); ++t) {
    const TensorSpec& ts = layout.tensors[t];
    double bound = 1.0 / std::sqrt(static_cast<double>(ts.fan_in));
    rng::Stream s(seed, 0x7061726dULL, t);
    for (int i = 0; i < ts.size; ++i) p[ts.offset + i] = s.uniform(-bound, bound);
  }
  return p;
}

template <class T>
std::vector<Vec3<T>> to_positions(std::span<const Vec3d> pos) {
  std::vector<Vec3<T>> out;
  out.reserve(pos.size());
  for (const Vec3d& p : pos) out.push_back({T{p.x}, T{p.y}, T{p.z}});
  return out;
}

// Gaussian radial basis on [0, cutoff]; width equals the center spacing,
// so each component is 1 exactly at its center and decays smoothly.
template <class T>
void rbf_fill(const EncoderConfig& cfg, const T& dist, std::span<T> out) {
  using std::exp;
  const double spacing = cfg.cutoff / (cfg.n_rbf - 1);
  const double inv2w2 = 1.0 / (2.0 * spacing * spacing);
  for (int k = 0; k < cfg.n_rbf; ++k) {
    T u = dist - k * spacing;
    out[k] = exp(-(u * u) * inv2w2);
  }
}

template <class T>
std::vector<T> rbf(const EncoderConfig& cfg, const T& dist) {
  std::vector<T> out(cfg.n_rbf);
  rbf_fill<T>(cfg, dist, out);
  return out;
}

// Raw invariant force-encoding scalar for an edge: (f_i . r_ij/|r_ij|) * |r_ij|,
// computed as the plain dot product. It feeds the first (linear) layer of
// the denoiser's message MLP as an extra input channel.
template <class T>
T force_edge_feature(const Vec3d& f, const Vec3<T>& r) {
  return dot(f, r);
}

// y = W2 tanh(W1 x + b1) + b2, on the flat slice p.
template <class T>
void mlp_apply(std::span<const T> p, const MlpDims& d, std::span<const T> x, std::span<T> y,
               std::vector<T>& scratch) {
  using std::tanh;
  const T* w1 = p.data();
  const T* b1 = w1 + d.hid * d.in;
  const T* w2 = b1 + d.hid;
  const T* b2 = w2 + d.out * d.hid;
  scratch.assign(d.hid, T{0.0});
  for (int h = 0; h < d.hid; ++h) {
    T acc = b1[h];
    const T* row = w1 + h * d.in;
    for (int i = 0; i < d.in; ++i) acc += row[i] * x[i];
    scratch[h] = tanh(acc);
  }
  for (int o = 0; o < d.out; ++o) {
    T acc = b2[o];
    const T* row = w2 + o * d.hid;
    for (int h = 0; h < d.hid; ++h) acc += row[h] * scratch[h];
    y[o] = acc;
  }
}

// Per-atom embeddings h_i. `params` is the encoder-core slice.
// `force_feat` (optional, per atom) provides the force vectors for the
// edge force-projection channel; pass {} when the channel is inactive or
// all features are zero.
template <class T>
std::vector<T> encode(const EncoderConfig& cfg, std::span<const T> params,
                      std::span<const int> z, std::span<const Vec3<T>> pos,
                      const NeighborList& topo, std::span<const Vec3d> force_feat = {}) {
  const int n = static_cast<int>(z.size());
  const int d = cfg.dim;
  if (params.size() != static_cast<size_t>(encoder_core_size(cfg)))
    throw DimensionMismatch("encode: parameter slice has size " + std::to_string(params.size()) +
                            ", expected " + std::to_string(encoder_core_size(cfg)));
  if (pos.size() != static_cast<size_t>(n) || topo.size() != n)
    throw DimensionMismatch("encode: atoms/positions/topology disagree");
  if (!force_feat.empty() && force_feat.size() != static_cast<size_t>(n))
    throw DimensionMismatch("encode: force features must cover every atom");
  if (!force_feat.empty() && !cfg.force_input)
    throw DimensionMismatch("encode: force features passed but force channel is off");

  const T* embed = params.data();
  std::vector<T> h(static_cast<size_t>(n) * d);
  for (int i = 0; i < n; ++i) {
    if (z[i] < 1 || z[i] > cfg.n_species)
      throw DimensionMismatch("encode: species " + std::to_string(z[i]) +
                              " outside embedding table (n_species=" +
                              std::to_string(cfg.n_species) + ")");
    for (int k = 0; k < d; ++k) h[i * d + k] = embed[(z[i] - 1) * d + k];
  }

  const MlpDims md = msg_dims(cfg);
  const MlpDims ud = upd_dims(cfg);
  std::vector<T> h_next(h.size());
  std::vector<T> xin(md.in), msg(d), msg_sum(d), uin(2 * d), scratch;

  int off = cfg.n_species * d;
  for (int layer = 0; layer < cfg.n_layers; ++layer) {
    std::span<const T> pm = params.subspan(off, md.size());
    std::span<const T> pu = params.subspan(off + md.size(), ud.size());
    off += md.size() + ud.size();

    for (int i = 0; i < n; ++i) {
      msg_sum.assign(d, T{0.0});
      for (const auto& e : topo.of(i)) {
        Vec3<T> r = pos[i] - pos[e.j];
        T dist = norm(r);
        for (int k = 0; k < d; ++k) xin[k] = h[i * d + k];
        for (int k = 0; k < d; ++k) xin[d + k] = h[e.j * d + k];
        rbf_fill<T>(cfg, dist, std::span<T>(xin).subspan(2 * d, cfg.n_rbf));
        if (cfg.force_input)
          xin[2 * d + cfg.n_rbf] =
              force_feat.empty() ? T{0.0} : force_edge_feature<T>(force_feat[i], r);
        mlp_apply<T>(pm, md, xin, msg, scratch);
        for (int k = 0; k < d; ++k) msg_sum[k] += msg[k];
      }
      for (int k = 0; k < d; ++k) uin[k] = h[i * d + k];
      for (int k = 0; k < d; ++k) uin[d + k] = msg_sum[k];
      mlp_apply<T>(pu, ud, uin, std::span<T>(h_next).subspan(i * d, d), scratch);
    }
    h.swap(h_next);
  }
  return h;
}

// a_i / b_ij / c_i heads on top of the embeddings. `params` is the
// concatenated [head_a | head_b | head_c] slice. a and c are positive by
// construction (exponential); b is an unconstrained per-edge logit.
template <class T>
struct HeadsOut {
  std::vector<T> a, c;             // per atom
  std::vector<std::vector<T>> b;   // per atom, aligned with topo.of(i)
};

template <class T>
HeadsOut<T> heads(const EncoderConfig& cfg, std::span<const T> params, std::span<const T> h,
                  std::span<const Vec3<T>> pos, const NeighborList& topo) {
  using std::exp;
  const int n = topo.size();
  const int d = cfg.dim;
  const MlpDims nd = node_head_dims(cfg);
  const MlpDims ed = edge_head_dims(cfg);
  if (params.size() != static_cast<size_t>(2 * nd.size() + ed.size()))
    throw DimensionMismatch("heads: wrong parameter slice");
  std::span<const T> pa = params.subspan(0, nd.size());
  std::span<const T> pb = params.subspan(nd.size(), ed.size());
  std::span<const T> pc = params.subspan(nd.size() + ed.size(), nd.size());

  HeadsOut<T> out;
  out.a.resize(n);
  out.c.resize(n);
  out.b.resize(n);
  std::vector<T> xin(ed.in), y(1), scratch;
  for (int i = 0; i < n; ++i) {
    mlp_apply<T>(pa, nd, std::span<const T>(h).subspan(i * d, d), y, scratch);
    out.a[i] = exp(y[0]);
    mlp_apply<T>(pc, nd, std::span<const T>(h).subspan(i * d, d), y, scratch);
    out.c[i] = exp(y[0]);
    out.b[i].reserve(topo.of(i).size());
    for (const auto& e : topo.of(i)) {
      Vec3<T> r = pos[i] - pos[e.j];
      T dist = norm(r);
      for (int k = 0; k < d; ++k) xin[k] = h[i * d + k];
      for (int k = 0; k < d; ++k) xin[d + k] = h[e.j * d + k];
      rbf_fill<T>(cfg, dist, std::span<T>(xin).subspan(2 * d, cfg.n_rbf));
      mlp_apply<T>(pb, ed, xin, y, scratch);
      out.b[i].push_back(y[0]);
    }
  }
  return out;
}

// Equivariant vector readout: out_i = sum_j s(h_i, h_j, |r_ij|) * r_ij/|r_ij|.
// Scalar weights from invariant inputs times unit edge vectors keep the
// output exactly SO(3)-equivariant and translation-invariant.
template <class T>
std::vector<Vec3<T>> vector_readout(const EncoderConfig& cfg, std::span<const T> params,
                                    std::span<const T> h, std::span<const Vec3<T>> pos,
                                    const NeighborList& topo) {
  const int n = topo.size();
  const int d = cfg.dim;
  const MlpDims ed = edge_head_dims(cfg);
  if (params.size() != static_cast<size_t>(ed.size()))
    throw DimensionMismatch("vector_readout: wrong parameter slice");
  std::vector<Vec3<T>> out(n);
  std::vector<T> xin(ed.in), y(1), scratch;
  for (int i = 0; i < n; ++i) {
    Vec3<T> acc;
    for (const auto& e : topo.of(i)) {
      Vec3<T> r = pos[i] - pos[e.j];
      T dist = norm(r);
      for (int k = 0; k < d; ++k) xin[k] = h[i * d + k];
      for (int k = 0; k < d; ++k) xin[d + k] = h[e.j * d + k];
      rbf_fill<T>(cfg, dist, std::span<T>(xin).subspan(2 * d, cfg.n_rbf));
      mlp_apply<T>(params, ed, xin, y, scratch);
      T inv = T{1.0} / dist;
      acc += r * (y[0] * inv);
    }
    out[i] = acc;
  }
  return out;
}

// Extensive energy readout: sum_i mlp(h_i).
template <class T>
T energy_readout(const EncoderConfig& cfg, std::span<const T> params, std::span<const T> h) {
  const int d = cfg.dim;
  const MlpDims nd = node_head_dims(cfg);
  if (params.size() != static_cast<size_t>(nd.size()))
    throw DimensionMismatch("energy_readout: wrong parameter slice");
  const int n = static_cast<int>(h.size()) / d;
  std::vector<T> y(1), scratch;
  T acc{0.0};
  for (int i = 0; i < n; ++i) {
    mlp_apply<T>(params, nd, std::span<const T>(h).subspan(i * d, d), y, scratch);
    acc += y[0];
  }
  return acc;
}

}  // namespace anids
