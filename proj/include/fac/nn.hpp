#pragma once

// Minimal batched feed-forward network with manual backpropagation, optional
// parameter-free layer normalization on hidden layers, an Adam optimizer and
// Polyak target updates. Hidden activation is tanh; the output is either
// identity (critics) or tanh (actor, bounds actions to [-1,1]).
//
// Determinism: all accumulations run in fixed row-major order, so training
// arithmetic is reproducible bit-for-bit for a fixed seed.

#include <cstring>
#include <fstream>

#include "fac/core.hpp"

namespace fac {

struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
  double* row(int i) { return a.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const { return a.data() + static_cast<std::size_t>(i) * cols; }
};

enum class OutputActivation { identity, tanh_bounded };

struct MlpLayer {
  Matrix w;  // [out x in]
  std::vector<double> b;
};

struct Mlp {
  std::vector<int> dims;
  OutputActivation out_act = OutputActivation::identity;
  bool layer_norm = false;
  std::vector<MlpLayer> layers;

  int in_dim() const { return dims.front(); }
  int out_dim() const { return dims.back(); }
};

// Weights from a scaled uniform fan-in scheme, biases zero.
inline Mlp init_mlp(RngStream& rng, const std::vector<int>& dims,
                    OutputActivation act, bool layer_norm = false) {
  if (dims.size() < 2)
    throw std::invalid_argument("init_mlp: need input and output dims");
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("init_mlp: dims must be positive");
  Mlp m;
  m.dims = dims;
  m.out_act = act;
  m.layer_norm = layer_norm;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    MlpLayer layer;
    layer.w = Matrix(dims[l + 1], dims[l]);
    layer.b.assign(dims[l + 1], 0.0);
    double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    for (auto& x : layer.w.a) x = rng.uniform(-bound, bound);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

constexpr double kLayerNormEps = 1e-5;

struct ForwardCache {
  Matrix input;
  std::vector<Matrix> acts;  // post-activation output of each layer
  std::vector<Matrix> ln_y;  // normalized pre-activations (LN layers)
  std::vector<std::vector<double>> inv_sigma;
};

namespace detail {

// z = x W^T + b, accumulated input-feature-major over a transposed weight
// copy. The element-wise inner loop vectorizes under strict FP semantics and
// the accumulation order stays fixed (k ascending), keeping runs bit-for-bit
// reproducible.
inline void affine_forward(const MlpLayer& layer, const Matrix& x, Matrix& z) {
  int out = layer.w.rows, in = layer.w.cols;
  Matrix wt(in, out);
  for (int j = 0; j < out; ++j)
    for (int k = 0; k < in; ++k) wt.at(k, j) = layer.w.at(j, k);
  z = Matrix(x.rows, out);
  for (int i = 0; i < x.rows; ++i) {
    double* zi = z.row(i);
    std::copy(layer.b.begin(), layer.b.end(), zi);
    const double* xi = x.row(i);
    for (int k = 0; k < in; ++k) {
      double xk = xi[k];
      const double* wk = wt.row(k);
      for (int j = 0; j < out; ++j) zi[j] += xk * wk[j];
    }
  }
}

}  // namespace detail

inline Matrix forward(const Mlp& m, const Matrix& x,
                      ForwardCache* cache = nullptr) {
  if (x.cols != m.in_dim())
    throw std::invalid_argument("forward: input dimension mismatch");
  if (cache) {
    cache->input = x;
    cache->acts.clear();
    cache->ln_y.assign(m.layers.size(), {});
    cache->inv_sigma.assign(m.layers.size(), {});
  }
  Matrix cur = x;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    Matrix z;
    detail::affine_forward(m.layers[l], cur, z);
    bool is_output = l + 1 == m.layers.size();
    if (!is_output) {
      if (m.layer_norm) {
        std::vector<double> inv(z.rows);
        Matrix y(z.rows, z.cols);
        for (int i = 0; i < z.rows; ++i) {
          const double* zi = z.row(i);
          double mu = 0.0;
          for (int j = 0; j < z.cols; ++j) mu += zi[j];
          mu /= z.cols;
          double var = 0.0;
          for (int j = 0; j < z.cols; ++j) {
            double d = zi[j] - mu;
            var += d * d;
          }
          var /= z.cols;
          inv[i] = 1.0 / std::sqrt(var + kLayerNormEps);
          double* yi = y.row(i);
          for (int j = 0; j < z.cols; ++j) yi[j] = (zi[j] - mu) * inv[i];
        }
        if (cache) {
          cache->ln_y[l] = y;
          cache->inv_sigma[l] = inv;
        }
        z = std::move(y);
      }
      for (auto& v : z.a) v = std::tanh(v);
    } else if (m.out_act == OutputActivation::tanh_bounded) {
      for (auto& v : z.a) v = std::tanh(v);
    }
    if (cache) cache->acts.push_back(z);
    cur = std::move(z);
  }
  return cur;
}

inline std::vector<double> forward_one(const Mlp& m,
                                       const std::vector<double>& x) {
  Matrix in(1, static_cast<int>(x.size()));
  in.a = x;
  Matrix out = forward(m, in);
  return out.a;
}

struct MlpGrads {
  std::vector<MlpLayer> layers;
};

inline MlpGrads zero_grads(const Mlp& m) {
  MlpGrads g;
  for (const auto& layer : m.layers) {
    MlpLayer gl;
    gl.w = Matrix(layer.w.rows, layer.w.cols);
    gl.b.assign(layer.b.size(), 0.0);
    g.layers.push_back(std::move(gl));
  }
  return g;
}

// Exact reverse-mode gradients of forward(); accumulates into `grads` and
// returns dL/dx for the batch.
inline Matrix backward(const Mlp& m, const ForwardCache& cache,
                       const Matrix& dLdy, MlpGrads& grads) {
  if (cache.acts.size() != m.layers.size())
    throw std::invalid_argument("backward: stale or missing forward cache");
  if (dLdy.rows != cache.input.rows || dLdy.cols != m.out_dim())
    throw std::invalid_argument("backward: dLdy shape mismatch");
  Matrix g = dLdy;
  for (int l = static_cast<int>(m.layers.size()) - 1; l >= 0; --l) {
    const Matrix& act = cache.acts[l];
    bool is_output = l + 1 == static_cast<int>(m.layers.size());
    if (!is_output || m.out_act == OutputActivation::tanh_bounded)
      for (std::size_t i = 0; i < g.a.size(); ++i)
        g.a[i] *= 1.0 - act.a[i] * act.a[i];
    if (!is_output && m.layer_norm) {
      const Matrix& y = cache.ln_y[l];
      for (int i = 0; i < g.rows; ++i) {
        double* gi = g.row(i);
        const double* yi = y.row(i);
        double mg = 0.0, mgy = 0.0;
        for (int j = 0; j < g.cols; ++j) {
          mg += gi[j];
          mgy += gi[j] * yi[j];
        }
        mg /= g.cols;
        mgy /= g.cols;
        double inv = cache.inv_sigma[l][i];
        for (int j = 0; j < g.cols; ++j)
          gi[j] = inv * (gi[j] - mg - yi[j] * mgy);
      }
    }
    const Matrix& x = l == 0 ? cache.input : cache.acts[l - 1];
    MlpLayer& gl = grads.layers[l];
    for (int i = 0; i < g.rows; ++i) {
      const double* gi = g.row(i);
      const double* xi = x.row(i);
      for (int j = 0; j < g.cols; ++j) {
        double gj = gi[j];
        if (gj == 0.0) continue;
        gl.b[j] += gj;
        double* wj = gl.w.row(j);
        for (int k = 0; k < x.cols; ++k) wj[k] += gj * xi[k];
      }
    }
    Matrix gx(g.rows, x.cols);
    for (int i = 0; i < g.rows; ++i) {
      const double* gi = g.row(i);
      double* oi = gx.row(i);
      for (int j = 0; j < g.cols; ++j) {
        double gj = gi[j];
        if (gj == 0.0) continue;
        const double* wj = m.layers[l].w.row(j);
        for (int k = 0; k < x.cols; ++k) oi[k] += gj * wj[k];
      }
    }
    g = std::move(gx);
  }
  return g;
}

struct OptState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<MlpLayer> m;  // first moments, parameter-shaped
  std::vector<MlpLayer> v;  // second moments
};

inline OptState make_adam(const Mlp& net, double lr = 1e-3) {
  OptState o;
  o.lr = lr;
  MlpGrads z = zero_grads(net);
  o.m = z.layers;
  o.v = z.layers;
  return o;
}

// Bias-corrected adaptive-moment update.
inline void adam_step(OptState& o, Mlp& net, const MlpGrads& g) {
  if (g.layers.size() != net.layers.size() || o.m.size() != net.layers.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  ++o.step;
  double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(o.step));
  double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(o.step));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    const auto& gl = g.layers[l];
    if (gl.w.a.size() != layer.w.a.size() || gl.b.size() != layer.b.size())
      throw std::invalid_argument("adam_step: shape mismatch");
    auto update = [&](double& p, double& m1, double& m2, double grad) {
      m1 = o.beta1 * m1 + (1.0 - o.beta1) * grad;
      m2 = o.beta2 * m2 + (1.0 - o.beta2) * grad * grad;
      p -= o.lr * (m1 / bc1) / (std::sqrt(m2 / bc2) + o.eps);
    };
    for (std::size_t i = 0; i < layer.w.a.size(); ++i)
      update(layer.w.a[i], o.m[l].w.a[i], o.v[l].w.a[i], gl.w.a[i]);
    for (std::size_t i = 0; i < layer.b.size(); ++i)
      update(layer.b[i], o.m[l].b[i], o.v[l].b[i], gl.b[i]);
  }
}

// target <- (1 - tau) * target + tau * online, element-wise.
inline void polyak_update(Mlp& target, const Mlp& online, double tau) {
  if (tau <= 0.0 || tau > 1.0)
    throw std::invalid_argument("polyak_update: tau must be in (0,1]");
  if (target.dims != online.dims)
    throw std::invalid_argument("polyak_update: shape mismatch");
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    auto& t = target.layers[l];
    const auto& s = online.layers[l];
    for (std::size_t i = 0; i < t.w.a.size(); ++i)
      t.w.a[i] = (1.0 - tau) * t.w.a[i] + tau * s.w.a[i];
    for (std::size_t i = 0; i < t.b.size(); ++i)
      t.b[i] = (1.0 - tau) * t.b[i] + tau * s.b[i];
  }
}

// Checkpoint byte layout (little-endian):
//   bytes 0..7   magic "FACNET01"
//   u32          output activation tag (0 identity, 1 tanh)
//   u32          layer_norm flag
//   u32          number of dims
//   u32[n]       dims
//   f64[...]     parameters, layer by layer: W row-major, then b
inline void save_mlp(const Mlp& m, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_mlp: cannot open " + path);
  const char magic[8] = {'F', 'A', 'C', 'N', 'E', 'T', '0', '1'};
  f.write(magic, 8);
  auto put_u32 = [&](std::uint32_t v) {
    f.write(reinterpret_cast<const char*>(&v), 4);
  };
  put_u32(m.out_act == OutputActivation::tanh_bounded ? 1u : 0u);
  put_u32(m.layer_norm ? 1u : 0u);
  put_u32(static_cast<std::uint32_t>(m.dims.size()));
  for (int d : m.dims) put_u32(static_cast<std::uint32_t>(d));
  for (const auto& layer : m.layers) {
    f.write(reinterpret_cast<const char*>(layer.w.a.data()),
            static_cast<std::streamsize>(layer.w.a.size() * sizeof(double)));
    f.write(reinterpret_cast<const char*>(layer.b.data()),
            static_cast<std::streamsize>(layer.b.size() * sizeof(double)));
  }
  if (!f) throw std::runtime_error("save_mlp: write failed for " + path);
}

inline Mlp load_mlp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_mlp: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, "FACNET01", 8) != 0)
    throw std::runtime_error("load_mlp: bad magic in " + path);
  auto get_u32 = [&]() {
    std::uint32_t v = 0;
    f.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  std::uint32_t act = get_u32();
  std::uint32_t ln = get_u32();
  std::uint32_t n = get_u32();
  if (!f || n < 2 || n > 64) throw std::runtime_error("load_mlp: bad header");
  std::vector<int> dims(n);
  for (auto& d : dims) d = static_cast<int>(get_u32());
  Mlp m;
  m.dims = dims;
  m.out_act = act == 1 ? OutputActivation::tanh_bounded : OutputActivation::identity;
  m.layer_norm = ln != 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    MlpLayer layer;
    layer.w = Matrix(dims[l + 1], dims[l]);
    layer.b.assign(dims[l + 1], 0.0);
    f.read(reinterpret_cast<char*>(layer.w.a.data()),
           static_cast<std::streamsize>(layer.w.a.size() * sizeof(double)));
    f.read(reinterpret_cast<char*>(layer.b.data()),
           static_cast<std::streamsize>(layer.b.size() * sizeof(double)));
    m.layers.push_back(std::move(layer));
  }
  if (!f) throw std::runtime_error("load_mlp: truncated file " + path);
  return m;
}

}  // namespace fac
