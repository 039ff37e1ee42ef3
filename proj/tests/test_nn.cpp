#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "fac/nn.hpp"

using namespace fac;

namespace {

Matrix row_vector(const std::vector<double>& x) {
  Matrix m(1, static_cast<int>(x.size()));
  m.a = x;
  return m;
}

// Test-local forward pass, written independently of fac::forward.
std::vector<double> reference_forward(const Mlp& m, std::vector<double> x) {
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const MlpLayer& layer = m.layers[l];
    std::vector<double> z(layer.b);
    for (std::size_t j = 0; j < z.size(); ++j)
      for (std::size_t k = 0; k < x.size(); ++k)
        z[j] += layer.w.at(static_cast<int>(j), static_cast<int>(k)) * x[k];
    bool output = l + 1 == m.layers.size();
    if (!output) {
      if (m.layer_norm) {
        double mu = 0.0;
        for (double v : z) mu += v;
        mu /= z.size();
        double var = 0.0;
        for (double v : z) var += (v - mu) * (v - mu);
        var /= z.size();
        double inv = 1.0 / std::sqrt(var + kLayerNormEps);
        for (auto& v : z) v = (v - mu) * inv;
      }
      for (auto& v : z) v = std::tanh(v);
    } else if (m.out_act == OutputActivation::tanh_bounded) {
      for (auto& v : z) v = std::tanh(v);
    }
    x = z;
  }
  return x;
}

double linear_loss(const Mlp& m, const std::vector<double>& x,
                   const std::vector<double>& g) {
  std::vector<double> y = reference_forward(m, x);
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) loss += g[i] * y[i];
  return loss;
}

}  // namespace

TEST_CASE("init_mlp: layer count and determinism", "[nn]") {
  RngStream a = make_rng(1), b = make_rng(1);
  Mlp m1 = init_mlp(a, {4, 64, 64, 2}, OutputActivation::tanh_bounded);
  Mlp m2 = init_mlp(b, {4, 64, 64, 2}, OutputActivation::tanh_bounded);
  REQUIRE(m1.layers.size() == 3);
  for (std::size_t l = 0; l < 3; ++l) {
    REQUIRE(m1.layers[l].w.a == m2.layers[l].w.a);
    REQUIRE(m1.layers[l].b == m2.layers[l].b);
    for (double bval : m1.layers[l].b) REQUIRE(bval == 0.0);
  }
  REQUIRE_THROWS_AS(init_mlp(a, {4}, OutputActivation::identity),
                    std::invalid_argument);
}

TEST_CASE("forward: zero input stays finite", "[nn]") {
  RngStream rng = make_rng(2);
  Mlp m = init_mlp(rng, {5, 8, 3}, OutputActivation::tanh_bounded);
  std::vector<double> y = forward_one(m, {0, 0, 0, 0, 0});
  for (double v : y) REQUIRE(std::isfinite(v));
}

TEST_CASE("forward: identity single layer reproduces its input", "[nn]") {
  RngStream rng = make_rng(3);
  Mlp m = init_mlp(rng, {3, 3}, OutputActivation::identity);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m.layers[0].w.at(i, j) = i == j ? 1.0 : 0.0;
  std::vector<double> y = forward_one(m, {0.3, -0.7, 2.5});
  REQUIRE(y == std::vector<double>{0.3, -0.7, 2.5});
}

TEST_CASE("forward: tanh output is strictly inside (-1,1)", "[nn]") {
  RngStream rng = make_rng(4);
  Mlp m = init_mlp(rng, {4, 16, 16, 3}, OutputActivation::tanh_bounded);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(4);
    for (auto& v : x) v = rng.uniform(-5.0, 5.0);
    for (double v : forward_one(m, x)) {
      REQUIRE(v < 1.0);
      REQUIRE(v > -1.0);
    }
  }
}

TEST_CASE("forward: matches an independent reference implementation", "[nn]") {
  RngStream rng = make_rng(5);
  for (bool ln : {false, true}) {
    Mlp m = init_mlp(rng, {6, 9, 7, 2}, OutputActivation::identity, ln);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x(6);
      for (auto& v : x) v = rng.uniform(-2.0, 2.0);
      std::vector<double> got = forward_one(m, x);
      std::vector<double> want = reference_forward(m, x);
      for (std::size_t i = 0; i < got.size(); ++i)
        REQUIRE(got[i] == Catch::Approx(want[i]).margin(1e-14));
    }
  }
}

TEST_CASE("backward: linear layer closed form", "[nn]") {
  RngStream rng = make_rng(6);
  Mlp m = init_mlp(rng, {4, 3}, OutputActivation::identity);
  std::vector<double> x = {0.5, -1.0, 2.0, 0.25};
  ForwardCache cache;
  forward(m, row_vector(x), &cache);
  Matrix dLdy(1, 3);
  dLdy.at(0, 1) = 1.0;  // e_1
  MlpGrads g = zero_grads(m);
  Matrix dLdx = backward(m, cache, dLdy, g);
  for (int k = 0; k < 4; ++k) {
    REQUIRE(g.layers[0].w.at(1, k) == x[static_cast<std::size_t>(k)]);
    REQUIRE(g.layers[0].w.at(0, k) == 0.0);
    REQUIRE(dLdx.at(0, k) == m.layers[0].w.at(1, k));
  }
  REQUIRE(g.layers[0].b == std::vector<double>{0.0, 1.0, 0.0});
}

TEST_CASE("backward: zero upstream gradient gives zero grads", "[nn]") {
  RngStream rng = make_rng(7);
  Mlp m = init_mlp(rng, {3, 5, 2}, OutputActivation::tanh_bounded);
  ForwardCache cache;
  forward(m, row_vector({0.1, 0.2, 0.3}), &cache);
  MlpGrads g = zero_grads(m);
  Matrix dLdx = backward(m, cache, Matrix(1, 2), g);
  for (const auto& gl : g.layers) {
    for (double v : gl.w.a) REQUIRE(v == 0.0);
    for (double v : gl.b) REQUIRE(v == 0.0);
  }
  for (double v : dLdx.a) REQUIRE(v == 0.0);
}

TEST_CASE("backward: stale cache is rejected", "[nn]") {
  RngStream rng = make_rng(8);
  Mlp m = init_mlp(rng, {3, 5, 2}, OutputActivation::identity);
  ForwardCache cache;  // never filled
  MlpGrads g = zero_grads(m);
  REQUIRE_THROWS_AS(backward(m, cache, Matrix(1, 2), g), std::invalid_argument);
}

// The gradient-correctness pillar: analytic backward vs central finite
// differences on random architectures, with and without layer norm.
TEST_CASE("backward: finite-difference check on 100 random instances", "[nn]") {
  RngStream rng = make_rng(99);
  const double h = 1e-5;
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    int in = 2 + static_cast<int>(rng.below(5));
    int h1 = 4 + static_cast<int>(rng.below(8));
    int h2 = 4 + static_cast<int>(rng.below(8));
    int out = 1 + static_cast<int>(rng.below(3));
    bool ln = inst % 2 == 0;
    OutputActivation act = inst % 3 == 0 ? OutputActivation::tanh_bounded
                                         : OutputActivation::identity;
    Mlp m = init_mlp(rng, {in, h1, h2, out}, act, ln);
    std::vector<double> x(in), gvec(out);
    for (auto& v : x) v = rng.uniform(-1.5, 1.5);
    for (auto& v : gvec) v = rng.uniform(-1.0, 1.0);

    ForwardCache cache;
    forward(m, row_vector(x), &cache);
    Matrix dLdy(1, out);
    for (int i = 0; i < out; ++i) dLdy.at(0, i) = gvec[i];
    MlpGrads g = zero_grads(m);
    backward(m, cache, dLdy, g);

    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      auto check = [&](double& param, double analytic) {
        double keep = param;
        param = keep + h;
        double up = linear_loss(m, x, gvec);
        param = keep - h;
        double down = linear_loss(m, x, gvec);
        param = keep;
        double fd = (up - down) / (2.0 * h);
        double rel = std::abs(analytic - fd) /
                     std::max({std::abs(analytic), std::abs(fd), 1e-6});
        worst = std::max(worst, rel);
      };
      // Sample a few entries per layer to keep the test fast; the acceptance
      // suite sweeps every parameter.
      for (int probe = 0; probe < 6; ++probe) {
        int j = static_cast<int>(rng.below(m.layers[l].w.rows));
        int k = static_cast<int>(rng.below(m.layers[l].w.cols));
        check(m.layers[l].w.at(j, k), g.layers[l].w.at(j, k));
        int bj = static_cast<int>(rng.below(m.layers[l].b.size()));
        check(m.layers[l].b[bj], g.layers[l].b[bj]);
      }
    }
  }
  REQUIRE(worst <= 1e-4);
}

TEST_CASE("adam: descends against a constant gradient", "[nn]") {
  RngStream rng = make_rng(10);
  Mlp m = init_mlp(rng, {1, 1}, OutputActivation::identity);
  double before = m.layers[0].w.at(0, 0);
  OptState opt = make_adam(m);
  MlpGrads g = zero_grads(m);
  g.layers[0].w.at(0, 0) = 2.5;  // positive gradient: parameter must decrease
  for (int i = 0; i < 100; ++i) adam_step(opt, m, g);
  REQUIRE(m.layers[0].w.at(0, 0) < before);
}

TEST_CASE("adam: zero gradients leave parameters unchanged", "[nn]") {
  RngStream rng = make_rng(11);
  Mlp m = init_mlp(rng, {3, 4, 2}, OutputActivation::identity);
  Mlp before = m;
  OptState opt = make_adam(m);
  MlpGrads g = zero_grads(m);
  for (int i = 0; i < 10; ++i) adam_step(opt, m, g);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    REQUIRE(m.layers[l].w.a == before.layers[l].w.a);
    REQUIRE(m.layers[l].b == before.layers[l].b);
  }
}

TEST_CASE("adam: converges on a quadratic bowl", "[nn]") {
  RngStream rng = make_rng(12);
  Mlp m = init_mlp(rng, {1, 5}, OutputActivation::identity);
  OptState opt = make_adam(m, 1e-3);
  std::vector<double> target = {0.4, -0.3, 0.8, 0.0, -0.6};
  std::vector<double> x = {1.0};
  int steps = 0;
  for (; steps < 5000; ++steps) {
    ForwardCache cache;
    Matrix y = forward(m, row_vector(x), &cache);
    Matrix dLdy(1, 5);
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      dLdy.at(0, i) = y.at(0, i) - target[static_cast<std::size_t>(i)];
      worst = std::max(worst, std::abs(dLdy.at(0, i)));
    }
    if (worst <= 1e-6) break;
    MlpGrads g = zero_grads(m);
    backward(m, cache, dLdy, g);
    adam_step(opt, m, g);
  }
  REQUIRE(steps < 5000);
}

TEST_CASE("adam: rejects mismatched shapes", "[nn]") {
  RngStream rng = make_rng(13);
  Mlp m = init_mlp(rng, {3, 4, 2}, OutputActivation::identity);
  Mlp other = init_mlp(rng, {3, 5, 2}, OutputActivation::identity);
  OptState opt = make_adam(m);
  MlpGrads g = zero_grads(other);
  REQUIRE_THROWS_AS(adam_step(opt, m, g), std::invalid_argument);
}

TEST_CASE("polyak: endpoint and scalar check", "[nn]") {
  RngStream rng = make_rng(14);
  Mlp online = init_mlp(rng, {2, 3, 1}, OutputActivation::identity);
  Mlp target = init_mlp(rng, {2, 3, 1}, OutputActivation::identity);
  Mlp t1 = target;
  polyak_update(t1, online, 1.0);
  for (std::size_t l = 0; l < online.layers.size(); ++l)
    REQUIRE(t1.layers[l].w.a == online.layers[l].w.a);

  Mlp zero = online;
  for (auto& layer : zero.layers) {
    std::fill(layer.w.a.begin(), layer.w.a.end(), 0.0);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  }
  Mlp one = online;
  for (auto& layer : one.layers) {
    std::fill(layer.w.a.begin(), layer.w.a.end(), 1.0);
    std::fill(layer.b.begin(), layer.b.end(), 1.0);
  }
  polyak_update(zero, one, 0.01);
  REQUIRE(zero.layers[0].w.at(0, 0) == Catch::Approx(0.01));

  REQUIRE_THROWS_AS(polyak_update(zero, one, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(polyak_update(zero, one, 1.5), std::invalid_argument);
}

TEST_CASE("polyak: geometric convergence to the online network", "[nn]") {
  RngStream rng = make_rng(15);
  Mlp online = init_mlp(rng, {3, 6, 2}, OutputActivation::identity);
  Mlp target = init_mlp(rng, {3, 6, 2}, OutputActivation::identity);
  double tau = 0.1;
  auto max_diff = [&]() {
    double d = 0.0;
    for (std::size_t l = 0; l < online.layers.size(); ++l)
      for (std::size_t i = 0; i < online.layers[l].w.a.size(); ++i)
        d = std::max(d, std::abs(online.layers[l].w.a[i] - target.layers[l].w.a[i]));
    return d;
  };
  double prev = max_diff();
  for (int i = 0; i < 50; ++i) {
    polyak_update(target, online, tau);
    double cur = max_diff();
    REQUIRE(cur <= (1.0 - tau) * prev + 1e-15);
    prev = cur;
  }
}

TEST_CASE("checkpoint: save/load round trip is bit exact", "[nn]") {
  RngStream rng = make_rng(16);
  Mlp m = init_mlp(rng, {4, 8, 8, 2}, OutputActivation::tanh_bounded, true);
  auto path = std::filesystem::temp_directory_path() / "fac_nn_roundtrip.ckpt";
  save_mlp(m, path.string());
  Mlp loaded = load_mlp(path.string());
  REQUIRE(loaded.dims == m.dims);
  REQUIRE(loaded.out_act == m.out_act);
  REQUIRE(loaded.layer_norm == m.layer_norm);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    REQUIRE(loaded.layers[l].w.a == m.layers[l].w.a);
    REQUIRE(loaded.layers[l].b == m.layers[l].b);
  }
  std::filesystem::remove(path);
  REQUIRE_THROWS_AS(load_mlp(path.string()), std::runtime_error);
}
