#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "grad_suite.hpp"
#include "oracles.hpp"
#include "wordrec/errors.hpp"
#include "wordrec/nn.hpp"
#include "wordrec/rng.hpp"
#include "wordrec/tensor.hpp"

using namespace wordrec;
using namespace wordrec::gradsuite;

namespace {

Tensor filled(std::vector<int> shape, std::vector<double> v) {
  Tensor t(std::move(shape));
  t.v = std::move(v);
  return t;
}

}  // namespace

TEST_CASE("finite differences: dense") { CHECK(suite_dense(20) < 1e-4); }
TEST_CASE("finite differences: conv2d") { CHECK(suite_conv2d(20) < 1e-4); }
TEST_CASE("finite differences: maxpool") { CHECK(suite_maxpool(20) < 1e-4); }
TEST_CASE("finite differences: global avg pool") { CHECK(suite_global_avg_pool(20) < 1e-4); }
TEST_CASE("finite differences: relu") { CHECK(suite_relu(20) < 1e-4); }
TEST_CASE("finite differences: softmax cross-entropy") { CHECK(suite_softmax_ce(20) < 1e-4); }
TEST_CASE("finite differences: lstm T=5") { CHECK(suite_lstm(20) < 1e-4); }
TEST_CASE("finite differences: blstm T=4") { CHECK(suite_blstm(20) < 1e-4); }

TEST_CASE("finite differences: dropout with a pinned mask") {
  nn::Dropout layer(0.3);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    Rng rng(mix_seed(1009, i));
    worst = std::max(worst, fd_check_layer(layer, random_tensor({12}, rng), mix_seed(2009, i)));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("dense forward is W.x + b") {
  nn::Dense layer(2, 2);
  layer.W = filled({2, 2}, {1.0, 2.0, 3.0, 4.0});
  layer.b = filled({2}, {0.5, -0.5});
  std::vector<Tensor> cache;
  const Tensor y = layer.forward(filled({2}, {1.0, -1.0}), cache, nn::Mode::Infer, nullptr);
  CHECK(y.v[0] == doctest::Approx(1.0 - 2.0 + 0.5));
  CHECK(y.v[1] == doctest::Approx(3.0 - 4.0 - 0.5));
}

TEST_CASE("conv2d matches the nested-loop oracle") {
  for (int i = 0; i < 10; ++i) {
    Rng rng(mix_seed(31, i));
    const int c_in = 1 + static_cast<int>(rng.below(3));
    const int c_out = 1 + static_cast<int>(rng.below(4));
    const int kh = 1 + static_cast<int>(rng.below(3)), kw = 1 + static_cast<int>(rng.below(3));
    nn::Conv2d layer(c_in, c_out, kh, kw);
    layer.init_params(rng);
    const Tensor x =
        random_tensor({c_in, kh + static_cast<int>(rng.below(5)), kw + static_cast<int>(rng.below(5))}, rng);

    std::vector<Tensor> cache;
    const Tensor fast = layer.forward(x, cache, nn::Mode::Infer, nullptr);
    const Tensor slow = oracle::naive_conv2d(x, layer.K, layer.b);
    REQUIRE(fast.shape == slow.shape);
    for (size_t j = 0; j < fast.v.size(); ++j)
      CHECK(fast.v[j] == doctest::Approx(slow.v[j]).epsilon(1e-12));
  }
}

TEST_CASE("maxpool keeps the first maximum and drops trailing odd edges") {
  // 3x3 with a tie inside the single full window
  const Tensor x = filled({1, 3, 3}, {5.0, 5.0, 9.0,
                                      1.0, 2.0, 9.0,
                                      7.0, 8.0, 9.0});
  nn::MaxPool2 layer;
  std::vector<Tensor> cache;
  const Tensor y = layer.forward(x, cache, nn::Mode::Infer, nullptr);
  REQUIRE(y.shape == std::vector<int>{1, 1, 1});
  CHECK(y.v[0] == 5.0);

  // gradient goes to the first 5 (row-major scan order)
  std::vector<Tensor> grads;
  const Tensor gx = layer.backward(filled({1, 1, 1}, {1.0}), cache, grads);
  CHECK(gx.v[0] == 1.0);
  for (size_t i = 1; i < gx.v.size(); ++i) CHECK(gx.v[i] == 0.0);
}

TEST_CASE("maxpool rejects inputs without a full window") {
  nn::MaxPool2 layer;
  std::vector<Tensor> cache;
  CHECK_THROWS_AS(layer.forward(Tensor({1, 1, 8}), cache, nn::Mode::Infer, nullptr),
                  DegenerateInput);
  CHECK_THROWS_AS(layer.forward(Tensor({1, 8, 1}), cache, nn::Mode::Infer, nullptr),
                  DegenerateInput);
}

TEST_CASE("global average pool averages per channel") {
  const Tensor x = filled({2, 1, 2}, {1.0, 3.0, 10.0, 30.0});
  nn::GlobalAvgPool layer;
  std::vector<Tensor> cache;
  const Tensor y = layer.forward(x, cache, nn::Mode::Infer, nullptr);
  REQUIRE(y.shape == std::vector<int>{2});
  CHECK(y.v[0] == doctest::Approx(2.0));
  CHECK(y.v[1] == doctest::Approx(20.0));
}

TEST_CASE("relu zeroes negatives and its gradient dies at zero") {
  const Tensor x = filled({4}, {-1.0, 0.0, 0.5, 2.0});
  nn::Relu layer;
  std::vector<Tensor> cache;
  const Tensor y = layer.forward(x, cache, nn::Mode::Infer, nullptr);
  CHECK(y.v == std::vector<double>{0.0, 0.0, 0.5, 2.0});

  std::vector<Tensor> grads;
  const Tensor gx = layer.backward(filled({4}, {1.0, 1.0, 1.0, 1.0}), cache, grads);
  CHECK(gx.v == std::vector<double>{0.0, 0.0, 1.0, 1.0});  // subgradient 0 at x = 0
}

TEST_CASE("dropout semantics") {
  nn::Dropout layer(0.5);
  Tensor x({1000});
  for (double& v : x.v) v = 1.0;

  SUBCASE("inference is the identity") {
    std::vector<Tensor> cache;
    const Tensor y = layer.forward(x, cache, nn::Mode::Infer, nullptr);
    CHECK(y.v == x.v);
    CHECK(cache.empty());
  }
  SUBCASE("training scales survivors by 1/(1-rate)") {
    std::vector<Tensor> cache;
    Rng rng(5);
    const Tensor y = layer.forward(x, cache, nn::Mode::Train, &rng);
    int kept = 0;
    for (const double v : y.v) {
      if (v != 0.0) {
        CHECK(v == doctest::Approx(2.0));
        ++kept;
      }
    }
    CHECK(kept > 400);  // ~500 expected
    CHECK(kept < 600);
  }
  SUBCASE("training without an rng is refused") {
    std::vector<Tensor> cache;
    CHECK_THROWS_AS(layer.forward(x, cache, nn::Mode::Train, nullptr), InvalidConfig);
  }
  SUBCASE("rate bounds") {
    CHECK_THROWS_AS(nn::Dropout(-0.1), InvalidConfig);
    CHECK_THROWS_AS(nn::Dropout(1.0), InvalidConfig);
    CHECK_NOTHROW(nn::Dropout(0.0));
  }
}

TEST_CASE("map_to_sequence reorders (C,H,W) to (W, C*H)") {
  // C=2, H=2, W=3
  Tensor x({2, 2, 3});
  int n = 0;
  for (double& v : x.v) v = n++;  // x[c][h][w] = c*6 + h*3 + w
  nn::MapToSequence layer;
  std::vector<Tensor> cache;
  const Tensor y = layer.forward(x, cache, nn::Mode::Infer, nullptr);
  REQUIRE(y.shape == std::vector<int>{3, 4});
  for (int w = 0; w < 3; ++w)
    for (int c = 0; c < 2; ++c)
      for (int h = 0; h < 2; ++h)
        CHECK(y.at(w, c * 2 + h) == doctest::Approx(c * 6 + h * 3 + w));
}

TEST_CASE("lstm forward matches a direct per-gate evaluation") {
  const int T = 3, F = 2, H = 2;
  nn::Lstm layer(F, H, true);
  Rng rng(77);
  layer.init_params(rng);
  const Tensor x = random_tensor({T, F}, rng);

  std::vector<Tensor> cache;
  const Tensor y = layer.forward(x, cache, nn::Mode::Infer, nullptr);
  REQUIRE(y.shape == std::vector<int>{T, H});

  // direct recurrence with explicit loops
  auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  std::vector<double> h(H, 0.0), c(H, 0.0);
  for (int t = 0; t < T; ++t) {
    std::vector<double> pre(4 * H, 0.0);
    for (int r = 0; r < 4 * H; ++r) {
      double acc = layer.b.v[r];
      for (int f = 0; f < F; ++f) acc += layer.W.at(r, f) * x.at(t, f);
      for (int k = 0; k < H; ++k) acc += layer.U.at(r, k) * h[k];
      pre[r] = acc;
    }
    for (int k = 0; k < H; ++k) {
      const double i_g = sigmoid(pre[k]);
      const double f_g = sigmoid(pre[H + k]);
      const double g_g = std::tanh(pre[2 * H + k]);
      const double o_g = sigmoid(pre[3 * H + k]);
      c[k] = f_g * c[k] + i_g * g_g;
      h[k] = o_g * std::tanh(c[k]);
      CHECK(y.at(t, k) == doctest::Approx(h[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("lstm with return_sequences=false emits only the last step") {
  const int T = 4, F = 3, H = 5;
  nn::Lstm seq(F, H, true), last(F, H, false);
  Rng rng(78);
  seq.init_params(rng);
  last.W = seq.W;
  last.U = seq.U;
  last.b = seq.b;
  const Tensor x = random_tensor({T, F}, rng);

  std::vector<Tensor> c1, c2;
  const Tensor ys = seq.forward(x, c1, nn::Mode::Infer, nullptr);
  const Tensor yl = last.forward(x, c2, nn::Mode::Infer, nullptr);
  REQUIRE(yl.shape == std::vector<int>{H});
  for (int k = 0; k < H; ++k) CHECK(yl.v[k] == doctest::Approx(ys.at(T - 1, k)));
}

TEST_CASE("blstm output concatenates forward and clock-reversed backward passes") {
  const int T = 4, F = 3, H = 2;
  nn::Blstm layer(F, H);
  Rng rng(79);
  layer.init_params(rng);
  const Tensor x = random_tensor({T, F}, rng);

  std::vector<Tensor> cache;
  const Tensor y = layer.forward(x, cache, nn::Mode::Infer, nullptr);
  REQUIRE(y.shape == std::vector<int>{T, 2 * H});

  // forward half: an Lstm with the forward weight set
  nn::Lstm fwd(F, H, true);
  fwd.W = layer.Wf;
  fwd.U = layer.Uf;
  fwd.b = layer.bf;
  std::vector<Tensor> cf;
  const Tensor hf = fwd.forward(x, cf, nn::Mode::Infer, nullptr);

  // backward half: run the backward weights over time-reversed input
  nn::Lstm bwd(F, H, true);
  bwd.W = layer.Wb;
  bwd.U = layer.Ub;
  bwd.b = layer.bb;
  Tensor xr({T, F});
  for (int t = 0; t < T; ++t)
    for (int f = 0; f < F; ++f) xr.at(t, f) = x.at(T - 1 - t, f);
  std::vector<Tensor> cb;
  const Tensor hb = bwd.forward(xr, cb, nn::Mode::Infer, nullptr);

  for (int t = 0; t < T; ++t)
    for (int k = 0; k < H; ++k) {
      CHECK(y.at(t, k) == doctest::Approx(hf.at(t, k)).epsilon(1e-12));
      CHECK(y.at(t, H + k) == doctest::Approx(hb.at(T - 1 - t, k)).epsilon(1e-12));
    }
}

TEST_CASE("softmax and cross-entropy basics") {
  const Tensor z = filled({3}, {1.0, 2.0, 3.0});
  const Tensor p = nn::softmax(z);
  double total = 0.0;
  for (const double v : p.v) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.v[2] > p.v[1]);
  CHECK(p.v[1] > p.v[0]);

  // shift invariance
  const Tensor p2 = nn::softmax(filled({3}, {1001.0, 1002.0, 1003.0}));
  for (int i = 0; i < 3; ++i) CHECK(p2.v[i] == doctest::Approx(p.v[i]).epsilon(1e-12));

  CHECK(nn::cross_entropy(p, 2) == doctest::Approx(-std::log(p.v[2])));
  CHECK_THROWS_AS(nn::cross_entropy(p, 3), IndexOutOfRange);
  CHECK_THROWS_AS(nn::cross_entropy(p, -1), IndexOutOfRange);

  // clamp keeps the loss finite even for a zero probability
  const Tensor degenerate = filled({2}, {1.0, 0.0});
  CHECK(nn::cross_entropy(degenerate, 1) == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("adam single steps match hand-computed updates") {
  nn::AdamConfig cfg;  // lr 1e-3, b1 0.9, b2 0.999, eps 1e-7
  nn::AdamState st(cfg);
  Tensor w({1});
  w.v[0] = 1.0;
  std::vector<Tensor*> params{&w};
  st.init(params);

  std::vector<Tensor> grads(1);
  grads[0].shape = {1};
  grads[0].v = {0.5};

  st.step(params, grads);
  // t=1: m=0.05, v=0.00025; mhat=0.5, vhat=0.25; step = lr*0.5/(0.5+eps)
  const double expect1 = 1.0 - 0.001 * 0.5 / (0.5 + 1e-7);
  CHECK(w.v[0] == doctest::Approx(expect1).epsilon(1e-12));

  st.step(params, grads);
  CHECK(st.step_count == 2);
  const double m2 = 0.9 * 0.05 + 0.1 * 0.5;
  const double v2 = 0.999 * 0.00025 + 0.001 * 0.25;
  const double mhat = m2 / (1.0 - 0.9 * 0.9);
  const double vhat = v2 / (1.0 - 0.999 * 0.999);
  const double expect2 = expect1 - 0.001 * mhat / (std::sqrt(vhat) + 1e-7);
  CHECK(w.v[0] == doctest::Approx(expect2).epsilon(1e-10));
}

TEST_CASE("glorot fill stays inside the fan limit and is seed-deterministic") {
  Tensor a({50, 60}), b({50, 60});
  const double limit = std::sqrt(6.0 / (50 + 60));
  Rng r1(4), r2(4), r3(5);
  nn::glorot_fill(a, 60, 50, r1);
  Tensor c = a;
  nn::glorot_fill(b, 60, 50, r2);
  CHECK(a.v == b.v);
  nn::glorot_fill(c, 60, 50, r3);
  CHECK(a.v != c.v);
  for (const double v : a.v) {
    CHECK(v <= limit);
    CHECK(v >= -limit);
  }
}
