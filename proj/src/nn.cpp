#include "wordrec/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "wordrec/errors.hpp"
#include "wordrec/gemm.hpp"

namespace wordrec::nn {

namespace {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline void check_grads(const std::span<Tensor> grads, const std::vector<const Tensor*>& params,
                        const char* who) {
  check_shape(grads.size() == params.size(), who);
  for (size_t i = 0; i < grads.size(); ++i) check_shape(grads[i].same_shape(*params[i]), who);
}

}  // namespace

// ---------------------------------------------------------------- Dense

Dense::Dense(int n_in, int n_out)
    : n_in(n_in), n_out(n_out), W({n_out, n_in}), b({n_out}) {
  if (n_in <= 0 || n_out <= 0) throw InvalidConfig("dense layer sizes must be positive");
}

Tensor Dense::forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const {
  check_shape(x.rank() == 1 && x.dim(0) == n_in, "dense: input size mismatch");
  Tensor y({n_out});
  std::copy(b.v.begin(), b.v.end(), y.v.begin());
  gemv(n_out, n_in, W.data(), x.data(), y.data());
  cache.push_back(x);
  return y;
}

Tensor Dense::backward(const Tensor& gy, const std::vector<Tensor>& cache,
                       std::span<Tensor> grads) const {
  check_grads(grads, params(), "dense: gradient buffers mismatch");
  check_shape(gy.rank() == 1 && gy.dim(0) == n_out, "dense: output gradient mismatch");
  const Tensor& x = cache.at(0);
  ger(n_out, n_in, gy.data(), x.data(), grads[0].data());
  for (int i = 0; i < n_out; ++i) grads[1].at(i) += gy.at(i);
  Tensor gx({n_in});
  gemv_t(n_out, n_in, W.data(), gy.data(), gx.data());
  return gx;
}

void Dense::init_params(Rng& rng) {
  glorot_fill(W, n_in, n_out, rng);
  b.fill(0.0);
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int c_in, int c_out, int kh, int kw)
    : c_in(c_in), c_out(c_out), kh(kh), kw(kw), K({c_out, c_in, kh, kw}), b({c_out}) {
  if (c_in <= 0 || c_out <= 0 || kh <= 0 || kw <= 0)
    throw InvalidConfig("conv layer sizes must be positive");
  // K is 4-D metadata-wise; the GEMMs below view it as (c_out, c_in*kh*kw)
}

Tensor Conv2d::forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const {
  check_shape(x.rank() == 3 && x.dim(0) == c_in, "conv2d: channel mismatch");
  const int H = x.dim(1), W_ = x.dim(2);
  check_shape(kh <= H && kw <= W_, "conv2d: kernel larger than input");
  const int ho = H - kh + 1, wo = W_ - kw + 1;
  const int kdim = c_in * kh * kw;
  const int P = ho * wo;

  Tensor col({kdim, P});
  for (int ci = 0; ci < c_in; ++ci)
    for (int ky = 0; ky < kh; ++ky)
      for (int kx = 0; kx < kw; ++kx) {
        const int r = (ci * kh + ky) * kw + kx;
        double* dst = col.data() + static_cast<size_t>(r) * P;
        for (int oy = 0; oy < ho; ++oy) {
          const double* src = x.data() + (static_cast<size_t>(ci) * H + oy + ky) * W_ + kx;
          std::memcpy(dst + static_cast<size_t>(oy) * wo, src, sizeof(double) * wo);
        }
      }

  Tensor y({c_out, ho, wo});
  for (int o = 0; o < c_out; ++o)
    std::fill_n(y.data() + static_cast<size_t>(o) * P, P, b.at(o));
  gemm_nn(c_out, P, kdim, K.data(), col.data(), y.data());

  cache.push_back(x);
  cache.push_back(std::move(col));
  return y;
}

Tensor Conv2d::backward(const Tensor& gy, const std::vector<Tensor>& cache,
                        std::span<Tensor> grads) const {
  check_grads(grads, params(), "conv2d: gradient buffers mismatch");
  const Tensor& x = cache.at(0);
  const Tensor& col = cache.at(1);
  const int H = x.dim(1), W_ = x.dim(2);
  const int ho = H - kh + 1, wo = W_ - kw + 1;
  const int kdim = c_in * kh * kw;
  const int P = ho * wo;
  check_shape(gy.rank() == 3 && gy.dim(0) == c_out && gy.dim(1) == ho && gy.dim(2) == wo,
              "conv2d: output gradient mismatch");

  for (int o = 0; o < c_out; ++o) {
    const double* g = gy.data() + static_cast<size_t>(o) * P;
    double s = 0.0;
    for (int p = 0; p < P; ++p) s += g[p];
    grads[1].at(o) += s;
  }
  gemm_nt(c_out, kdim, P, gy.data(), col.data(), grads[0].data());

  Tensor gcol({kdim, P});
  gemm_tn(kdim, P, c_out, K.data(), gy.data(), gcol.data());

  Tensor gx({c_in, H, W_});
  for (int ci = 0; ci < c_in; ++ci)
    for (int ky = 0; ky < kh; ++ky)
      for (int kx = 0; kx < kw; ++kx) {
        const int r = (ci * kh + ky) * kw + kx;
        const double* src = gcol.data() + static_cast<size_t>(r) * P;
        for (int oy = 0; oy < ho; ++oy) {
          double* dst = gx.data() + (static_cast<size_t>(ci) * H + oy + ky) * W_ + kx;
          const double* s = src + static_cast<size_t>(oy) * wo;
          for (int ox = 0; ox < wo; ++ox) dst[ox] += s[ox];
        }
      }
  return gx;
}

void Conv2d::init_params(Rng& rng) {
  glorot_fill(K, c_in * kh * kw, c_out * kh * kw, rng);
  b.fill(0.0);
}

// ---------------------------------------------------------------- MaxPool2

Tensor MaxPool2::forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const {
  check_shape(x.rank() == 3, "maxpool2: expects (C, H, W)");
  const int C = x.dim(0), H = x.dim(1), W_ = x.dim(2);
  if (H < 2 || W_ < 2) throw DegenerateInput("maxpool2: spatial extent below 2x2");
  const int h2 = H / 2, w2 = W_ / 2;

  Tensor y({C, h2, w2});
  Tensor arg({C, h2, w2});  // flat input index of each window maximum
  for (int c = 0; c < C; ++c)
    for (int oy = 0; oy < h2; ++oy)
      for (int ox = 0; ox < w2; ++ox) {
        const int iy = 2 * oy, ix = 2 * ox;
        long best = (static_cast<long>(c) * H + iy) * W_ + ix;
        double bv = x.v[static_cast<size_t>(best)];
        // row-major scan; strict > keeps the first index on ties
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const long idx = (static_cast<long>(c) * H + iy + dy) * W_ + ix + dx;
            const double val = x.v[static_cast<size_t>(idx)];
            if (val > bv) {
              bv = val;
              best = idx;
            }
          }
        y.at(c, oy, ox) = bv;
        arg.at(c, oy, ox) = static_cast<double>(best);
      }
  cache.push_back(x);
  cache.push_back(std::move(arg));
  return y;
}

Tensor MaxPool2::backward(const Tensor& gy, const std::vector<Tensor>& cache,
                          std::span<Tensor> grads) const {
  check_grads(grads, params(), "maxpool2: no parameters expected");
  const Tensor& x = cache.at(0);
  const Tensor& arg = cache.at(1);
  check_shape(gy.same_shape(arg), "maxpool2: output gradient mismatch");
  Tensor gx(x.shape);
  for (long i = 0; i < gy.numel(); ++i)
    gx.v[static_cast<size_t>(arg.v[static_cast<size_t>(i)])] += gy.v[static_cast<size_t>(i)];
  return gx;
}

// ---------------------------------------------------------------- GlobalAvgPool

Tensor GlobalAvgPool::forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const {
  check_shape(x.rank() == 3 && x.dim(1) * x.dim(2) >= 1, "global_avg_pool: expects (C, H, W)");
  const int C = x.dim(0);
  const long hw = static_cast<long>(x.dim(1)) * x.dim(2);
  Tensor y({C});
  for (int c = 0; c < C; ++c) {
    const double* p = x.data() + static_cast<size_t>(c) * hw;
    double s = 0.0;
    for (long i = 0; i < hw; ++i) s += p[i];
    y.at(c) = s / hw;
  }
  cache.push_back(x);
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor& gy, const std::vector<Tensor>& cache,
                               std::span<Tensor> grads) const {
  check_grads(grads, params(), "global_avg_pool: no parameters expected");
  const Tensor& x = cache.at(0);
  const int C = x.dim(0);
  const long hw = static_cast<long>(x.dim(1)) * x.dim(2);
  check_shape(gy.rank() == 1 && gy.dim(0) == C, "global_avg_pool: output gradient mismatch");
  Tensor gx(x.shape);
  for (int c = 0; c < C; ++c) {
    const double g = gy.at(c) / hw;
    double* p = gx.data() + static_cast<size_t>(c) * hw;
    for (long i = 0; i < hw; ++i) p[i] = g;
  }
  return gx;
}

// ---------------------------------------------------------------- Relu

Tensor Relu::forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const {
  Tensor y = x;
  for (double& v : y.v) v = v > 0.0 ? v : 0.0;
  cache.push_back(x);
  return y;
}

Tensor Relu::backward(const Tensor& gy, const std::vector<Tensor>& cache,
                      std::span<Tensor> grads) const {
  check_grads(grads, params(), "relu: no parameters expected");
  const Tensor& x = cache.at(0);
  check_shape(gy.same_shape(x), "relu: output gradient mismatch");
  Tensor gx = gy;
  for (long i = 0; i < gx.numel(); ++i)
    if (x.v[static_cast<size_t>(i)] <= 0.0) gx.v[static_cast<size_t>(i)] = 0.0;
  return gx;
}

// ---------------------------------------------------------------- Dropout

Dropout::Dropout(double rate) : rate(rate) {
  if (rate < 0.0 || rate >= 1.0) throw InvalidConfig("dropout rate must be in [0, 1)");
}

Tensor Dropout::forward(const Tensor& x, std::vector<Tensor>& cache, Mode mode, Rng* rng) const {
  if (mode == Mode::Infer) return x;
  if (rng == nullptr) throw InvalidConfig("dropout: train mode needs an rng");
  const double keep_scale = 1.0 / (1.0 - rate);
  Tensor mask(x.shape);
  for (double& m : mask.v) m = rng->uniform01() < rate ? 0.0 : keep_scale;
  Tensor y = x;
  for (long i = 0; i < y.numel(); ++i) y.v[static_cast<size_t>(i)] *= mask.v[static_cast<size_t>(i)];
  cache.push_back(std::move(mask));
  return y;
}

Tensor Dropout::backward(const Tensor& gy, const std::vector<Tensor>& cache,
                         std::span<Tensor> grads) const {
  check_grads(grads, params(), "dropout: no parameters expected");
  const Tensor& mask = cache.at(0);
  check_shape(gy.same_shape(mask), "dropout: output gradient mismatch");
  Tensor gx = gy;
  for (long i = 0; i < gx.numel(); ++i)
    gx.v[static_cast<size_t>(i)] *= mask.v[static_cast<size_t>(i)];
  return gx;
}

// ---------------------------------------------------------------- Flatten

Tensor Flatten::forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const {
  Tensor y = x.reshaped({static_cast<int>(x.numel())});
  cache.push_back(x);
  return y;
}

Tensor Flatten::backward(const Tensor& gy, const std::vector<Tensor>& cache,
                         std::span<Tensor> grads) const {
  check_grads(grads, params(), "flatten: no parameters expected");
  const Tensor& x = cache.at(0);
  check_shape(gy.numel() == x.numel(), "flatten: output gradient mismatch");
  return gy.reshaped(x.shape);
}

// ---------------------------------------------------------------- MapToSequence

Tensor MapToSequence::forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const {
  check_shape(x.rank() == 3, "map_to_sequence: expects (C, H, W)");
  const int C = x.dim(0), H = x.dim(1), W_ = x.dim(2);
  Tensor y({W_, C * H});
  for (int c = 0; c < C; ++c)
    for (int h = 0; h < H; ++h)
      for (int w = 0; w < W_; ++w) y.at(w, c * H + h) = x.at(c, h, w);
  cache.push_back(x);
  return y;
}

Tensor MapToSequence::backward(const Tensor& gy, const std::vector<Tensor>& cache,
                               std::span<Tensor> grads) const {
  check_grads(grads, params(), "map_to_sequence: no parameters expected");
  const Tensor& x = cache.at(0);
  const int C = x.dim(0), H = x.dim(1), W_ = x.dim(2);
  check_shape(gy.rank() == 2 && gy.dim(0) == W_ && gy.dim(1) == C * H,
              "map_to_sequence: output gradient mismatch");
  Tensor gx(x.shape);
  for (int c = 0; c < C; ++c)
    for (int h = 0; h < H; ++h)
      for (int w = 0; w < W_; ++w) gx.at(c, h, w) = gy.at(w, c * H + h);
  return gx;
}

// ---------------------------------------------------------------- LSTM core

namespace {

// x (T, F); fills acts (T, 4H) with post-activation gates [i f g o],
// c (T, H) cell states, h (T, H) hidden states. h0 = c0 = 0.
void lstm_forward_core(const Tensor& x, const Tensor& W, const Tensor& U, const Tensor& b,
                       Tensor& acts, Tensor& c, Tensor& h) {
  const int T = x.dim(0), F = x.dim(1);
  const int H4 = W.dim(0), H = H4 / 4;

  Tensor G({T, H4});  // input-path pre-activations for every step at once
  gemm_nt(T, H4, F, x.data(), W.data(), G.data());

  std::vector<double> z(H4);
  for (int t = 0; t < T; ++t) {
    const double* grow = G.data() + static_cast<size_t>(t) * H4;
    for (int j = 0; j < H4; ++j) z[j] = grow[j] + b.at(j);
    if (t > 0) gemv(H4, H, U.data(), h.data() + static_cast<size_t>(t - 1) * H, z.data());

    double* a = acts.data() + static_cast<size_t>(t) * H4;
    const double* cprev = t > 0 ? c.data() + static_cast<size_t>(t - 1) * H : nullptr;
    double* ct = c.data() + static_cast<size_t>(t) * H;
    double* ht = h.data() + static_cast<size_t>(t) * H;
    for (int j = 0; j < H; ++j) {
      const double i = sigmoid(z[j]);
      const double f = sigmoid(z[H + j]);
      const double g = std::tanh(z[2 * H + j]);
      const double o = sigmoid(z[3 * H + j]);
      a[j] = i;
      a[H + j] = f;
      a[2 * H + j] = g;
      a[3 * H + j] = o;
      const double cc = (cprev ? f * cprev[j] : 0.0) + i * g;
      ct[j] = cc;
      ht[j] = o * std::tanh(cc);
    }
  }
}

// gy_seq (T, H) carries the loss gradient on every h_t (rows may be zero).
// Returns gx (T, F); accumulates into gW, gU, gb.
Tensor lstm_backward_core(const Tensor& x, const Tensor& W, const Tensor& U, const Tensor& acts,
                          const Tensor& c, const Tensor& h, const Tensor& gy_seq, Tensor& gW,
                          Tensor& gU, Tensor& gb) {
  const int T = x.dim(0), F = x.dim(1);
  const int H4 = W.dim(0), H = H4 / 4;

  Tensor dG({T, H4});  // pre-activation gate gradients
  std::vector<double> dh(H, 0.0), dc(H, 0.0), dz(H4);

  for (int t = T - 1; t >= 0; --t) {
    const double* gy = gy_seq.data() + static_cast<size_t>(t) * H;
    const double* a = acts.data() + static_cast<size_t>(t) * H4;
    const double* ct = c.data() + static_cast<size_t>(t) * H;
    const double* cprev = t > 0 ? c.data() + static_cast<size_t>(t - 1) * H : nullptr;
    for (int j = 0; j < H; ++j) {
      const double i = a[j], f = a[H + j], g = a[2 * H + j], o = a[3 * H + j];
      const double tc = std::tanh(ct[j]);
      const double dht = dh[j] + gy[j];
      const double dcj = dc[j] + dht * o * (1.0 - tc * tc);
      dz[j] = (dcj * g) * i * (1.0 - i);
      dz[H + j] = cprev ? (dcj * cprev[j]) * f * (1.0 - f) : 0.0;
      dz[2 * H + j] = (dcj * i) * (1.0 - g * g);
      dz[3 * H + j] = (dht * tc) * o * (1.0 - o);
      dc[j] = dcj * f;
    }
    std::copy(dz.begin(), dz.end(), dG.data() + static_cast<size_t>(t) * H4);
    std::fill(dh.begin(), dh.end(), 0.0);
    gemv_t(H4, H, U.data(), dz.data(), dh.data());
    if (t > 0) ger(H4, H, dz.data(), h.data() + static_cast<size_t>(t - 1) * H, gU.data());
    for (int j = 0; j < H4; ++j) gb.at(j) += dz[j];
  }

  gemm_tn(H4, F, T, dG.data(), x.data(), gW.data());
  Tensor gx({T, F});
  gemm_nn(T, F, H4, dG.data(), W.data(), gx.data());
  return gx;
}

Tensor reverse_rows(const Tensor& x) {
  const int T = x.dim(0), F = x.dim(1);
  Tensor y({T, F});
  for (int t = 0; t < T; ++t)
    std::copy(x.data() + static_cast<size_t>(t) * F, x.data() + static_cast<size_t>(t + 1) * F,
              y.data() + static_cast<size_t>(T - 1 - t) * F);
  return y;
}

void glorot_lstm(Tensor& W, Tensor& U, Tensor& b, int features, int hidden, Rng& rng) {
  glorot_fill(W, features, 4 * hidden, rng);
  glorot_fill(U, hidden, 4 * hidden, rng);
  // unit forget bias: keeps the cell state open early in training, which the
  // conv+recurrent stacks need to converge on short schedules
  b.fill(0.0);
  for (int j = 0; j < hidden; ++j) b.at(hidden + j) = 1.0;
}

}  // namespace

// ---------------------------------------------------------------- Lstm

Lstm::Lstm(int features, int hidden, bool return_sequences)
    : features(features),
      hidden(hidden),
      return_sequences(return_sequences),
      W({4 * hidden, features}),
      U({4 * hidden, hidden}),
      b({4 * hidden}) {
  if (features <= 0 || hidden <= 0) throw InvalidConfig("lstm sizes must be positive");
}

Tensor Lstm::forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const {
  check_shape(x.rank() == 2 && x.dim(1) == features && x.dim(0) >= 1,
              "lstm: expects (T, features)");
  const int T = x.dim(0);
  Tensor acts({T, 4 * hidden}), c({T, hidden}), h({T, hidden});
  lstm_forward_core(x, W, U, b, acts, c, h);

  Tensor y;
  if (return_sequences) {
    y = h;
  } else {
    y = Tensor({hidden});
    std::copy(h.data() + static_cast<size_t>(T - 1) * hidden,
              h.data() + static_cast<size_t>(T) * hidden, y.data());
  }
  cache.push_back(x);
  cache.push_back(std::move(acts));
  cache.push_back(std::move(c));
  cache.push_back(std::move(h));
  return y;
}

Tensor Lstm::backward(const Tensor& gy, const std::vector<Tensor>& cache,
                      std::span<Tensor> grads) const {
  check_grads(grads, params(), "lstm: gradient buffers mismatch");
  const Tensor& x = cache.at(0);
  const int T = x.dim(0);

  Tensor gy_seq;
  if (return_sequences) {
    check_shape(gy.rank() == 2 && gy.dim(0) == T && gy.dim(1) == hidden,
                "lstm: output gradient mismatch");
    gy_seq = gy;
  } else {
    check_shape(gy.rank() == 1 && gy.dim(0) == hidden, "lstm: output gradient mismatch");
    gy_seq = Tensor({T, hidden});
    std::copy(gy.v.begin(), gy.v.end(), gy_seq.data() + static_cast<size_t>(T - 1) * hidden);
  }
  return lstm_backward_core(x, W, U, cache.at(1), cache.at(2), cache.at(3), gy_seq, grads[0],
                            grads[1], grads[2]);
}

void Lstm::init_params(Rng& rng) { glorot_lstm(W, U, b, features, hidden, rng); }

// ---------------------------------------------------------------- Blstm

Blstm::Blstm(int features, int hidden)
    : features(features),
      hidden(hidden),
      Wf({4 * hidden, features}),
      Uf({4 * hidden, hidden}),
      bf({4 * hidden}),
      Wb({4 * hidden, features}),
      Ub({4 * hidden, hidden}),
      bb({4 * hidden}) {
  if (features <= 0 || hidden <= 0) throw InvalidConfig("blstm sizes must be positive");
}

Tensor Blstm::forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const {
  check_shape(x.rank() == 2 && x.dim(1) == features && x.dim(0) >= 1,
              "blstm: expects (T, features)");
  const int T = x.dim(0);
  const Tensor xr = reverse_rows(x);

  Tensor actsF({T, 4 * hidden}), cF({T, hidden}), hF({T, hidden});
  Tensor actsB({T, 4 * hidden}), cB({T, hidden}), hB({T, hidden});
  lstm_forward_core(x, Wf, Uf, bf, actsF, cF, hF);
  lstm_forward_core(xr, Wb, Ub, bb, actsB, cB, hB);

  // hB runs in reversed time: hB[s] has consumed x_{T-1}..x_{T-1-s}
  Tensor y({T, 2 * hidden});
  for (int t = 0; t < T; ++t) {
    std::copy(hF.data() + static_cast<size_t>(t) * hidden,
              hF.data() + static_cast<size_t>(t + 1) * hidden,
              y.data() + static_cast<size_t>(t) * 2 * hidden);
    std::copy(hB.data() + static_cast<size_t>(T - 1 - t) * hidden,
              hB.data() + static_cast<size_t>(T - t) * hidden,
              y.data() + static_cast<size_t>(t) * 2 * hidden + hidden);
  }
  cache.push_back(x);
  cache.push_back(std::move(actsF));
  cache.push_back(std::move(cF));
  cache.push_back(std::move(hF));
  cache.push_back(std::move(actsB));
  cache.push_back(std::move(cB));
  cache.push_back(std::move(hB));
  return y;
}

Tensor Blstm::backward(const Tensor& gy, const std::vector<Tensor>& cache,
                       std::span<Tensor> grads) const {
  check_grads(grads, params(), "blstm: gradient buffers mismatch");
  const Tensor& x = cache.at(0);
  const int T = x.dim(0);
  check_shape(gy.rank() == 2 && gy.dim(0) == T && gy.dim(1) == 2 * hidden,
              "blstm: output gradient mismatch");

  Tensor gyF({T, hidden}), gyB({T, hidden});  // gyB in the reversed clock
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < hidden; ++j) {
      gyF.at(t, j) = gy.at(t, j);
      gyB.at(T - 1 - t, j) = gy.at(t, hidden + j);
    }

  const Tensor xr = reverse_rows(x);
  Tensor gxF = lstm_backward_core(x, Wf, Uf, cache.at(1), cache.at(2), cache.at(3), gyF, grads[0],
                                  grads[1], grads[2]);
  Tensor gxR = lstm_backward_core(xr, Wb, Ub, cache.at(4), cache.at(5), cache.at(6), gyB, grads[3],
                                  grads[4], grads[5]);
  const Tensor gxB = reverse_rows(gxR);
  for (long i = 0; i < gxF.numel(); ++i)
    gxF.v[static_cast<size_t>(i)] += gxB.v[static_cast<size_t>(i)];
  return gxF;
}

void Blstm::init_params(Rng& rng) {
  glorot_lstm(Wf, Uf, bf, features, hidden, rng);
  glorot_lstm(Wb, Ub, bb, features, hidden, rng);
}

// ---------------------------------------------------------------- loss & misc

Tensor softmax(const Tensor& logits) {
  check_shape(logits.rank() == 1 && logits.dim(0) >= 1, "softmax: expects a logit vector");
  Tensor p = logits;
  const double mx = *std::max_element(p.v.begin(), p.v.end());
  double sum = 0.0;
  for (double& v : p.v) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : p.v) v /= sum;
  return p;
}

double cross_entropy(const Tensor& probabilities, int true_class) {
  if (true_class < 0 || true_class >= probabilities.numel())
    throw IndexOutOfRange("cross_entropy: class index out of range");
  return -std::log(std::max(probabilities.at(true_class), 1e-12));
}

Tensor softmax_ce_backward(const Tensor& probabilities, int true_class) {
  if (true_class < 0 || true_class >= probabilities.numel())
    throw IndexOutOfRange("cross_entropy: class index out of range");
  Tensor g = probabilities;
  g.at(true_class) -= 1.0;
  return g;
}

void glorot_fill(Tensor& t, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : t.v) v = rng.uniform(-limit, limit);
}

// ---------------------------------------------------------------- Adam

void AdamState::init(const std::vector<Tensor*>& params) {
  step_count = 0;
  m.clear();
  v.clear();
  m.reserve(params.size());
  v.reserve(params.size());
  for (const Tensor* p : params) {
    m.emplace_back(p->shape);
    v.emplace_back(p->shape);
  }
}

void AdamState::step(const std::vector<Tensor*>& params, const std::span<Tensor> grads) {
  check_shape(params.size() == m.size() && grads.size() == m.size(),
              "adam: parameter list does not match state");
  ++step_count;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_count));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_count));
  for (size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const Tensor& g = grads[k];
    check_shape(p.same_shape(m[k]) && g.same_shape(m[k]), "adam: tensor shape mismatch");
    double* mp = m[k].data();
    double* vp = v[k].data();
    double* pp = p.data();
    const double* gp = g.data();
    const long n = p.numel();
    for (long i = 0; i < n; ++i) {
      mp[i] = cfg.beta1 * mp[i] + (1.0 - cfg.beta1) * gp[i];
      vp[i] = cfg.beta2 * vp[i] + (1.0 - cfg.beta2) * gp[i] * gp[i];
      const double mhat = mp[i] / bc1;
      const double vhat = vp[i] / bc2;
      pp[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
  }
}

}  // namespace wordrec::nn
