#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wordrec/rng.hpp"
#include "wordrec/tensor.hpp"

namespace wordrec::nn {

enum class Mode { Train, Infer };

// One network stage operating on a single example. Layers are immutable
// during forward/backward (all per-call state lives in the caller-owned
// cache), so one frozen layer can evaluate many examples concurrently.
struct Layer {
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;

  // Appends to `cache` whatever the matching backward call needs.
  // `rng` is only consulted by stochastic layers in Train mode.
  virtual Tensor forward(const Tensor& x, std::vector<Tensor>& cache, Mode mode,
                         Rng* rng) const = 0;

  // gy = dLoss/dOutput for the example that produced `cache`. Returns
  // dLoss/dInput and accumulates (+=) parameter gradients into `grads`,
  // which must mirror params() in order and shape.
  virtual Tensor backward(const Tensor& gy, const std::vector<Tensor>& cache,
                          std::span<Tensor> grads) const = 0;

  virtual std::vector<Tensor*> params() { return {}; }
  virtual std::vector<const Tensor*> params() const { return {}; }
  virtual std::vector<std::string> param_names() const { return {}; }

  // Fill parameters from `rng` (Glorot-uniform weights, zero biases).
  virtual void init_params(Rng&) {}
};

// y = W.x + b with W (n_out, n_in)
struct Dense : Layer {
  int n_in, n_out;
  Tensor W, b;
  Dense(int n_in, int n_out);
  std::string kind() const override { return "dense"; }
  Tensor forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const override;
  Tensor backward(const Tensor& gy, const std::vector<Tensor>& cache,
                  std::span<Tensor> grads) const override;
  std::vector<Tensor*> params() override { return {&W, &b}; }
  std::vector<const Tensor*> params() const override { return {&W, &b}; }
  std::vector<std::string> param_names() const override { return {"W", "b"}; }
  void init_params(Rng& rng) override;
};

// Valid-padding stride-1 cross-correlation.
// x (c_in, H, W) -> y (c_out, H-kh+1, W-kw+1); kernels (c_out, c_in, kh, kw).
struct Conv2d : Layer {
  int c_in, c_out, kh, kw;
  Tensor K, b;
  Conv2d(int c_in, int c_out, int kh, int kw);
  std::string kind() const override { return "conv2d"; }
  Tensor forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const override;
  Tensor backward(const Tensor& gy, const std::vector<Tensor>& cache,
                  std::span<Tensor> grads) const override;
  std::vector<Tensor*> params() override { return {&K, &b}; }
  std::vector<const Tensor*> params() const override { return {&K, &b}; }
  std::vector<std::string> param_names() const override { return {"K", "b"}; }
  void init_params(Rng& rng) override;
};

// Non-overlapping 2x2 max windows; trailing row/column that cannot fill a
// window is dropped. Backward routes each gradient to its window argmax
// (first position in row-major scan wins ties).
struct MaxPool2 : Layer {
  std::string kind() const override { return "maxpool2"; }
  Tensor forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const override;
  Tensor backward(const Tensor& gy, const std::vector<Tensor>& cache,
                  std::span<Tensor> grads) const override;
};

// x (C, H, W) -> per-channel spatial mean (C)
struct GlobalAvgPool : Layer {
  std::string kind() const override { return "global_avg_pool"; }
  Tensor forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const override;
  Tensor backward(const Tensor& gy, const std::vector<Tensor>& cache,
                  std::span<Tensor> grads) const override;
};

// max(0, x); subgradient at 0 is 0
struct Relu : Layer {
  std::string kind() const override { return "relu"; }
  Tensor forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const override;
  Tensor backward(const Tensor& gy, const std::vector<Tensor>& cache,
                  std::span<Tensor> grads) const override;
};

// Inverted dropout: in Train mode each element is zeroed with probability
// `rate` and survivors are scaled by 1/(1-rate); Infer mode is the identity.
// One uniform draw per element, row-major order.
struct Dropout : Layer {
  double rate;
  explicit Dropout(double rate);
  std::string kind() const override { return "dropout"; }
  Tensor forward(const Tensor& x, std::vector<Tensor>& cache, Mode mode, Rng* rng) const override;
  Tensor backward(const Tensor& gy, const std::vector<Tensor>& cache,
                  std::span<Tensor> grads) const override;
};

struct Flatten : Layer {
  std::string kind() const override { return "flatten"; }
  Tensor forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const override;
  Tensor backward(const Tensor& gy, const std::vector<Tensor>& cache,
                  std::span<Tensor> grads) const override;
};

// Conv-to-recurrent bridge: (C, H, W) -> (W, C*H). Width (time) becomes the
// step axis; channels x height collapse into the per-step feature vector.
struct MapToSequence : Layer {
  std::string kind() const override { return "map_to_sequence"; }
  Tensor forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const override;
  Tensor backward(const Tensor& gy, const std::vector<Tensor>& cache,
                  std::span<Tensor> grads) const override;
};

// Single-direction LSTM over x (T, F). Parameter rows are the four gates
// stacked in order i, f, g, o; h0 = c0 = 0.
// W (4H, F), U (4H, H), b (4H).
struct Lstm : Layer {
  int features, hidden;
  bool return_sequences;
  Tensor W, U, b;
  Lstm(int features, int hidden, bool return_sequences);
  std::string kind() const override { return "lstm"; }
  Tensor forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const override;
  Tensor backward(const Tensor& gy, const std::vector<Tensor>& cache,
                  std::span<Tensor> grads) const override;
  std::vector<Tensor*> params() override { return {&W, &U, &b}; }
  std::vector<const Tensor*> params() const override { return {&W, &U, &b}; }
  std::vector<std::string> param_names() const override { return {"W", "U", "b"}; }
  void init_params(Rng& rng) override;
};

// Two independent LSTMs over x and reversed x; output (T, 2H) concatenates
// [h_fwd_t ; h_bwd_t] where h_bwd_t has consumed x_{T-1}..x_t.
struct Blstm : Layer {
  int features, hidden;
  Tensor Wf, Uf, bf, Wb, Ub, bb;
  Blstm(int features, int hidden);
  std::string kind() const override { return "blstm"; }
  Tensor forward(const Tensor& x, std::vector<Tensor>& cache, Mode, Rng*) const override;
  Tensor backward(const Tensor& gy, const std::vector<Tensor>& cache,
                  std::span<Tensor> grads) const override;
  std::vector<Tensor*> params() override { return {&Wf, &Uf, &bf, &Wb, &Ub, &bb}; }
  std::vector<const Tensor*> params() const override { return {&Wf, &Uf, &bf, &Wb, &Ub, &bb}; }
  std::vector<std::string> param_names() const override {
    return {"W_fwd", "U_fwd", "b_fwd", "W_bwd", "U_bwd", "b_bwd"};
  }
  void init_params(Rng& rng) override;
};

// Max-subtracted softmax over a rank-1 logit vector.
Tensor softmax(const Tensor& logits);

// -ln p[true_class], p clamped below at 1e-12. Throws IndexOutOfRange.
double cross_entropy(const Tensor& probabilities, int true_class);

// Gradient of cross_entropy(softmax(z)) w.r.t. the logits z: p - onehot.
Tensor softmax_ce_backward(const Tensor& probabilities, int true_class);

// U(-limit, limit) with limit = sqrt(6 / (fan_in + fan_out)), row-major order.
void glorot_fill(Tensor& t, int fan_in, int fan_out, Rng& rng);

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

struct AdamState {
  AdamConfig cfg;
  long long step_count = 0;
  std::vector<Tensor> m, v;

  explicit AdamState(AdamConfig cfg = {}) : cfg(cfg) {}
  void init(const std::vector<Tensor*>& params);
  // One update: step_count advances once per call, all tensors share it.
  void step(const std::vector<Tensor*>& params, const std::span<Tensor> grads);
};

}  // namespace wordrec::nn
