#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wordrec/nn.hpp"
#include "wordrec/tensor.hpp"

namespace wordrec {

enum class Architecture { Mlp, Cnn, Lstm, CnnLstm, CnnBlstm };

constexpr Architecture kAllArchitectures[] = {Architecture::Mlp, Architecture::Cnn,
                                              Architecture::Lstm, Architecture::CnnLstm,
                                              Architecture::CnnBlstm};

std::string architecture_id(Architecture a);                 // "mlp", "cnn+blstm", ...
Architecture parse_architecture(const std::string& id);      // throws UnknownArchitecture

struct ModelSpec {
  Architecture architecture = Architecture::Mlp;
  int class_count = 20;
  int input_coefficients = 40;  // feature rows; also the MLP input width
  int input_frames = 174;       // feature columns (time)
  double dropout_rate = 0.2;
  uint64_t seed = 0;

  void validate() const;  // throws InvalidConfig
};

// An instantiated network: ordered layers, parameters initialized from
// spec.seed. The softmax head lives in the loss/predict functions, so
// forward() returns logits.
struct Model {
  ModelSpec spec;
  std::vector<std::unique_ptr<nn::Layer>> layers;

  std::vector<Tensor*> params();
  std::vector<const Tensor*> params() const;
  std::vector<std::string> param_names() const;  // "L03.conv2d.K" style, unique
  long param_count() const;

  // Zero-filled gradient tensors matching params() order.
  std::vector<Tensor> make_grads() const;

  // caches, when given, receives one cache vector per layer (for backward).
  Tensor forward(const Tensor& x, nn::Mode mode, Rng* rng,
                 std::vector<std::vector<Tensor>>* caches) const;

  // glogits = dLoss/dLogits. Accumulates (+=) into flat `grads`.
  void backward(const Tensor& glogits, const std::vector<std::vector<Tensor>>& caches,
                std::vector<Tensor>& grads) const;
};

// Constructs one of the five fixed stacks for the spec's input size.
// Throws UnsupportedShape when the input is too small for the conv/pool
// pyramid the architecture needs.
Model build_model(const ModelSpec& spec);

struct Prediction {
  int class_index = 0;
  Tensor probabilities;
};

// Inference-mode forward + softmax; argmax breaks ties toward the lowest index.
Prediction predict(const Model& model, const Tensor& features);

// Binary checkpoint; round-trips parameters bit-exactly.
void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace wordrec
