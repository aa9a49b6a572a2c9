#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "wordrec/feature_cache.hpp"
#include "wordrec/model.hpp"
#include "wordrec/parallel.hpp"

namespace wordrec {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  nn::AdamConfig adam;
  uint64_t seed = 0;
  bool shuffle = true;

  void validate() const;  // throws InvalidConfig
};

// Published per-architecture settings (epochs, batch size).
TrainConfig default_train_config(Architecture a);

struct EpochStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

struct FoldResult {
  int fold_index = 0;
  double train_accuracy = 0.0;
  double train_loss = 0.0;
  double test_accuracy = 0.0;
  double test_loss = 0.0;
  std::vector<std::vector<long>> confusion;  // rows = true class, cols = predicted
};

struct CrossValReport {
  std::string model_id;
  uint64_t seed = 0;
  std::vector<FoldResult> folds;
  double avg_train_accuracy = 0.0;
  double avg_train_loss = 0.0;
  double avg_test_accuracy = 0.0;
  double avg_test_loss = 0.0;
  std::vector<std::vector<long>> summed_confusion;
  double wall_time_seconds = -1.0;  // < 0 renders as null so reports stay run-invariant
};

// Within each class: seeded shuffle, then round-robin dealing to k folds.
// Returns (train_indices, test_indices) per fold, both sorted ascending.
std::vector<std::pair<std::vector<int>, std::vector<int>>> stratified_kfold(
    const std::vector<int>& labels, int class_count, int k, uint64_t seed);

// The cache rendered as model inputs: the mean vector (40) for the MLP, the
// (1, coeffs, frames) matrix for conv stacks, the (frames, coeffs) sequence
// for the plain LSTM.
struct FeatureSet {
  std::vector<Tensor> inputs;
  std::vector<int> labels;
  int class_count = 0;
  std::vector<std::string> class_labels;
};

// Which of the three input renderings an architecture consumes.
enum class InputKind { MeanVector, Matrix2d, Sequence };
InputKind input_kind(Architecture a);

FeatureSet prepare_features(const FeatureCache& cache, Architecture arch);

struct TrainResult {
  Model model;
  std::vector<EpochStats> history;  // running per-epoch mean loss/accuracy
};

// Seeded mini-batch Adam training on data[train_indices]. Batch gradients are
// example means accumulated in a fixed order, so results are bit-identical
// for serial and parallel execution.
TrainResult train_fold(const ModelSpec& spec, const FeatureSet& data,
                       const std::vector<int>& train_indices, const TrainConfig& cfg,
                       ExecMode mode);

struct EvalResult {
  double accuracy = 0.0;
  double loss = 0.0;
  std::vector<std::vector<long>> confusion;
};

EvalResult evaluate(const Model& model, const FeatureSet& data,
                    const std::vector<int>& test_indices, ExecMode mode);

// k-fold protocol: fold i trains a fresh model re-seeded as cfg.seed + i.
// When checkpoint_dir is non-empty every fold's final model is saved there.
// on_fold, when set, is invoked after each fold finishes (progress reporting).
CrossValReport cross_validate(const ModelSpec& spec, const FeatureSet& data, int k,
                              const TrainConfig& cfg, ExecMode mode,
                              const std::string& checkpoint_dir = "",
                              const std::function<void(const FoldResult&)>& on_fold = {});

}  // namespace wordrec
