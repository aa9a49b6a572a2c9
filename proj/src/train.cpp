#include "wordrec/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "wordrec/errors.hpp"

namespace wordrec {

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidConfig("epochs must be >= 1");
  if (batch_size < 1) throw InvalidConfig("batch_size must be >= 1");
}

TrainConfig default_train_config(Architecture a) {
  TrainConfig cfg;
  switch (a) {
    case Architecture::Mlp:
      cfg.epochs = 100;  // batch size is the published figure; epoch count is ours
      cfg.batch_size = 32;
      break;
    case Architecture::Cnn:
      cfg.epochs = 80;
      cfg.batch_size = 84;
      break;
    case Architecture::Lstm:
    case Architecture::CnnLstm:
    case Architecture::CnnBlstm:
      cfg.epochs = 100;
      cfg.batch_size = 64;
      break;
  }
  return cfg;
}

std::vector<std::pair<std::vector<int>, std::vector<int>>> stratified_kfold(
    const std::vector<int>& labels, int class_count, int k, uint64_t seed) {
  if (k < 2) throw InvalidConfig("fold count must be >= 2");
  if (class_count < 1) throw InvalidConfig("class_count must be >= 1");
  const int n = static_cast<int>(labels.size());

  std::vector<std::vector<int>> by_class(class_count);
  for (int i = 0; i < n; ++i) {
    const int c = labels[i];
    if (c < 0 || c >= class_count) throw IndexOutOfRange("label out of class range");
    by_class[c].push_back(i);
  }
  for (int c = 0; c < class_count; ++c)
    if (static_cast<int>(by_class[c].size()) < k)
      throw TooFewExamples("class " + std::to_string(c) + " has " +
                           std::to_string(by_class[c].size()) + " examples; need >= " +
                           std::to_string(k) + " for " + std::to_string(k) + "-fold");

  Rng rng(mix_seed(seed, seed_stream::kFoldDeal));
  std::vector<std::vector<int>> test(k);
  for (int c = 0; c < class_count; ++c) {
    std::vector<int>& idx = by_class[c];
    rng.shuffle(idx);
    for (size_t j = 0; j < idx.size(); ++j) test[j % k].push_back(idx[j]);
  }

  std::vector<std::pair<std::vector<int>, std::vector<int>>> folds(k);
  std::vector<char> in_test(n);
  for (int f = 0; f < k; ++f) {
    std::sort(test[f].begin(), test[f].end());
    std::fill(in_test.begin(), in_test.end(), 0);
    for (int i : test[f]) in_test[i] = 1;
    std::vector<int>& train = folds[f].first;
    train.reserve(n - test[f].size());
    for (int i = 0; i < n; ++i)
      if (!in_test[i]) train.push_back(i);
    folds[f].second = std::move(test[f]);
  }
  return folds;
}

InputKind input_kind(Architecture a) {
  switch (a) {
    case Architecture::Mlp: return InputKind::MeanVector;
    case Architecture::Lstm: return InputKind::Sequence;
    default: return InputKind::Matrix2d;
  }
}

FeatureSet prepare_features(const FeatureCache& cache, Architecture arch) {
  cache.validate();
  const int nc = cache.n_coefficients;
  const int tf = cache.target_frames;
  const InputKind kind = input_kind(arch);

  FeatureSet set;
  set.class_count = cache.class_count;
  set.class_labels = cache.class_labels;
  set.labels.reserve(cache.clip_count());
  set.inputs.reserve(cache.clip_count());

  for (int i = 0; i < cache.clip_count(); ++i) {
    set.labels.push_back(cache.entries[i].class_index);
    switch (kind) {
      case InputKind::MeanVector: {
        Tensor t({nc});
        const float* mu = cache.mean(i);
        for (int j = 0; j < nc; ++j) t.at(j) = mu[j];
        set.inputs.push_back(std::move(t));
        break;
      }
      case InputKind::Matrix2d: {
        Tensor t({1, nc, tf});
        const float* m = cache.matrix(i);
        for (long j = 0; j < static_cast<long>(nc) * tf; ++j)
          t.v[static_cast<size_t>(j)] = m[j];
        set.inputs.push_back(std::move(t));
        break;
      }
      case InputKind::Sequence: {
        Tensor t({tf, nc});
        const float* m = cache.matrix(i);  // stored (coefficients, frames)
        for (int c = 0; c < nc; ++c)
          for (int f = 0; f < tf; ++f) t.at(f, c) = m[static_cast<size_t>(c) * tf + f];
        set.inputs.push_back(std::move(t));
        break;
      }
    }
  }
  return set;
}

namespace {

constexpr int kChunk = 8;  // examples evaluated concurrently between merges

int argmax_lowest(const Tensor& p) {
  int best = 0;
  for (int i = 1; i < p.numel(); ++i)
    if (p.at(i) > p.at(best)) best = i;
  return best;
}

}  // namespace

TrainResult train_fold(const ModelSpec& spec, const FeatureSet& data,
                       const std::vector<int>& train_indices, const TrainConfig& cfg,
                       ExecMode mode) {
  cfg.validate();
  if (train_indices.empty()) throw TooFewExamples("training set is empty");
  for (int i : train_indices)
    if (i < 0 || i >= static_cast<int>(data.inputs.size()))
      throw IndexOutOfRange("train index out of range");

  Model model = build_model(spec);
  const std::vector<Tensor*> params = model.params();
  nn::AdamState adam(cfg.adam);
  adam.init(params);

  std::vector<Tensor> grads = model.make_grads();
  std::vector<std::vector<Tensor>> slot_grads(kChunk);
  std::vector<std::vector<std::vector<Tensor>>> slot_caches(kChunk);
  for (int s = 0; s < kChunk; ++s) slot_grads[s] = model.make_grads();
  double slot_loss[kChunk];
  int slot_hit[kChunk];

  const uint64_t shuffle_base = mix_seed(cfg.seed, seed_stream::kShuffle);
  const uint64_t dropout_base = mix_seed(cfg.seed, seed_stream::kDropout);

  std::vector<int> order = train_indices;
  const int n = static_cast<int>(order.size());
  TrainResult result{std::move(model), {}};
  const Model& net = result.model;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) {
      Rng srng(mix_seed(shuffle_base, static_cast<uint64_t>(epoch)));
      srng.shuffle(order);
    }

    double epoch_loss = 0.0;
    long epoch_hits = 0;

    for (int batch_start = 0; batch_start < n; batch_start += cfg.batch_size) {
      const int batch_n = std::min(cfg.batch_size, n - batch_start);
      for (Tensor& g : grads) g.fill(0.0);

      for (int chunk_start = 0; chunk_start < batch_n; chunk_start += kChunk) {
        const int chunk_n = std::min(kChunk, batch_n - chunk_start);
        parallel_for(chunk_n, mode, [&](int s) {
          const int pos = batch_start + chunk_start + s;  // position in this epoch's order
          const int ex = order[static_cast<size_t>(pos)];
          Rng drng(mix_seed(dropout_base, static_cast<uint64_t>(epoch),
                            static_cast<uint64_t>(pos)));
          const Tensor logits =
              net.forward(data.inputs[static_cast<size_t>(ex)], nn::Mode::Train, &drng,
                          &slot_caches[s]);
          const Tensor probs = nn::softmax(logits);
          const int label = data.labels[static_cast<size_t>(ex)];
          slot_loss[s] = nn::cross_entropy(probs, label);
          slot_hit[s] = argmax_lowest(probs) == label ? 1 : 0;
          const Tensor gl = nn::softmax_ce_backward(probs, label);
          net.backward(gl, slot_caches[s], slot_grads[s]);
        });
        // merge in slot order so the arithmetic never depends on thread count
        for (int s = 0; s < chunk_n; ++s) {
          for (size_t t = 0; t < grads.size(); ++t) {
            const Tensor& src = slot_grads[s][t];
            double* dst = grads[t].data();
            for (long j = 0; j < src.numel(); ++j) dst[j] += src.v[static_cast<size_t>(j)];
            slot_grads[s][t].fill(0.0);
          }
          epoch_loss += slot_loss[s];
          epoch_hits += slot_hit[s];
        }
      }

      const double inv = 1.0 / batch_n;  // batch gradient = example mean
      for (Tensor& g : grads)
        for (double& v : g.v) v *= inv;
      adam.step(params, grads);
    }

    result.history.push_back({epoch_loss / n, static_cast<double>(epoch_hits) / n});
  }
  return result;
}

EvalResult evaluate(const Model& model, const FeatureSet& data,
                    const std::vector<int>& test_indices, ExecMode mode) {
  const int n = static_cast<int>(test_indices.size());
  if (n == 0) throw TooFewExamples("test set is empty");
  for (int i : test_indices)
    if (i < 0 || i >= static_cast<int>(data.inputs.size()))
      throw IndexOutOfRange("test index out of range");

  std::vector<int> pred(n);
  std::vector<double> loss(n);
  parallel_for(n, mode, [&](int i) {
    const int ex = test_indices[static_cast<size_t>(i)];
    const Prediction p = predict(model, data.inputs[static_cast<size_t>(ex)]);
    pred[static_cast<size_t>(i)] = p.class_index;
    loss[static_cast<size_t>(i)] =
        nn::cross_entropy(p.probabilities, data.labels[static_cast<size_t>(ex)]);
  });

  EvalResult ev;
  ev.confusion.assign(data.class_count, std::vector<long>(data.class_count, 0));
  double loss_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const int truth = data.labels[static_cast<size_t>(test_indices[static_cast<size_t>(i)])];
    ev.confusion[truth][pred[static_cast<size_t>(i)]] += 1;
    loss_sum += loss[static_cast<size_t>(i)];
  }
  long trace = 0;
  for (int c = 0; c < data.class_count; ++c) trace += ev.confusion[c][c];
  ev.accuracy = static_cast<double>(trace) / n;
  ev.loss = loss_sum / n;
  return ev;
}

CrossValReport cross_validate(const ModelSpec& spec, const FeatureSet& data, int k,
                              const TrainConfig& cfg, ExecMode mode,
                              const std::string& checkpoint_dir,
                              const std::function<void(const FoldResult&)>& on_fold) {
  const auto folds = stratified_kfold(data.labels, data.class_count, k, cfg.seed);

  CrossValReport report;
  report.model_id = architecture_id(spec.architecture);
  report.seed = cfg.seed;
  report.summed_confusion.assign(data.class_count, std::vector<long>(data.class_count, 0));

  for (int f = 0; f < k; ++f) {
    ModelSpec fold_spec = spec;
    TrainConfig fold_cfg = cfg;
    fold_spec.seed = cfg.seed + static_cast<uint64_t>(f);
    fold_cfg.seed = cfg.seed + static_cast<uint64_t>(f);

    TrainResult tr = train_fold(fold_spec, data, folds[f].first, fold_cfg, mode);
    const EvalResult ev = evaluate(tr.model, data, folds[f].second, mode);

    FoldResult fr;
    fr.fold_index = f;
    fr.train_loss = tr.history.back().loss;
    fr.train_accuracy = tr.history.back().accuracy;
    fr.test_loss = ev.loss;
    fr.test_accuracy = ev.accuracy;
    fr.confusion = ev.confusion;
    for (int a = 0; a < data.class_count; ++a)
      for (int b = 0; b < data.class_count; ++b)
        report.summed_confusion[a][b] += ev.confusion[a][b];

    report.avg_train_accuracy += fr.train_accuracy;
    report.avg_train_loss += fr.train_loss;
    report.avg_test_accuracy += fr.test_accuracy;
    report.avg_test_loss += fr.test_loss;
    report.folds.push_back(std::move(fr));

    if (!checkpoint_dir.empty()) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_fold%02d.ckpt", report.model_id.c_str(), f);
      save_checkpoint(tr.model, checkpoint_dir + "/" + name);
    }
    if (on_fold) on_fold(report.folds.back());
  }

  report.avg_train_accuracy /= k;
  report.avg_train_loss /= k;
  report.avg_test_accuracy /= k;
  report.avg_test_loss /= k;
  return report;
}

}  // namespace wordrec
