// Timing comparison of the serial reference path against the OpenMP path for
// the two hot loops (feature extraction, batch-gradient training), plus a
// bit-identity check between the two -- the parallel path is only valid if it
// reproduces the serial bytes exactly.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "wordrec/audio.hpp"
#include "wordrec/dataset.hpp"
#include "wordrec/mfcc.hpp"
#include "wordrec/model.hpp"
#include "wordrec/parallel.hpp"
#include "wordrec/rng.hpp"
#include "wordrec/tensor.hpp"
#include "wordrec/train.hpp"

namespace {

using namespace wordrec;

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct BenchRow {
  const char* name;
  double serial_s;
  double openmp_s;
  bool identical;
};

void print_rows(const std::vector<BenchRow>& rows) {
  std::printf("%-28s %10s %10s %9s   %s\n", "benchmark", "serial", "openmp", "speedup",
              "bit-identical");
  for (const BenchRow& r : rows)
    std::printf("%-28s %9.3fs %9.3fs %8.2fx   %s\n", r.name, r.serial_s, r.openmp_s,
                r.openmp_s > 0 ? r.serial_s / r.openmp_s : 0.0, r.identical ? "yes" : "NO");
}

bool same_bits(const Tensor& a, const Tensor& b) {
  return a.shape == b.shape &&
         std::memcmp(a.v.data(), b.v.data(), a.v.size() * sizeof(double)) == 0;
}

BenchRow bench_mfcc(int clips) {
  SynthSpec spec;
  spec.class_count = 4;
  spec.clips_per_class = (clips + 3) / 4;
  MfccConfig cfg;
  cfg.target_frames = 44;

  std::vector<AudioClip> audio(static_cast<size_t>(clips));
  for (int i = 0; i < clips; ++i) {
    audio[i].samples = synth_clip_samples(spec, i % spec.class_count, i / spec.class_count);
    audio[i].sample_rate = spec.sample_rate;
  }

  std::vector<Tensor> out_serial(audio.size()), out_openmp(audio.size());
  auto run = [&](ExecMode mode, std::vector<Tensor>& out) {
    const double t0 = now_seconds();
    parallel_for(clips, mode, [&](int i) { out[i] = mfcc(audio[i], cfg); });
    return now_seconds() - t0;
  };
  BenchRow row{"mfcc (64 clips @ 44 frames)", 0, 0, true};
  row.serial_s = run(ExecMode::Serial, out_serial);
  row.openmp_s = run(ExecMode::OpenMP, out_openmp);
  for (size_t i = 0; i < audio.size(); ++i)
    if (!same_bits(out_serial[i], out_openmp[i])) row.identical = false;
  return row;
}

BenchRow bench_train(int examples, int epochs) {
  ModelSpec spec;
  spec.architecture = Architecture::Cnn;
  spec.class_count = 4;
  spec.input_coefficients = 40;
  spec.input_frames = 44;
  spec.seed = 11;

  FeatureSet data;
  data.class_count = 4;
  Rng rng(99);
  for (int i = 0; i < examples; ++i) {
    Tensor x({1, spec.input_coefficients, spec.input_frames});
    for (double& v : x.v) v = rng.uniform(-1.0, 1.0);
    data.inputs.push_back(std::move(x));
    data.labels.push_back(i % 4);
  }
  std::vector<int> idx(data.inputs.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);

  TrainConfig cfg = default_train_config(spec.architecture);
  cfg.epochs = epochs;
  cfg.batch_size = 32;
  cfg.seed = 11;

  auto run = [&](ExecMode mode, TrainResult& tr) {
    const double t0 = now_seconds();
    tr = train_fold(spec, data, idx, cfg, mode);
    return now_seconds() - t0;
  };
  TrainResult serial_tr, openmp_tr;
  BenchRow row{"cnn gradients (40 ex, 2 ep)", 0, 0, true};
  row.serial_s = run(ExecMode::Serial, serial_tr);
  row.openmp_s = run(ExecMode::OpenMP, openmp_tr);

  const auto pa = serial_tr.model.params();
  const auto pb = openmp_tr.model.params();
  for (size_t i = 0; i < pa.size(); ++i)
    if (!same_bits(*pa[i], *pb[i])) row.identical = false;
  return row;
}

}  // namespace

int main() {
  std::printf("threads available: %d\n\n", max_threads());
  std::vector<BenchRow> rows;
  rows.push_back(bench_mfcc(64));
  rows.push_back(bench_train(40, 2));
  print_rows(rows);
  bool ok = true;
  for (const BenchRow& r : rows) ok = ok && r.identical;
  return ok ? 0 : 1;
}
