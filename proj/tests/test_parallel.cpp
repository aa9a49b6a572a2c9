#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "wordrec/dataset.hpp"
#include "wordrec/feature_cache.hpp"
#include "wordrec/train.hpp"

using namespace wordrec;
namespace fs = std::filesystem;

// Serial and OpenMP paths must give bit-identical results everywhere; these
// tests pin that contract on every parallel entry point. On a build without
// OpenMP both modes share one code path and the checks are trivially true.

namespace {

fs::path fresh_dir(const char* name) {
  const fs::path d = fs::temp_directory_path() / "wordrec_test_parallel" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

SynthSpec small_spec() {
  SynthSpec s;
  s.class_count = 3;
  s.clips_per_class = 4;
  s.duration_seconds = 0.3;
  s.seed = 19;
  return s;
}

MfccConfig small_mfcc() {
  MfccConfig cfg;
  cfg.target_frames = 24;  // 0.3 s gives 13 frames; padded up for the conv stack
  return cfg;
}

bool same_floats(const std::vector<float>& a, const std::vector<float>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("corpus generation is mode-independent byte for byte") {
  const SynthSpec spec = small_spec();
  const fs::path ds = fresh_dir("corpus_serial");
  const fs::path dp = fresh_dir("corpus_openmp");
  const DatasetManifest ms = generate_synthetic_corpus(spec, ds, ExecMode::Serial);
  const DatasetManifest mp = generate_synthetic_corpus(spec, dp, ExecMode::OpenMP);
  REQUIRE(ms.entries.size() == mp.entries.size());
  for (size_t i = 0; i < ms.entries.size(); ++i) {
    CHECK(ms.entries[i].path.filename() == mp.entries[i].path.filename());
    CHECK(slurp(ms.entries[i].path) == slurp(mp.entries[i].path));
  }
}

TEST_CASE("feature extraction is mode-independent") {
  const fs::path dir = fresh_dir("features");
  const DatasetManifest m = generate_synthetic_corpus(small_spec(), dir);
  const MfccConfig cfg = small_mfcc();
  const FeatureCache a = build_feature_cache(m, cfg, 0.3, ExecMode::Serial);
  const FeatureCache b = build_feature_cache(m, cfg, 0.3, ExecMode::OpenMP);
  CHECK(same_floats(a.matrices, b.matrices));
  CHECK(same_floats(a.means, b.means));
  REQUIRE(a.entries.size() == b.entries.size());
  for (size_t i = 0; i < a.entries.size(); ++i) CHECK(a.entries[i].frames == b.entries[i].frames);
}

TEST_CASE("training and evaluation are mode-independent") {
  const fs::path dir = fresh_dir("train");
  const DatasetManifest m = generate_synthetic_corpus(small_spec(), dir);
  const FeatureCache fc = build_feature_cache(m, small_mfcc(), 0.3, ExecMode::OpenMP);
  const FeatureSet data = prepare_features(fc, Architecture::Cnn);

  ModelSpec spec;
  spec.architecture = Architecture::Cnn;
  spec.class_count = fc.class_count;
  spec.input_coefficients = fc.n_coefficients;
  spec.input_frames = fc.target_frames;
  spec.seed = 23;

  std::vector<int> idx(data.inputs.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);

  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 5;  // not a multiple of the chunk size on purpose
  cfg.seed = 31;

  const TrainResult ts = train_fold(spec, data, idx, cfg, ExecMode::Serial);
  const TrainResult tp = train_fold(spec, data, idx, cfg, ExecMode::OpenMP);

  const auto ps = ts.model.params(), pp = tp.model.params();
  REQUIRE(ps.size() == pp.size());
  for (size_t i = 0; i < ps.size(); ++i) CHECK(ps[i]->v == pp[i]->v);
  REQUIRE(ts.history.size() == tp.history.size());
  for (size_t e = 0; e < ts.history.size(); ++e) {
    CHECK(ts.history[e].loss == tp.history[e].loss);
    CHECK(ts.history[e].accuracy == tp.history[e].accuracy);
  }

  const EvalResult es = evaluate(ts.model, data, idx, ExecMode::Serial);
  const EvalResult ep = evaluate(tp.model, data, idx, ExecMode::OpenMP);
  CHECK(es.accuracy == ep.accuracy);
  CHECK(es.loss == ep.loss);
  CHECK(es.confusion == ep.confusion);
}

TEST_CASE("cross-validation reports are identical across modes") {
  const fs::path dir = fresh_dir("crossval");
  const DatasetManifest m = generate_synthetic_corpus(small_spec(), dir);
  const FeatureCache fc = build_feature_cache(m, small_mfcc(), 0.3, ExecMode::OpenMP);
  const FeatureSet data = prepare_features(fc, Architecture::Mlp);

  ModelSpec spec;
  spec.architecture = Architecture::Mlp;
  spec.class_count = fc.class_count;
  spec.input_coefficients = fc.n_coefficients;
  spec.input_frames = fc.target_frames;
  spec.seed = 5;

  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.seed = 5;

  const CrossValReport rs = cross_validate(spec, data, 2, cfg, ExecMode::Serial);
  const CrossValReport rp = cross_validate(spec, data, 2, cfg, ExecMode::OpenMP);
  CHECK(rs.avg_test_accuracy == rp.avg_test_accuracy);
  CHECK(rs.avg_train_loss == rp.avg_train_loss);
  CHECK(rs.summed_confusion == rp.summed_confusion);
  REQUIRE(rs.folds.size() == rp.folds.size());
  for (size_t f = 0; f < rs.folds.size(); ++f) {
    CHECK(rs.folds[f].test_accuracy == rp.folds[f].test_accuracy);
    CHECK(rs.folds[f].train_loss == rp.folds[f].train_loss);
    CHECK(rs.folds[f].confusion == rp.folds[f].confusion);
  }
}
