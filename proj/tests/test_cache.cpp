#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "wordrec/audio.hpp"
#include "wordrec/dataset.hpp"
#include "wordrec/errors.hpp"
#include "wordrec/feature_cache.hpp"
#include "wordrec/mfcc.hpp"

using namespace wordrec;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "wordrec_test_cache" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

SynthSpec small_spec() {
  SynthSpec s;
  s.class_count = 3;
  s.clips_per_class = 4;
  s.seed = 21;
  return s;
}

MfccConfig small_cfg() {
  MfccConfig cfg;
  cfg.target_frames = 44;
  return cfg;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("natural_less orders digit runs numerically") {
  CHECK(natural_less("clip_2", "clip_10"));
  CHECK_FALSE(natural_less("clip_10", "clip_2"));
  CHECK(natural_less("a2b", "a10b"));
  CHECK(natural_less("abc", "abd"));
  CHECK_FALSE(natural_less("x", "x"));
  CHECK(natural_less("word_09", "word_10"));
}

TEST_CASE("synthetic corpus layout, manifest, and scan agreement") {
  const fs::path dir = fresh_dir("corpus");
  const SynthSpec spec = small_spec();
  const DatasetManifest m = generate_synthetic_corpus(spec, dir);

  REQUIRE(m.class_count == 3);
  REQUIRE(m.entries.size() == 12);
  REQUIRE(m.class_labels.size() == 3);
  CHECK(m.class_labels[0] == "word_00");
  CHECK(m.class_labels[2] == "word_02");
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "word_00" / "clip_0000.wav"));
  CHECK(fs::exists(dir / "word_02" / "clip_0003.wav"));

  // every clip decodes to the requested length and rate
  const AudioClip clip = load_wav(m.entries[0].path);
  CHECK(clip.sample_rate == 22050);
  CHECK(clip.samples.size() == 22050);

  const DatasetManifest scanned = scan_dataset(dir);
  REQUIRE(scanned.entries.size() == m.entries.size());
  CHECK(scanned.class_count == m.class_count);
  CHECK(scanned.class_labels == m.class_labels);
  for (size_t i = 0; i < m.entries.size(); ++i) {
    CHECK(scanned.entries[i].path == m.entries[i].path);
    CHECK(scanned.entries[i].class_index == m.entries[i].class_index);
    CHECK(scanned.entries[i].class_label == m.entries[i].class_label);
  }
}

TEST_CASE("corpus generation is bit-deterministic in the seed") {
  const SynthSpec spec = small_spec();
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b"), c = fresh_dir("det_c");
  generate_synthetic_corpus(spec, a);
  generate_synthetic_corpus(spec, b);
  SynthSpec other = spec;
  other.seed = 22;
  generate_synthetic_corpus(other, c);

  const std::string wav_a = file_bytes(a / "word_01" / "clip_0002.wav");
  CHECK(wav_a == file_bytes(b / "word_01" / "clip_0002.wav"));
  CHECK(wav_a != file_bytes(c / "word_01" / "clip_0002.wav"));
}

TEST_CASE("class-0 clip concentrates energy at its two formants") {
  const SynthSpec spec = small_spec();
  const std::vector<double> s = synth_clip_samples(spec, 0, 0);
  MfccConfig cfg;
  const Tensor p = stft_power(s, cfg);

  // column 20 is mid-clip; find the two strongest bins
  const int mid = p.dim(1) / 2;
  int best = 0;
  double best_v = 0.0;
  for (int k = 0; k < p.dim(0); ++k)
    if (p.at(k, mid) > best_v) { best_v = p.at(k, mid); best = k; }
  const double hz_per_bin = 22050.0 / 2048.0;
  const double f1 = synth_formant1_hz(0);
  // strongest component sits on the first formant (within jitter + bin width)
  CHECK(std::abs(best * hz_per_bin - f1) < 0.05 * f1 + 2.0 * hz_per_bin);
}

TEST_CASE("scan_dataset rejects roots without classes or audio") {
  const fs::path empty = fresh_dir("empty_root");
  CHECK_THROWS_AS(scan_dataset(empty), EmptyDataset);

  const fs::path no_wavs = fresh_dir("no_wavs");
  fs::create_directories(no_wavs / "word_00");
  CHECK_THROWS_AS(scan_dataset(no_wavs), EmptyClass);

  // a nonexistent root is just as empty as an empty directory
  CHECK_THROWS_AS(scan_dataset(empty / "missing"), EmptyDataset);
}

TEST_CASE("feature cache matches direct per-clip extraction") {
  const fs::path dir = fresh_dir("cache_src");
  const SynthSpec spec = small_spec();
  const DatasetManifest m = generate_synthetic_corpus(spec, dir);
  const MfccConfig cfg = small_cfg();

  const FeatureCache fc = build_feature_cache(m, cfg, 1.0, ExecMode::OpenMP);
  REQUIRE(fc.clip_count() == 12);
  REQUIRE(fc.n_coefficients == 40);
  REQUIRE(fc.target_frames == 44);
  REQUIRE(fc.class_count == 3);
  CHECK(fc.entries[5].class_index == 1);
  CHECK(fc.entries[5].frames == 44);

  // spot-check one clip against the library mfcc on the decoded audio
  const int i = 7;
  const AudioClip clip =
      normalize_clip(load_wav(m.entries[i].path), cfg.sample_rate, 1.0);
  const Tensor direct = mfcc(clip, cfg);
  const float* stored = fc.matrix(i);
  for (int j = 0; j < 40 * 44; ++j)
    CHECK(stored[j] == static_cast<float>(direct.v[j]));

  const std::vector<double> mu = summarize_mean(mfcc_raw(clip, cfg));
  const float* stored_mu = fc.mean(i);
  for (int j = 0; j < 40; ++j)
    CHECK(stored_mu[j] == static_cast<float>(mu[j]));
}

TEST_CASE("feature cache file round-trips exactly") {
  const fs::path dir = fresh_dir("cache_rt");
  const DatasetManifest m = generate_synthetic_corpus(small_spec(), dir);
  const FeatureCache fc = build_feature_cache(m, small_cfg(), 1.0, ExecMode::OpenMP);

  const std::string path = (dir / "features.bin").string();
  write_feature_cache(fc, path);
  CHECK(fs::exists(path));
  CHECK(fs::exists(path + ".json"));

  const FeatureCache back = load_feature_cache(path);
  CHECK(back.n_coefficients == fc.n_coefficients);
  CHECK(back.target_frames == fc.target_frames);
  CHECK(back.class_count == fc.class_count);
  CHECK(back.class_labels == fc.class_labels);
  CHECK(back.matrices == fc.matrices);  // f32 payload must be bit-equal
  CHECK(back.means == fc.means);
  REQUIRE(back.entries.size() == fc.entries.size());
  for (size_t i = 0; i < fc.entries.size(); ++i) {
    CHECK(back.entries[i].path == fc.entries[i].path);
    CHECK(back.entries[i].class_index == fc.entries[i].class_index);
    CHECK(back.entries[i].class_label == fc.entries[i].class_label);
    CHECK(back.entries[i].frames == fc.entries[i].frames);
  }

  // writing twice produces identical bytes
  const std::string again = (dir / "features2.bin").string();
  write_feature_cache(fc, again);
  CHECK(file_bytes(path) == file_bytes(again));
  CHECK(file_bytes(path + ".json") == file_bytes(again + ".json"));
}

TEST_CASE("malformed cache files are rejected") {
  const fs::path dir = fresh_dir("cache_bad");
  const DatasetManifest m = generate_synthetic_corpus(small_spec(), dir);
  const FeatureCache fc = build_feature_cache(m, small_cfg(), 1.0, ExecMode::OpenMP);
  const std::string path = (dir / "features.bin").string();
  write_feature_cache(fc, path);

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_feature_cache((dir / "nope.bin").string()), IoFailure);
  }
  SUBCASE("bad magic") {
    std::string bytes = file_bytes(path);
    bytes[0] = 'X';
    std::ofstream(dir / "bad_magic.bin", std::ios::binary) << bytes;
    CHECK_THROWS_AS(load_feature_cache((dir / "bad_magic.bin").string()), BadCache);
  }
  SUBCASE("truncated payload") {
    std::string bytes = file_bytes(path);
    bytes.resize(bytes.size() / 2);
    std::ofstream(dir / "trunc.bin", std::ios::binary) << bytes;
    // sidecar must exist for the loader to even consider it
    fs::copy_file(path + ".json", dir / "trunc.bin.json");
    CHECK_THROWS_AS(load_feature_cache((dir / "trunc.bin").string()), BadCache);
  }
  SUBCASE("missing sidecar") {
    fs::copy_file(path, dir / "lonely.bin");
    // unopenable files are IO failures; BadCache is for readable-but-wrong
    CHECK_THROWS_AS(load_feature_cache((dir / "lonely.bin").string()), IoFailure);
  }
}

TEST_CASE("build_feature_cache names the failing clip") {
  DatasetManifest m;
  m.class_count = 1;
  m.class_labels = {"word_00"};
  m.entries.push_back({fs::path("/definitely/not/here.wav"), 0, "word_00"});
  try {
    build_feature_cache(m, small_cfg(), 1.0, ExecMode::Serial);
    FAIL("expected IoFailure");
  } catch (const IoFailure& e) {
    CHECK(std::string(e.what()).find("not/here.wav") != std::string::npos);
  }
}
