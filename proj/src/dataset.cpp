// Dataset scanning and the deterministic synthetic corpus.

#include "wordrec/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "wordrec/audio.hpp"
#include "wordrec/errors.hpp"
#include "wordrec/rng.hpp"

namespace wordrec {

namespace fs = std::filesystem;

bool natural_less(const std::string& a, const std::string& b) {
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    unsigned char ca = static_cast<unsigned char>(a[i]);
    unsigned char cb = static_cast<unsigned char>(b[j]);
    if (std::isdigit(ca) && std::isdigit(cb)) {
      size_t i2 = i, j2 = j;
      while (i2 < a.size() && std::isdigit(static_cast<unsigned char>(a[i2]))) ++i2;
      while (j2 < b.size() && std::isdigit(static_cast<unsigned char>(b[j2]))) ++j2;
      // compare numeric value: skip leading zeros, then by length, then bytes
      size_t ia = i, jb = j;
      while (ia < i2 - 1 && a[ia] == '0') ++ia;
      while (jb < j2 - 1 && b[jb] == '0') ++jb;
      size_t la = i2 - ia, lb = j2 - jb;
      if (la != lb) return la < lb;
      int cmp = a.compare(ia, la, b, jb, lb);
      if (cmp != 0) return cmp < 0;
      i = i2;
      j = j2;
    } else {
      if (ca != cb) return ca < cb;
      ++i;
      ++j;
    }
  }
  return (a.size() - i) < (b.size() - j);
}

namespace {

bool has_wav_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".wav";
}

}  // namespace

DatasetManifest scan_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw EmptyDataset("dataset root is not a directory: " + root.string());

  std::vector<std::string> class_dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) class_dirs.push_back(e.path().filename().string());
  }
  if (class_dirs.empty()) throw EmptyDataset("no class subdirectories in " + root.string());
  std::sort(class_dirs.begin(), class_dirs.end(), natural_less);

  DatasetManifest manifest;
  manifest.class_count = static_cast<int>(class_dirs.size());
  manifest.class_labels = class_dirs;
  for (int k = 0; k < manifest.class_count; ++k) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(root / class_dirs[k])) {
      if (e.is_regular_file() && has_wav_extension(e.path()))
        files.push_back(e.path().filename().string());
    }
    if (files.empty()) throw EmptyClass("class directory has no WAV files: " + class_dirs[k]);
    std::sort(files.begin(), files.end(), natural_less);
    for (const auto& f : files)
      manifest.entries.push_back({root / class_dirs[k] / f, k, class_dirs[k]});
  }
  return manifest;
}

void write_manifest_json(const DatasetManifest& manifest, const fs::path& out) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : manifest.entries) {
    arr.push_back({{"path", e.path.generic_string()},
                   {"class_index", e.class_index},
                   {"class_label", e.class_label}});
  }
  std::ofstream os(out);
  if (!os) throw IoFailure("cannot write " + out.string());
  os << arr.dump(2) << "\n";
}

void SynthSpec::validate() const {
  if (class_count < 2) throw InvalidConfig("synth: class_count must be >= 2");
  if (clips_per_class < 2) throw InvalidConfig("synth: clips_per_class must be >= 2");
  if (sample_rate <= 0) throw InvalidConfig("synth: sample_rate must be positive");
  if (duration_seconds <= 0.0) throw InvalidConfig("synth: duration must be positive");
  if (noise_level < 0.0) throw InvalidConfig("synth: noise_level must be >= 0");
}

// Ratio 1.1 per class: adjacent +-3% jitter bands stay disjoint
// (1.03 < 0.97 * 1.1), so no two classes can emit the same formant pair.
double synth_formant1_hz(int class_index) { return 300.0 * std::pow(1.1, class_index); }
double synth_formant2_hz(int class_index) { return 1200.0 * std::pow(1.1, class_index); }

std::vector<double> synth_clip_samples(const SynthSpec& spec, int class_index, int clip_index) {
  const int n = static_cast<int>(std::llround(spec.sample_rate * spec.duration_seconds));
  Rng rng(mix_seed(spec.seed, static_cast<uint64_t>(class_index),
                   static_cast<uint64_t>(clip_index)));

  const double jitter1 = rng.uniform(-0.03, 0.03);
  const double jitter2 = rng.uniform(-0.03, 0.03);
  const double f1 = synth_formant1_hz(class_index) * (1.0 + jitter1);
  const double f2 = synth_formant2_hz(class_index) * (1.0 + jitter2);
  const double phase1 = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double phase2 = rng.uniform(0.0, 2.0 * std::numbers::pi);

  const double attack = 0.05 * spec.duration_seconds;
  const double release = 0.10 * spec.duration_seconds;
  const double w1 = 2.0 * std::numbers::pi * f1 / spec.sample_rate;
  const double w2 = 2.0 * std::numbers::pi * f2 / spec.sample_rate;

  std::vector<double> s(static_cast<size_t>(n));
  for (int t = 0; t < n; ++t) {
    const double sec = static_cast<double>(t) / spec.sample_rate;
    const double remain = spec.duration_seconds - sec;
    double env = 1.0;
    if (sec < attack) env *= 0.5 - 0.5 * std::cos(std::numbers::pi * sec / attack);
    if (remain < release) env *= 0.5 - 0.5 * std::cos(std::numbers::pi * remain / release);
    double x = 0.55 * std::sin(w1 * t + phase1) + 0.30 * std::sin(w2 * t + phase2);
    x = 0.9 * env * x;
    if (spec.noise_level > 0.0) x += rng.uniform(-spec.noise_level, spec.noise_level);
    s[static_cast<size_t>(t)] = std::clamp(x, -1.0, 1.0);
  }
  return s;
}

DatasetManifest generate_synthetic_corpus(const SynthSpec& spec, const fs::path& out_dir,
                                          ExecMode mode) {
  spec.validate();

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoFailure("cannot create " + out_dir.string());

  DatasetManifest manifest;
  manifest.class_count = spec.class_count;
  char label[32];
  for (int k = 0; k < spec.class_count; ++k) {
    std::snprintf(label, sizeof(label), "word_%02d", k);
    manifest.class_labels.emplace_back(label);
    fs::create_directories(out_dir / label, ec);
    if (ec) throw IoFailure("cannot create class directory " + std::string(label));
    for (int i = 0; i < spec.clips_per_class; ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "clip_%04d.wav", i);
      manifest.entries.push_back({out_dir / label / name, k, label});
    }
  }

  const int total = static_cast<int>(manifest.entries.size());
  std::vector<std::string> failures(static_cast<size_t>(total));
  parallel_for(total, mode, [&](int idx) {
    const int k = idx / spec.clips_per_class;
    const int i = idx % spec.clips_per_class;
    try {
      AudioClip clip{synth_clip_samples(spec, k, i), spec.sample_rate};
      write_wav_pcm16(manifest.entries[static_cast<size_t>(idx)].path, clip);
    } catch (const std::exception& e) {
      failures[static_cast<size_t>(idx)] = e.what();
    }
  });
  for (const auto& msg : failures)
    if (!msg.empty()) throw IoFailure("synth: " + msg);

  write_manifest_json(manifest, out_dir / "manifest.json");
  return manifest;
}

}  // namespace wordrec
