#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wordrec/parallel.hpp"

namespace wordrec {

struct ManifestEntry {
  std::filesystem::path path;
  int class_index = 0;
  std::string class_label;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  int class_count = 0;
  std::vector<std::string> class_labels;  // index -> label
};

// Natural-order comparison: digit runs compare by numeric value, so
// "fold 2" < "fold 10". Ties broken bytewise.
bool natural_less(const std::string& a, const std::string& b);

// One class per subdirectory of root; class indices follow natural-sorted
// directory names; *.wav files (case-insensitive extension) in natural order.
DatasetManifest scan_dataset(const std::filesystem::path& root);

void write_manifest_json(const DatasetManifest& manifest, const std::filesystem::path& out);

struct SynthSpec {
  int class_count = 20;
  int clips_per_class = 50;
  int sample_rate = 22050;
  double duration_seconds = 1.0;
  double noise_level = 0.01;  // linear amplitude of additive white noise
  uint64_t seed = 7;

  void validate() const;
};

// Class k's base formant pair. Geometric spacing keeps the +-3% per-clip
// jitter ranges of adjacent classes disjoint, so classes stay separable.
double synth_formant1_hz(int class_index);
double synth_formant2_hz(int class_index);

// Renders the clip for (class k, clip i) under spec.seed. Pure function.
std::vector<double> synth_clip_samples(const SynthSpec& spec, int class_index, int clip_index);

// Writes class_count directories of clips_per_class PCM16 WAV files plus a
// manifest.json. Bit-deterministic in (spec, seed).
DatasetManifest generate_synthetic_corpus(const SynthSpec& spec,
                                          const std::filesystem::path& out_dir,
                                          ExecMode mode = ExecMode::OpenMP);

}  // namespace wordrec
