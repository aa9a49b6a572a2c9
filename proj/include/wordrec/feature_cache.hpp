#pragma once

#include <string>
#include <vector>

#include "wordrec/dataset.hpp"
#include "wordrec/mfcc.hpp"
#include "wordrec/parallel.hpp"

namespace wordrec {

// Extracted features for one corpus, stored f32. Matrices are the padded
// (n_coefficients, target_frames) inputs for the 2-D models; means are the
// per-coefficient averages over each clip's true frames (the 1-D model input),
// kept separately because padding must not bias them.
struct FeatureCacheEntry {
  std::string path;
  int class_index = 0;
  std::string class_label;
  int frames = 0;  // frame count before padding/truncation
};

struct FeatureCache {
  int n_coefficients = 0;
  int target_frames = 0;
  int class_count = 0;
  std::vector<std::string> class_labels;
  std::vector<FeatureCacheEntry> entries;
  std::vector<float> matrices;  // entries.size() * n_coefficients * target_frames
  std::vector<float> means;     // entries.size() * n_coefficients

  int clip_count() const { return static_cast<int>(entries.size()); }
  const float* matrix(int i) const {
    return matrices.data() + static_cast<size_t>(i) * n_coefficients * target_frames;
  }
  const float* mean(int i) const {
    return means.data() + static_cast<size_t>(i) * n_coefficients;
  }
  void validate() const;  // throws BadCache on inconsistent sizes
};

// Decode + normalize every manifest clip to (cfg.sample_rate, clip_seconds)
// and extract features. Clips may be processed in parallel; output is
// identical either way.
FeatureCache build_feature_cache(const DatasetManifest& manifest, const MfccConfig& cfg,
                                 double clip_seconds, ExecMode mode);

// Binary cache file plus a <path>.json sidecar with the index -> clip mapping.
void write_feature_cache(const FeatureCache& cache, const std::string& path);
FeatureCache load_feature_cache(const std::string& path);

}  // namespace wordrec
