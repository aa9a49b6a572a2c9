#include "wordrec/feature_cache.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "wordrec/errors.hpp"

namespace wordrec {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

static_assert(sizeof(float) == 4, "cache format assumes 32-bit float");

namespace {

constexpr char kMagic[4] = {'W', 'R', 'F', 'C'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw BadCache("truncated cache header");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void FeatureCache::validate() const {
  if (n_coefficients <= 0 || target_frames <= 0) throw BadCache("non-positive feature dimensions");
  if (class_count <= 0 || static_cast<int>(class_labels.size()) != class_count)
    throw BadCache("class label list does not match class_count");
  const size_t n = entries.size();
  if (n == 0) throw BadCache("cache holds no clips");
  if (matrices.size() != n * n_coefficients * target_frames)
    throw BadCache("matrix block size mismatch");
  if (means.size() != n * n_coefficients) throw BadCache("mean block size mismatch");
  for (const auto& e : entries)
    if (e.class_index < 0 || e.class_index >= class_count)
      throw BadCache("entry class_index out of range");
}

FeatureCache build_feature_cache(const DatasetManifest& manifest, const MfccConfig& cfg,
                                 double clip_seconds, ExecMode mode) {
  cfg.validate();
  if (!(clip_seconds > 0.0)) throw InvalidConfig("clip_seconds must be positive");
  if (manifest.entries.empty()) throw EmptyDataset("manifest holds no clips");

  FeatureCache cache;
  cache.n_coefficients = cfg.n_coefficients;
  cache.target_frames = cfg.target_frames;
  cache.class_count = manifest.class_count;
  cache.class_labels = manifest.class_labels;

  const int n = static_cast<int>(manifest.entries.size());
  cache.entries.resize(n);
  cache.matrices.resize(static_cast<size_t>(n) * cfg.n_coefficients * cfg.target_frames);
  cache.means.resize(static_cast<size_t>(n) * cfg.n_coefficients);

  std::vector<std::string> failures(n);
  parallel_for(n, mode, [&](int i) {
    const ManifestEntry& src = manifest.entries[i];
    try {
      AudioClip clip = load_wav(src.path);
      clip = normalize_clip(clip, cfg.sample_rate, clip_seconds);
      const Tensor raw = mfcc_raw(clip, cfg);
      const Tensor fixed = fix_frames(raw, cfg.target_frames);
      const std::vector<double> mean = summarize_mean(raw);

      FeatureCacheEntry& e = cache.entries[i];
      e.path = src.path;
      e.class_index = src.class_index;
      e.class_label = src.class_label;
      e.frames = raw.dim(1);

      float* m = cache.matrices.data() +
                 static_cast<size_t>(i) * cfg.n_coefficients * cfg.target_frames;
      for (size_t j = 0; j < fixed.v.size(); ++j) m[j] = static_cast<float>(fixed.v[j]);
      float* mu = cache.means.data() + static_cast<size_t>(i) * cfg.n_coefficients;
      for (int j = 0; j < cfg.n_coefficients; ++j) mu[j] = static_cast<float>(mean[j]);
    } catch (const std::exception& ex) {
      failures[i] = ex.what();
    }
  });

  for (int i = 0; i < n; ++i)
    if (!failures[i].empty())
      throw IoFailure("feature extraction failed on " + manifest.entries[i].path.string() +
                      ": " + failures[i]);
  cache.validate();
  return cache;
}

void write_feature_cache(const FeatureCache& cache, const std::string& path) {
  cache.validate();
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());

  // temp file + rename so a crashed run never leaves a half-written cache
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoFailure("cannot open for write: " + tmp.string());
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    put_u32(os, static_cast<uint32_t>(cache.n_coefficients));
    put_u32(os, static_cast<uint32_t>(cache.target_frames));
    put_u32(os, static_cast<uint32_t>(cache.entries.size()));
    os.write(reinterpret_cast<const char*>(cache.matrices.data()),
             static_cast<std::streamsize>(cache.matrices.size() * sizeof(float)));
    os.write(reinterpret_cast<const char*>(cache.means.data()),
             static_cast<std::streamsize>(cache.means.size() * sizeof(float)));
    if (!os) throw IoFailure("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);

  ordered_json side;
  side["version"] = kVersion;
  side["class_count"] = cache.class_count;
  side["class_labels"] = cache.class_labels;
  side["entries"] = ordered_json::array();
  for (size_t i = 0; i < cache.entries.size(); ++i) {
    const FeatureCacheEntry& e = cache.entries[i];
    side["entries"].push_back({{"index", i},
                               {"path", e.path},
                               {"class_index", e.class_index},
                               {"class_label", e.class_label},
                               {"frames", e.frames}});
  }
  const fs::path side_tmp = target.string() + ".json.tmp";
  {
    std::ofstream os(side_tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoFailure("cannot open for write: " + side_tmp.string());
    os << side.dump(2) << '\n';
    if (!os) throw IoFailure("write failed: " + side_tmp.string());
  }
  fs::rename(side_tmp, target.string() + ".json");
}

FeatureCache load_feature_cache(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("cannot open cache: " + path);

  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw BadCache("bad cache magic: " + path);
  const uint32_t version = get_u32(is);
  if (version != kVersion)
    throw BadCache("unsupported cache version " + std::to_string(version));

  FeatureCache cache;
  cache.n_coefficients = static_cast<int>(get_u32(is));
  cache.target_frames = static_cast<int>(get_u32(is));
  const uint32_t count = get_u32(is);
  if (cache.n_coefficients <= 0 || cache.target_frames <= 0 || count == 0)
    throw BadCache("degenerate cache dimensions in " + path);

  cache.matrices.resize(static_cast<size_t>(count) * cache.n_coefficients * cache.target_frames);
  cache.means.resize(static_cast<size_t>(count) * cache.n_coefficients);
  is.read(reinterpret_cast<char*>(cache.matrices.data()),
          static_cast<std::streamsize>(cache.matrices.size() * sizeof(float)));
  is.read(reinterpret_cast<char*>(cache.means.data()),
          static_cast<std::streamsize>(cache.means.size() * sizeof(float)));
  if (!is) throw BadCache("cache data truncated: " + path);

  const std::string side_path = path + ".json";
  std::ifstream side_is(side_path, std::ios::binary);
  if (!side_is) throw IoFailure("cannot open cache sidecar: " + side_path);
  ordered_json side;
  try {
    side_is >> side;
  } catch (const nlohmann::json::exception& ex) {
    throw BadCache("cache sidecar is not valid JSON: " + std::string(ex.what()));
  }
  try {
    cache.class_count = side.at("class_count").get<int>();
    cache.class_labels = side.at("class_labels").get<std::vector<std::string>>();
    const auto& entries = side.at("entries");
    if (entries.size() != count) throw BadCache("sidecar entry count does not match cache");
    cache.entries.resize(count);
    for (size_t i = 0; i < count; ++i) {
      const auto& e = entries.at(i);
      if (e.at("index").get<size_t>() != i) throw BadCache("sidecar entries out of order");
      cache.entries[i].path = e.at("path").get<std::string>();
      cache.entries[i].class_index = e.at("class_index").get<int>();
      cache.entries[i].class_label = e.at("class_label").get<std::string>();
      cache.entries[i].frames = e.at("frames").get<int>();
    }
  } catch (const nlohmann::json::exception& ex) {
    throw BadCache("cache sidecar missing fields: " + std::string(ex.what()));
  }
  cache.validate();
  return cache;
}

}  // namespace wordrec
