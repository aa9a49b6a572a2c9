#include "wordrec/model.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>

#include "wordrec/binio.hpp"
#include "wordrec/errors.hpp"

namespace wordrec {

namespace fs = std::filesystem;

std::string architecture_id(Architecture a) {
  switch (a) {
    case Architecture::Mlp: return "mlp";
    case Architecture::Cnn: return "cnn";
    case Architecture::Lstm: return "lstm";
    case Architecture::CnnLstm: return "cnn+lstm";
    case Architecture::CnnBlstm: return "cnn+blstm";
  }
  throw UnknownArchitecture("unmapped architecture enum value");
}

Architecture parse_architecture(const std::string& id) {
  for (Architecture a : kAllArchitectures)
    if (architecture_id(a) == id) return a;
  throw UnknownArchitecture("unknown architecture id: '" + id +
                            "' (expected mlp, cnn, lstm, cnn+lstm or cnn+blstm)");
}

void ModelSpec::validate() const {
  if (class_count < 2) throw InvalidConfig("class_count must be >= 2");
  if (input_coefficients < 1 || input_frames < 1)
    throw InvalidConfig("input dimensions must be positive");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw InvalidConfig("dropout_rate must be in [0, 1)");
}

std::vector<Tensor*> Model::params() {
  std::vector<Tensor*> out;
  for (auto& l : layers)
    for (Tensor* p : l->params()) out.push_back(p);
  return out;
}

std::vector<const Tensor*> Model::params() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers)
    for (const Tensor* p : l->params()) out.push_back(p);
  return out;
}

std::vector<std::string> Model::param_names() const {
  std::vector<std::string> out;
  for (size_t i = 0; i < layers.size(); ++i) {
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "L%02zu.", i);
    for (const std::string& n : layers[i]->param_names())
      out.push_back(prefix + layers[i]->kind() + "." + n);
  }
  return out;
}

long Model::param_count() const {
  long n = 0;
  for (const Tensor* p : params()) n += p->numel();
  return n;
}

std::vector<Tensor> Model::make_grads() const {
  std::vector<Tensor> g;
  for (const Tensor* p : params()) g.emplace_back(p->shape);
  return g;
}

Tensor Model::forward(const Tensor& x, nn::Mode mode, Rng* rng,
                      std::vector<std::vector<Tensor>>* caches) const {
  if (caches) {
    caches->clear();
    caches->resize(layers.size());
  }
  std::vector<Tensor> scratch;
  Tensor cur = x;
  for (size_t i = 0; i < layers.size(); ++i) {
    std::vector<Tensor>& cache = caches ? (*caches)[i] : scratch;
    cur = layers[i]->forward(cur, cache, mode, rng);
    if (!caches) scratch.clear();
  }
  return cur;
}

void Model::backward(const Tensor& glogits, const std::vector<std::vector<Tensor>>& caches,
                     std::vector<Tensor>& grads) const {
  check_shape(caches.size() == layers.size(), "model backward: cache list mismatch");
  // per-layer grad slice offsets in flat params() order
  std::vector<size_t> offset(layers.size() + 1, 0);
  for (size_t i = 0; i < layers.size(); ++i)
    offset[i + 1] = offset[i] + layers[i]->params().size();
  check_shape(grads.size() == offset.back(), "model backward: gradient buffer mismatch");

  Tensor g = glogits;
  for (size_t i = layers.size(); i-- > 0;) {
    std::span<Tensor> slice(grads.data() + offset[i], offset[i + 1] - offset[i]);
    g = layers[i]->backward(g, caches[i], slice);
  }
}

namespace {

struct ConvChain {
  int h, w;  // spatial extents after the block list
};

// Applies conv(2x2) then optional pool(2) four times, validating extents.
ConvChain conv_pyramid(int h, int w, bool pool_last, const char* arch) {
  for (int block = 0; block < 4; ++block) {
    if (h < 2 || w < 2)
      throw UnsupportedShape(std::string(arch) + ": input too small for conv block " +
                             std::to_string(block + 1));
    h -= 1;
    w -= 1;  // 2x2 valid conv
    const bool pool = block < 3 || pool_last;
    if (pool) {
      if (h < 2 || w < 2)
        throw UnsupportedShape(std::string(arch) + ": input too small for pool after block " +
                               std::to_string(block + 1));
      h /= 2;
      w /= 2;
    }
  }
  return {h, w};
}

}  // namespace

Model build_model(const ModelSpec& spec) {
  spec.validate();
  Model m;
  m.spec = spec;
  const int coeffs = spec.input_coefficients;
  const int frames = spec.input_frames;
  const double rate = spec.dropout_rate;
  auto& L = m.layers;

  switch (spec.architecture) {
    case Architecture::Mlp: {
      L.push_back(std::make_unique<nn::Dense>(coeffs, 300));
      L.push_back(std::make_unique<nn::Relu>());
      L.push_back(std::make_unique<nn::Dropout>(rate));
      L.push_back(std::make_unique<nn::Dense>(300, 300));
      L.push_back(std::make_unique<nn::Relu>());
      L.push_back(std::make_unique<nn::Dropout>(rate));
      L.push_back(std::make_unique<nn::Dense>(300, spec.class_count));
      break;
    }
    case Architecture::Cnn: {
      conv_pyramid(coeffs, frames, /*pool_last=*/false, "cnn");  // validates extents
      int ch = 1;
      for (int c_out : {16, 32, 64, 128}) {
        L.push_back(std::make_unique<nn::Conv2d>(ch, c_out, 2, 2));
        L.push_back(std::make_unique<nn::Relu>());
        if (c_out != 128)
          L.push_back(std::make_unique<nn::MaxPool2>());
        else
          L.push_back(std::make_unique<nn::GlobalAvgPool>());
        L.push_back(std::make_unique<nn::Dropout>(rate));
        ch = c_out;
      }
      L.push_back(std::make_unique<nn::Dense>(128, spec.class_count));
      break;
    }
    case Architecture::Lstm: {
      L.push_back(std::make_unique<nn::Lstm>(coeffs, 64, /*return_sequences=*/true));
      L.push_back(std::make_unique<nn::Dropout>(rate));
      L.push_back(std::make_unique<nn::Flatten>());
      L.push_back(std::make_unique<nn::Dense>(frames * 64, spec.class_count));
      break;
    }
    case Architecture::CnnLstm: {
      const ConvChain cc = conv_pyramid(coeffs, frames, /*pool_last=*/true, "cnn+lstm");
      int ch = 1;
      for (int c_out : {16, 32, 64, 128}) {
        L.push_back(std::make_unique<nn::Conv2d>(ch, c_out, 2, 2));
        L.push_back(std::make_unique<nn::Relu>());
        L.push_back(std::make_unique<nn::MaxPool2>());
        L.push_back(std::make_unique<nn::Dropout>(rate));
        ch = c_out;
      }
      L.push_back(std::make_unique<nn::MapToSequence>());  // (128, h, w) -> (w, 128h)
      L.push_back(std::make_unique<nn::Lstm>(128 * cc.h, 64, /*return_sequences=*/false));
      L.push_back(std::make_unique<nn::Dense>(64, 64));
      L.push_back(std::make_unique<nn::Relu>());
      L.push_back(std::make_unique<nn::Dense>(64, spec.class_count));
      break;
    }
    case Architecture::CnnBlstm: {
      const ConvChain cc = conv_pyramid(coeffs, frames, /*pool_last=*/true, "cnn+blstm");
      int ch = 1;
      for (int c_out : {16, 32, 64, 128}) {
        L.push_back(std::make_unique<nn::Conv2d>(ch, c_out, 2, 2));
        L.push_back(std::make_unique<nn::Relu>());
        L.push_back(std::make_unique<nn::MaxPool2>());
        L.push_back(std::make_unique<nn::Dropout>(rate));
        ch = c_out;
      }
      L.push_back(std::make_unique<nn::MapToSequence>());
      L.push_back(std::make_unique<nn::Blstm>(128 * cc.h, 64));
      L.push_back(std::make_unique<nn::Flatten>());  // (w, 128) -> 128w
      L.push_back(std::make_unique<nn::Dense>(cc.w * 128, spec.class_count));
      break;
    }
  }

  Rng rng(mix_seed(spec.seed, seed_stream::kParamInit));
  for (auto& layer : m.layers) layer->init_params(rng);
  return m;
}

Prediction predict(const Model& model, const Tensor& features) {
  const Tensor logits = model.forward(features, nn::Mode::Infer, nullptr, nullptr);
  Prediction p;
  p.probabilities = nn::softmax(logits);
  p.class_index = 0;
  for (int i = 1; i < p.probabilities.numel(); ++i)
    if (p.probabilities.at(i) > p.probabilities.at(p.class_index)) p.class_index = i;
  return p;
}

// ---------------------------------------------------------------- checkpoints

namespace {
constexpr char kMagic[4] = {'W', 'R', 'C', 'K'};
constexpr uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(const Model& model, const std::string& path) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoFailure("cannot open for write: " + tmp.string());
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    put_string(os, architecture_id(model.spec.architecture));
    put_u32(os, static_cast<uint32_t>(model.spec.class_count));
    put_u32(os, static_cast<uint32_t>(model.spec.input_coefficients));
    put_u32(os, static_cast<uint32_t>(model.spec.input_frames));
    put_f64(os, model.spec.dropout_rate);
    put_u64(os, model.spec.seed);

    const auto params = model.params();
    const auto names = model.param_names();
    put_u32(os, static_cast<uint32_t>(params.size()));
    for (size_t i = 0; i < params.size(); ++i) {
      put_string(os, names[i]);
      put_u32(os, static_cast<uint32_t>(params[i]->rank()));
      for (int d : params[i]->shape) put_u32(os, static_cast<uint32_t>(d));
      for (double v : params[i]->v) put_f64(os, v);
    }
    if (!os) throw IoFailure("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("cannot open checkpoint: " + path);
  try {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
      throw BadCheckpoint("bad checkpoint magic: " + path);
    const uint32_t version = get_u32(is, "version");
    if (version != kVersion)
      throw BadCheckpoint("unsupported checkpoint version " + std::to_string(version));

    ModelSpec spec;
    spec.architecture = parse_architecture(get_string(is, "architecture"));
    spec.class_count = static_cast<int>(get_u32(is, "class_count"));
    spec.input_coefficients = static_cast<int>(get_u32(is, "input_coefficients"));
    spec.input_frames = static_cast<int>(get_u32(is, "input_frames"));
    spec.dropout_rate = get_f64(is, "dropout_rate");
    spec.seed = get_u64(is, "seed");

    Model model = build_model(spec);
    auto params = model.params();
    const auto names = model.param_names();
    const uint32_t count = get_u32(is, "tensor count");
    if (count != params.size())
      throw BadCheckpoint("checkpoint tensor count does not match architecture");
    for (uint32_t i = 0; i < count; ++i) {
      const std::string name = get_string(is, "tensor name");
      if (name != names[i])
        throw BadCheckpoint("unexpected tensor '" + name + "' (wanted '" + names[i] + "')");
      const uint32_t rank = get_u32(is, "tensor rank");
      std::vector<int> shape(rank);
      for (uint32_t d = 0; d < rank; ++d) shape[d] = static_cast<int>(get_u32(is, "tensor dim"));
      if (shape != params[i]->shape) throw BadCheckpoint("shape mismatch for tensor " + name);
      for (double& v : params[i]->v) v = get_f64(is, "tensor data");
    }
    return model;
  } catch (const MalformedContainer& ex) {
    throw BadCheckpoint(std::string("checkpoint parse failed: ") + ex.what());
  }
}

}  // namespace wordrec
