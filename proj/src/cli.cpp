#include "wordrec/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wordrec/dataset.hpp"
#include "wordrec/errors.hpp"
#include "wordrec/feature_cache.hpp"
#include "wordrec/mfcc.hpp"
#include "wordrec/model.hpp"
#include "wordrec/parallel.hpp"
#include "wordrec/report_io.hpp"
#include "wordrec/train.hpp"

namespace wordrec {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// Argument-level mistakes that CLI11 cannot see (config file contents,
// cross-flag constraints). Mapped to exit code 2 like any other usage error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One flat bag of options; the --config JSON mirrors these field names and
// explicit flags override whatever the file set.
struct Opts {
  bool verbose = false;
  bool serial = false;
  uint64_t seed = 7;

  // synth
  std::string out;  // synth corpus dir; also crossval single-model report path
  int classes = 20;
  int per_class = 50;
  int rate = 22050;
  double seconds = 1.0;
  double noise = 0.01;

  // featurize
  std::string data;
  std::string cache;
  int target_frames = 174;
  int fft_size = 2048;
  int hop = 512;
  int mel_bands = 128;
  int coeffs = 40;
  double fmin = 0.0;
  double fmax = -1.0;  // <0: use rate / 2

  // crossval
  std::string model = "all";
  int folds = 10;
  int epochs = -1;  // <0: per-architecture default
  std::string model_epochs;  // "id=N,id=N" overrides
  int batch = -1;   // <0: per-architecture default
  double dropout = 0.2;
  std::string out_dir = ".";
  std::string checkpoint_dir;
  bool timing = false;
  bool smoke = false;
};

ExecMode exec_mode(const Opts& o) { return o.serial ? ExecMode::Serial : ExecMode::OpenMP; }

void apply_config_file(const std::string& path, Opts& o) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const ordered_json::exception& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file " + path + ": expected a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const auto& v = it.value();
      if (k == "verbose") o.verbose = v.get<bool>();
      else if (k == "serial") o.serial = v.get<bool>();
      else if (k == "seed") o.seed = v.get<uint64_t>();
      else if (k == "out") o.out = v.get<std::string>();
      else if (k == "classes") o.classes = v.get<int>();
      else if (k == "per_class") o.per_class = v.get<int>();
      else if (k == "rate") o.rate = v.get<int>();
      else if (k == "seconds") o.seconds = v.get<double>();
      else if (k == "noise") o.noise = v.get<double>();
      else if (k == "data") o.data = v.get<std::string>();
      else if (k == "cache") o.cache = v.get<std::string>();
      else if (k == "target_frames") o.target_frames = v.get<int>();
      else if (k == "fft_size") o.fft_size = v.get<int>();
      else if (k == "hop") o.hop = v.get<int>();
      else if (k == "mel_bands") o.mel_bands = v.get<int>();
      else if (k == "coeffs") o.coeffs = v.get<int>();
      else if (k == "fmin") o.fmin = v.get<double>();
      else if (k == "fmax") o.fmax = v.get<double>();
      else if (k == "model") o.model = v.get<std::string>();
      else if (k == "folds") o.folds = v.get<int>();
      else if (k == "epochs") o.epochs = v.get<int>();
      else if (k == "model_epochs") o.model_epochs = v.get<std::string>();
      else if (k == "batch") o.batch = v.get<int>();
      else if (k == "dropout") o.dropout = v.get<double>();
      else if (k == "out_dir") o.out_dir = v.get<std::string>();
      else if (k == "checkpoint_dir") o.checkpoint_dir = v.get<std::string>();
      else if (k == "timing") o.timing = v.get<bool>();
      else if (k == "smoke") o.smoke = v.get<bool>();
      else throw UsageError("config file " + path + ": unknown key \"" + k + "\"");
    }
  } catch (const ordered_json::exception& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
}

MfccConfig mfcc_config(const Opts& o) {
  MfccConfig cfg;
  cfg.sample_rate = o.rate;
  cfg.fft_size = o.fft_size;
  cfg.hop_length = o.hop;
  cfg.mel_bands = o.mel_bands;
  cfg.n_coefficients = o.coeffs;
  cfg.target_frames = o.target_frames;
  cfg.fmin = o.fmin;
  cfg.fmax = o.fmax < 0.0 ? o.rate / 2.0 : o.fmax;
  return cfg;
}

int cmd_synth(const Opts& o) {
  if (o.out.empty()) throw UsageError("synth: --out is required");
  SynthSpec spec;
  spec.class_count = o.classes;
  spec.clips_per_class = o.per_class;
  spec.sample_rate = o.rate;
  spec.duration_seconds = o.seconds;
  spec.noise_level = o.noise;
  spec.seed = o.seed;
  const DatasetManifest m = generate_synthetic_corpus(spec, o.out, exec_mode(o));
  std::printf("synthesized %zu clips (%d classes x %d) -> %s\n", m.entries.size(),
              spec.class_count, spec.clips_per_class, o.out.c_str());
  return 0;
}

int cmd_featurize(const Opts& o) {
  if (o.data.empty()) throw UsageError("featurize: --data is required");
  if (o.cache.empty()) throw UsageError("featurize: --cache is required");
  const DatasetManifest m = scan_dataset(o.data);
  const MfccConfig cfg = mfcc_config(o);
  const FeatureCache fc = build_feature_cache(m, cfg, o.seconds, exec_mode(o));
  write_feature_cache(fc, o.cache);
  std::printf("featurized %d clips (%d coeffs x %d frames) -> %s\n", fc.clip_count(),
              fc.n_coefficients, fc.target_frames, o.cache.c_str());
  return 0;
}

// "--model-epochs lstm=30,cnn+lstm=25" -> {Lstm: 30, CnnLstm: 25}
std::map<Architecture, int> parse_model_epochs(const std::string& s) {
  std::map<Architecture, int> out;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    const std::string item = s.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.empty()) continue;
    const size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw UsageError("--model-epochs: expected id=N, got \"" + item + "\"");
    const Architecture a = parse_architecture(item.substr(0, eq));
    int n = 0;
    try {
      n = std::stoi(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("--model-epochs: bad epoch count in \"" + item + "\"");
    }
    if (n <= 0) throw UsageError("--model-epochs: epoch count must be positive");
    out[a] = n;
  }
  return out;
}

std::string sanitize_component(std::string s) {
  for (char& c : s)
    if (c == '/' || c == '\\') c = '_';
  return s;
}

int cmd_crossval(const Opts& opts_in, bool epochs_given) {
  Opts o = opts_in;
  fs::create_directories(o.out_dir);

  FeatureCache fc;
  if (o.smoke) {
    if (!o.cache.empty())
      throw UsageError("crossval: --smoke builds its own corpus; drop --cache");
    SynthSpec spec;
    spec.class_count = 4;
    spec.clips_per_class = 10;
    spec.sample_rate = o.rate;
    spec.duration_seconds = o.seconds;
    spec.noise_level = o.noise;
    spec.seed = o.seed;
    const std::string corpus = o.out_dir + "/smoke_corpus";
    const DatasetManifest m = generate_synthetic_corpus(spec, corpus, exec_mode(o));
    o.target_frames = 44;  // natural frame count of a 1 s clip at the default hop
    const MfccConfig cfg = mfcc_config(o);
    fc = build_feature_cache(m, cfg, o.seconds, exec_mode(o));
    write_feature_cache(fc, o.out_dir + "/smoke_features.bin");
    if (!epochs_given) o.epochs = 5;
    if (o.verbose) std::fprintf(stderr, "smoke corpus: %zu clips under %s\n",
                                m.entries.size(), corpus.c_str());
  } else {
    if (o.cache.empty()) throw UsageError("crossval: --cache is required (or --smoke)");
    fc = load_feature_cache(o.cache);
  }

  std::vector<Architecture> archs;
  if (o.model == "all")
    archs.assign(std::begin(kAllArchitectures), std::end(kAllArchitectures));
  else
    archs.push_back(parse_architecture(o.model));

  if (!o.out.empty() && archs.size() != 1)
    throw UsageError("crossval: --out names one report; use --out-dir with --model all");
  const std::map<Architecture, int> per_model_epochs = parse_model_epochs(o.model_epochs);
  if (!o.checkpoint_dir.empty()) fs::create_directories(o.checkpoint_dir);

  std::map<InputKind, FeatureSet> feature_sets;
  std::vector<CrossValReport> reports;
  for (const Architecture arch : archs) {
    const InputKind kind = input_kind(arch);
    if (!feature_sets.count(kind)) feature_sets.emplace(kind, prepare_features(fc, arch));
    const FeatureSet& data = feature_sets.at(kind);

    ModelSpec spec;
    spec.architecture = arch;
    spec.class_count = fc.class_count;
    spec.input_coefficients = fc.n_coefficients;
    spec.input_frames = fc.target_frames;
    spec.dropout_rate = o.dropout;
    spec.seed = o.seed;

    TrainConfig cfg = default_train_config(arch);
    cfg.seed = o.seed;
    if (o.epochs > 0) cfg.epochs = o.epochs;
    if (auto it = per_model_epochs.find(arch); it != per_model_epochs.end())
      cfg.epochs = it->second;
    if (o.batch > 0) cfg.batch_size = o.batch;

    const std::string id = architecture_id(arch);
    if (o.verbose)
      std::fprintf(stderr, "[%s] %d folds, %d epochs, batch %d\n", id.c_str(), o.folds,
                   cfg.epochs, cfg.batch_size);
    std::function<void(const FoldResult&)> on_fold;
    if (o.verbose)
      on_fold = [id](const FoldResult& fr) {
        std::fprintf(stderr, "  [%s fold %02d] train_acc=%.4f test_acc=%.4f test_loss=%.4f\n",
                     id.c_str(), fr.fold_index, fr.train_accuracy, fr.test_accuracy,
                     fr.test_loss);
      };

    const auto t0 = std::chrono::steady_clock::now();
    CrossValReport r =
        cross_validate(spec, data, o.folds, cfg, exec_mode(o), o.checkpoint_dir, on_fold);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.timing) r.wall_time_seconds = secs;

    std::string report_path = o.out_dir + "/report_" + sanitize_component(id) + ".json";
    if (!o.out.empty()) report_path = o.out;
    std::string csv_path = report_path;
    if (csv_path.size() > 5 && csv_path.substr(csv_path.size() - 5) == ".json")
      csv_path.resize(csv_path.size() - 5);
    csv_path += "_confusion.csv";
    write_report_json(r, report_path);
    write_confusion_csv(r.summed_confusion, data.class_labels, csv_path);

    std::printf("[%s] avg_test_acc=%.4f avg_test_loss=%.4f (%d folds in %.1fs) -> %s\n",
                id.c_str(), r.avg_test_accuracy, r.avg_test_loss, o.folds, secs,
                report_path.c_str());
    std::fflush(stdout);
    reports.push_back(std::move(r));
  }

  std::fputs(format_comparison_table(reports).c_str(), stdout);
  return 0;
}

int cmd_report(const Opts& o, const std::vector<std::string>& inputs) {
  if (inputs.empty()) throw UsageError("report: give at least one report JSON");
  std::vector<CrossValReport> reports;
  for (const std::string& path : inputs) reports.push_back(load_report_json(path));
  std::stable_sort(reports.begin(), reports.end(),
                   [](const CrossValReport& a, const CrossValReport& b) {
                     return a.avg_test_accuracy > b.avg_test_accuracy;
                   });
  std::fputs(format_comparison_table(reports).c_str(), stdout);

  fs::create_directories(o.out_dir);
  std::set<std::string> used;
  for (const CrossValReport& r : reports) {
    std::string base = "confusion_" + sanitize_component(r.model_id);
    std::string name = base;
    for (int i = 2; used.count(name); ++i) name = base + "_" + std::to_string(i);
    used.insert(name);
    const std::string path = o.out_dir + "/" + name + ".csv";
    write_confusion_csv(r.summed_confusion, {}, path);
    if (o.verbose) std::fprintf(stderr, "wrote %s\n", path.c_str());
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  Opts o;

  // The config file seeds the defaults, so it has to be read before CLI11
  // binds flag values; explicit flags then override it.
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) config_path = argv[i + 1];
    else if (a.rfind("--config=", 0) == 0) config_path = a.substr(9);
  }
  try {
    if (!config_path.empty()) apply_config_file(config_path, o);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  CLI::App app{"isolated-word speech recognition: synthetic corpus, MFCC features, "
               "cross-validated neural models"};
  app.require_subcommand(1);
  std::string config_dummy;
  app.add_option("--config", config_dummy, "JSON file of option defaults");
  app.add_flag("--verbose", o.verbose, "per-fold progress on stderr");

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic word corpus");
  synth->add_option("--out", o.out, "corpus output directory");
  synth->add_option("--classes", o.classes, "number of word classes");
  synth->add_option("--per-class", o.per_class, "clips per class");
  synth->add_option("--rate", o.rate, "sample rate in Hz");
  synth->add_option("--seconds", o.seconds, "clip length in seconds");
  synth->add_option("--noise", o.noise, "additive noise amplitude");
  synth->add_option("--seed", o.seed, "corpus seed");
  synth->add_flag("--serial", o.serial, "disable parallel synthesis");

  CLI::App* feat = app.add_subcommand("featurize", "extract MFCC features to a cache file");
  feat->add_option("--data", o.data, "dataset root (class subdirectories of WAVs)");
  feat->add_option("--cache", o.cache, "feature cache output path");
  feat->add_option("--target-frames", o.target_frames, "pad/truncate frame count");
  feat->add_option("--fft-size", o.fft_size, "FFT size (power of two)");
  feat->add_option("--hop", o.hop, "hop length in samples");
  feat->add_option("--mel-bands", o.mel_bands, "mel filterbank size");
  feat->add_option("--coeffs", o.coeffs, "MFCC coefficients kept");
  feat->add_option("--rate", o.rate, "resample rate in Hz");
  feat->add_option("--seconds", o.seconds, "normalized clip length");
  feat->add_option("--fmin", o.fmin, "filterbank minimum frequency");
  feat->add_option("--fmax", o.fmax, "filterbank maximum frequency (default rate/2)");
  feat->add_flag("--serial", o.serial, "disable parallel extraction");

  CLI::App* cv = app.add_subcommand("crossval", "k-fold cross-validate one or all models");
  cv->add_option("--cache", o.cache, "feature cache from featurize");
  cv->add_option("--model", o.model, "mlp|cnn|lstm|cnn+lstm|cnn+blstm|all");
  cv->add_option("--folds", o.folds, "fold count");
  cv->add_option("--seed", o.seed, "master seed (fold i reseeds as seed+i)");
  auto* epochs_opt = cv->add_option("--epochs", o.epochs, "override epoch count for every model");
  cv->add_option("--model-epochs", o.model_epochs, "per-model overrides, e.g. lstm=30,cnn=20");
  cv->add_option("--batch", o.batch, "override batch size");
  cv->add_option("--dropout", o.dropout, "dropout rate");
  cv->add_option("--out", o.out, "report path (single model only)");
  cv->add_option("--out-dir", o.out_dir, "directory for report_<model>.json files");
  cv->add_option("--checkpoint-dir", o.checkpoint_dir, "save per-fold checkpoints here");
  cv->add_flag("--timing", o.timing, "record wall time in the report (breaks byte determinism)");
  cv->add_flag("--smoke", o.smoke, "self-contained small corpus run (4 classes x 10 clips)");
  cv->add_flag("--serial", o.serial, "single-threaded training and evaluation");

  CLI::App* rep = app.add_subcommand("report", "compare saved report JSONs");
  std::vector<std::string> report_inputs;
  rep->add_option("reports", report_inputs, "report JSON files");
  rep->add_option("--out-dir", o.out_dir, "directory for confusion CSVs");

  for (CLI::App* s : {synth, feat, cv, rep}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(o);
    if (feat->parsed()) return cmd_featurize(o);
    if (cv->parsed()) return cmd_crossval(o, epochs_opt->count() > 0);
    if (rep->parsed()) return cmd_report(o, report_inputs);
    return 2;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const UnknownArchitecture& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const InvalidConfig& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace wordrec
