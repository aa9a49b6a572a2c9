#include "wordrec/report_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "wordrec/errors.hpp"

namespace wordrec {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json confusion_to_json(const std::vector<std::vector<long>>& m) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : m) rows.push_back(r);
  return rows;
}

std::vector<std::vector<long>> confusion_from_json(const ordered_json& j, const char* what) {
  if (!j.is_array()) throw MalformedReport(std::string(what) + " must be a matrix");
  std::vector<std::vector<long>> m;
  for (const auto& row : j) {
    if (!row.is_array()) throw MalformedReport(std::string(what) + " must be a matrix");
    m.push_back(row.get<std::vector<long>>());
  }
  for (const auto& row : m)
    if (row.size() != m.size())
      throw MalformedReport(std::string(what) + " must be square");
  return m;
}

void atomic_write(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoFailure("cannot open for write: " + tmp.string());
    os << content;
    if (!os) throw IoFailure("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string report_to_json_string(const CrossValReport& r) {
  ordered_json j;
  j["model"] = r.model_id;
  j["seed"] = r.seed;
  j["folds"] = ordered_json::array();
  for (const FoldResult& f : r.folds) {
    ordered_json jf;
    jf["fold"] = f.fold_index;
    jf["train_acc"] = f.train_accuracy;
    jf["train_loss"] = f.train_loss;
    jf["test_acc"] = f.test_accuracy;
    jf["test_loss"] = f.test_loss;
    jf["confusion"] = confusion_to_json(f.confusion);
    j["folds"].push_back(std::move(jf));
  }
  j["averages"] = {{"train_acc", r.avg_train_accuracy},
                   {"train_loss", r.avg_train_loss},
                   {"test_acc", r.avg_test_accuracy},
                   {"test_loss", r.avg_test_loss}};
  j["summed_confusion"] = confusion_to_json(r.summed_confusion);
  if (r.wall_time_seconds < 0.0)
    j["wall_time_seconds"] = nullptr;
  else
    j["wall_time_seconds"] = r.wall_time_seconds;
  return j.dump(2) + "\n";
}

void write_report_json(const CrossValReport& r, const std::string& path) {
  atomic_write(path, report_to_json_string(r));
}

CrossValReport load_report_json(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("cannot open report: " + path);
  ordered_json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw MalformedReport("report is not valid JSON: " + std::string(ex.what()));
  }

  CrossValReport r;
  try {
    r.model_id = j.at("model").get<std::string>();
    r.seed = j.at("seed").get<uint64_t>();
    for (const auto& jf : j.at("folds")) {
      FoldResult f;
      f.fold_index = jf.at("fold").get<int>();
      f.train_accuracy = jf.at("train_acc").get<double>();
      f.train_loss = jf.at("train_loss").get<double>();
      f.test_accuracy = jf.at("test_acc").get<double>();
      f.test_loss = jf.at("test_loss").get<double>();
      f.confusion = confusion_from_json(jf.at("confusion"), "fold confusion");
      r.folds.push_back(std::move(f));
    }
    const auto& av = j.at("averages");
    r.avg_train_accuracy = av.at("train_acc").get<double>();
    r.avg_train_loss = av.at("train_loss").get<double>();
    r.avg_test_accuracy = av.at("test_acc").get<double>();
    r.avg_test_loss = av.at("test_loss").get<double>();
    r.summed_confusion = confusion_from_json(j.at("summed_confusion"), "summed_confusion");
    const auto& wt = j.at("wall_time_seconds");
    r.wall_time_seconds = wt.is_null() ? -1.0 : wt.get<double>();
  } catch (const nlohmann::json::exception& ex) {
    throw MalformedReport("report missing fields: " + std::string(ex.what()));
  }

  if (r.folds.empty()) throw MalformedReport("report has no folds");
  const size_t c = r.summed_confusion.size();
  std::vector<std::vector<long>> total(c, std::vector<long>(c, 0));
  for (const FoldResult& f : r.folds) {
    if (f.confusion.size() != c)
      throw MalformedReport("fold confusion size differs from summed_confusion");
    for (size_t a = 0; a < c; ++a)
      for (size_t b = 0; b < c; ++b) total[a][b] += f.confusion[a][b];
  }
  if (total != r.summed_confusion)
    throw MalformedReport("summed_confusion does not equal the sum of fold confusions");
  return r;
}

void write_confusion_csv(const std::vector<std::vector<long>>& confusion,
                         const std::vector<std::string>& labels, const std::string& path) {
  const size_t c = confusion.size();
  auto label = [&](size_t i) {
    return i < labels.size() ? labels[i] : "class_" + std::to_string(i);
  };
  std::string out = "true\\pred";
  for (size_t b = 0; b < c; ++b) out += "," + csv_field(label(b));
  out += '\n';
  for (size_t a = 0; a < c; ++a) {
    out += csv_field(label(a));
    for (size_t b = 0; b < c; ++b) out += "," + std::to_string(confusion[a][b]);
    out += '\n';
  }
  atomic_write(path, out);
}

std::string format_comparison_table(const std::vector<CrossValReport>& reports) {
  std::string out =
      "Model      | AvgTrainAcc | AvgTrainLoss | AvgTestAcc | AvgTestLoss\n"
      "-----------+-------------+--------------+------------+------------\n";
  char line[160];
  for (const CrossValReport& r : reports) {
    std::snprintf(line, sizeof line, "%-10s | %11.4f | %12.4f | %10.4f | %11.4f\n",
                  r.model_id.c_str(), r.avg_train_accuracy, r.avg_train_loss,
                  r.avg_test_accuracy, r.avg_test_loss);
    out += line;
  }
  return out;
}

}  // namespace wordrec
