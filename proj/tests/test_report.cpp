#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wordrec/errors.hpp"
#include "wordrec/report_io.hpp"

using namespace wordrec;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  const fs::path d = fs::temp_directory_path() / "wordrec_test_report";
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os << s;
}

CrossValReport sample_report() {
  CrossValReport r;
  r.model_id = "cnn";
  r.seed = 7;
  for (int f = 0; f < 2; ++f) {
    FoldResult fr;
    fr.fold_index = f;
    fr.train_accuracy = 0.875 + 0.0625 * f;
    fr.train_loss = 0.5 - 0.125 * f;
    fr.test_accuracy = 0.75 + 0.125 * f;
    fr.test_loss = 0.625 - 0.25 * f;
    fr.confusion = {{3, 1 - f}, {f, 2}};
    r.folds.push_back(fr);
  }
  r.avg_train_accuracy = (r.folds[0].train_accuracy + r.folds[1].train_accuracy) / 2;
  r.avg_train_loss = (r.folds[0].train_loss + r.folds[1].train_loss) / 2;
  r.avg_test_accuracy = (r.folds[0].test_accuracy + r.folds[1].test_accuracy) / 2;
  r.avg_test_loss = (r.folds[0].test_loss + r.folds[1].test_loss) / 2;
  r.summed_confusion = {{6, 1}, {1, 4}};
  return r;
}

}  // namespace

TEST_CASE("report json round-trips exactly") {
  const CrossValReport r = sample_report();
  const fs::path p = work_dir() / "roundtrip.json";
  write_report_json(r, p.string());

  const CrossValReport q = load_report_json(p.string());
  CHECK(q.model_id == r.model_id);
  CHECK(q.seed == r.seed);
  REQUIRE(q.folds.size() == r.folds.size());
  for (size_t f = 0; f < r.folds.size(); ++f) {
    CHECK(q.folds[f].fold_index == r.folds[f].fold_index);
    // values chosen exactly representable in binary, so == is legitimate
    CHECK(q.folds[f].train_accuracy == r.folds[f].train_accuracy);
    CHECK(q.folds[f].train_loss == r.folds[f].train_loss);
    CHECK(q.folds[f].test_accuracy == r.folds[f].test_accuracy);
    CHECK(q.folds[f].test_loss == r.folds[f].test_loss);
    CHECK(q.folds[f].confusion == r.folds[f].confusion);
  }
  CHECK(q.avg_train_accuracy == r.avg_train_accuracy);
  CHECK(q.avg_test_accuracy == r.avg_test_accuracy);
  CHECK(q.summed_confusion == r.summed_confusion);
  CHECK(q.wall_time_seconds == -1.0);

  // re-dump of the loaded report is byte-identical
  CHECK(report_to_json_string(q) == report_to_json_string(r));
  CHECK(report_to_json_string(r) == slurp(p));
}

TEST_CASE("wall time serializes as null when unset, number when set") {
  CrossValReport r = sample_report();
  const std::string no_time = report_to_json_string(r);
  CHECK(no_time.find("\"wall_time_seconds\": null") != std::string::npos);

  r.wall_time_seconds = 12.5;
  const std::string timed = report_to_json_string(r);
  CHECK(timed.find("\"wall_time_seconds\": 12.5") != std::string::npos);

  const fs::path p = work_dir() / "timed.json";
  write_report_json(r, p.string());
  CHECK(load_report_json(p.string()).wall_time_seconds == 12.5);
}

TEST_CASE("json field names follow the schema") {
  const std::string j = report_to_json_string(sample_report());
  for (const char* key :
       {"\"model\"", "\"seed\"", "\"folds\"", "\"fold\"", "\"train_acc\"", "\"train_loss\"",
        "\"test_acc\"", "\"test_loss\"", "\"confusion\"", "\"averages\"",
        "\"summed_confusion\"", "\"wall_time_seconds\""}) {
    CAPTURE(key);
    CHECK(j.find(key) != std::string::npos);
  }
  // stable key order: model first, wall time last
  CHECK(j.find("\"model\"") < j.find("\"seed\""));
  CHECK(j.find("\"summed_confusion\"") < j.find("\"wall_time_seconds\""));
}

TEST_CASE("malformed reports are rejected") {
  const fs::path d = work_dir();

  CHECK_THROWS_AS(load_report_json((d / "nope.json").string()), IoFailure);

  spit(d / "notjson.json", "{ this is not json");
  CHECK_THROWS_AS(load_report_json((d / "notjson.json").string()), MalformedReport);

  const CrossValReport r = sample_report();
  const auto good = nlohmann::ordered_json::parse(report_to_json_string(r));

  // drop a required key
  auto missing = good;
  missing.erase("seed");
  spit(d / "missing.json", missing.dump());
  CHECK_THROWS_AS(load_report_json((d / "missing.json").string()), MalformedReport);

  // non-square confusion
  auto nonsq = good;
  nonsq["folds"][0]["confusion"][0].push_back(9);
  spit(d / "nonsquare.json", nonsq.dump());
  CHECK_THROWS_AS(load_report_json((d / "nonsquare.json").string()), MalformedReport);

  // summed_confusion inconsistent with the folds
  auto bad_sum = good;
  bad_sum["summed_confusion"][0][0] = 7;
  spit(d / "badsum.json", bad_sum.dump());
  CHECK_THROWS_AS(load_report_json((d / "badsum.json").string()), MalformedReport);

  // no folds at all
  spit(d / "nofolds.json",
       "{\"model\":\"mlp\",\"seed\":1,\"folds\":[],"
       "\"averages\":{\"train_acc\":0,\"train_loss\":0,\"test_acc\":0,\"test_loss\":0},"
       "\"summed_confusion\":[],\"wall_time_seconds\":null}");
  CHECK_THROWS_AS(load_report_json((d / "nofolds.json").string()), MalformedReport);
}

TEST_CASE("confusion csv layout and quoting") {
  const fs::path p = work_dir() / "conf.csv";
  write_confusion_csv({{5, 1}, {0, 6}}, {"yes", "no,maybe"}, p.string());
  const std::string csv = slurp(p);
  CHECK(csv ==
        "true\\pred,yes,\"no,maybe\"\n"
        "yes,5,1\n"
        "\"no,maybe\",0,6\n");

  // missing labels fall back to class indices
  const fs::path q = work_dir() / "conf_idx.csv";
  write_confusion_csv({{2, 0}, {0, 2}}, {}, q.string());
  const std::string idx = slurp(q);
  CHECK(idx.find("class_0") != std::string::npos);
  CHECK(idx.find("class_1,0,2") != std::string::npos);

  // embedded quotes double up
  const fs::path z = work_dir() / "conf_quote.csv";
  write_confusion_csv({{1}}, {"say \"hi\""}, z.string());
  CHECK(slurp(z).find("\"say \"\"hi\"\"\"") != std::string::npos);
}

TEST_CASE("comparison table formatting") {
  CrossValReport a = sample_report();
  CrossValReport b = sample_report();
  b.model_id = "cnn+blstm";
  b.avg_train_accuracy = 1.0;
  b.avg_train_loss = 0.0123;
  b.avg_test_accuracy = 0.9;
  b.avg_test_loss = 0.25;

  const std::string table = format_comparison_table({a, b});
  CHECK(table ==
        "Model      | AvgTrainAcc | AvgTrainLoss | AvgTestAcc | AvgTestLoss\n"
        "-----------+-------------+--------------+------------+------------\n"
        "cnn        |      0.9062 |       0.4375 |     0.8125 |      0.5000\n"
        "cnn+blstm  |      1.0000 |       0.0123 |     0.9000 |      0.2500\n");
}
