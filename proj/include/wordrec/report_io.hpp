#pragma once

#include <string>
#include <vector>

#include "wordrec/train.hpp"

namespace wordrec {

// Stable-order JSON rendering of a report; identical report state yields
// identical bytes. wall_time_seconds < 0 serializes as null so timing never
// perturbs otherwise-deterministic output.
std::string report_to_json_string(const CrossValReport& r);
void write_report_json(const CrossValReport& r, const std::string& path);  // atomic

// Throws MalformedReport on missing fields or inconsistent matrices.
CrossValReport load_report_json(const std::string& path);

// Rows = true class, columns = predicted. `labels` may be empty, in which
// case class indices are used.
void write_confusion_csv(const std::vector<std::vector<long>>& confusion,
                         const std::vector<std::string>& labels, const std::string& path);

// Aligned comparison table: Model | AvgTrainAcc | AvgTrainLoss | AvgTestAcc | AvgTestLoss
std::string format_comparison_table(const std::vector<CrossValReport>& reports);

}  // namespace wordrec
