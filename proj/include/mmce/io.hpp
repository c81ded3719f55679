#pragma once

// File formats: dataset/truth/curves/assignment CSVs, the key=value run
// config, the versioned text model file, and the eval report.

#include <map>
#include <string>
#include <vector>

#include "mmce/allocate.hpp"
#include "mmce/datagen.hpp"
#include "mmce/eval.hpp"
#include "mmce/model.hpp"
#include "mmce/train.hpp"

namespace mmce::io {

// Full 64-bit round-trip decimal formatting.
std::string format_double(double v);

void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

void write_truth_csv(const std::vector<GroundTruthRow>& rows, const std::string& path);
std::vector<GroundTruthRow> read_truth_csv(const std::string& path);

void write_curves_csv(const std::vector<ResponseCurve>& curves, const std::string& path);

void write_assignment_csv(const Assignment& a, const std::string& path);

void save_model(const MmceModel& model, const std::string& path);
MmceModel load_model(const std::string& path);

void write_eval_report(const EvalReport& report, const PositivityReport& positivity,
                       const std::string& path);

// Flat key=value run configuration; unknown keys rejected.
struct RunConfig {
  GenConfig gen;
  ModelConfig model;  // feature_width/grid filled from gen
  TrainConfig train;
  EligibilityConfig eligibility;
  double budget = 0.0;
  bool ceiling_explicit = false;  // else D defaults to the 99th label percentile

  static RunConfig parse_file(const std::string& path);
  static RunConfig parse(const std::map<std::string, std::string>& kv);
};

}  // namespace mmce::io
