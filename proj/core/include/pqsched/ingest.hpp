#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pqsched/model.hpp"

namespace pqsched {

/// One row of a validation file. Classes are 0-based here and 1-based on disk.
struct ValidationRecord {
  std::size_t true_class = 0;
  std::optional<double> score;
  std::optional<std::size_t> predicted_class;
  std::optional<double> service_time;
  std::size_t line = 0;  // source line, 0 when built in memory
};

/// Reads a CSV with a header naming any of true_class, score, predicted_class,
/// service_time (true_class is required). Errors name the offending line.
std::vector<ValidationRecord> read_validation_csv(std::istream& in, const std::string& source = "<input>");
std::vector<ValidationRecord> read_validation_csv(const std::filesystem::path& path);

struct LabelRule {
  /// With a threshold, score >= threshold predicts class 0 and anything
  /// below predicts class 1 (two classes only). Without one, the
  /// predicted_class column is used.
  std::optional<double> threshold;
  double laplace_alpha = 0.0;
  std::size_t num_classes = 0;  // 0: largest class index seen
};

struct ConfusionEstimate {
  ConfusionMatrix confusion;
  std::vector<double> prevalences;
  std::vector<std::size_t> counts;  // [k * K + l]
};

/// Row-normalized (optionally smoothed) counts and class frequencies.
/// Throws EmptyClass when a true class has no record and ZeroColumn when a
/// predicted class is never produced.
ConfusionEstimate estimate_confusion(std::span<const ValidationRecord> records, const LabelRule& rule = {});

struct RateEstimate {
  std::vector<double> service_rates;       // 1 / mean service time
  std::vector<double> second_moments;      // mean of squared service time
  std::vector<std::size_t> counts;
};

/// Throws EmptyClass when a class has no service_time observation.
RateEstimate estimate_rates(std::span<const ValidationRecord> records, std::size_t num_classes = 0);

/// Scores grouped by true class, in file order.
std::vector<std::vector<double>> scores_by_class(std::span<const ValidationRecord> records, std::size_t num_classes = 0);

}  // namespace pqsched
