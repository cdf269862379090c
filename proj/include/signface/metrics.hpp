#pragma once

#include <Eigen/Core>

#include <array>
#include <string>

#include "signface/landmarks.hpp"

namespace signface {

/// Rows are the true class, columns the predicted class.
using ConfusionMatrix = Eigen::Matrix<long long, kNumClasses, kNumClasses>;

struct ClassScores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  bool operator==(const ClassScores&) const = default;
};

struct EvalReport {
  ConfusionMatrix confusion = ConfusionMatrix::Zero();
  double accuracy = 0;
  std::array<ClassScores, kNumClasses> per_class{};
  ClassScores weighted;  // support-weighted means; weighted.recall == accuracy
  ClassScores macro;
  long long n = 0;
  /// Set when some precision/recall/F1 hit a zero denominator and was reported as 0.
  bool zero_division = false;

  bool operator==(const EvalReport&) const = default;
};

/// Throws EmptyDataset for an all-zero matrix, MalformedInput for negative entries.
EvalReport compute_report(const ConfusionMatrix& confusion);

/// Adds one prediction to the matrix.
inline void tally(ConfusionMatrix& m, SentenceType truth, SentenceType predicted) {
  ++m(index_of(truth), index_of(predicted));
}

/// `rate` in [0,1] as a percentage with two decimals, rounded half up: 73/76 -> "96.05".
std::string format_percent(double rate);

std::string report_to_json(const EvalReport& report);

/// Fixed-width table: Accuracy / Precision / Recall / F1 Score in percent.
std::string format_report_table(const EvalReport& report, const std::string& title);

}  // namespace signface
