#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gapforge {

double mse(std::span<const double> predictions, std::span<const double> actuals);
double rmse(std::span<const double> predictions, std::span<const double> actuals);

struct RmsleResult {
  double value = 0.0;
  /// Some predictions were negative and were clipped to 0 before the log.
  bool clipped = false;
};

/// sqrt(mean((log1p(p) - log1p(a))^2)). Actuals must be >= 0.
RmsleResult rmsle_checked(std::span<const double> predictions, std::span<const double> actuals);
double rmsle(std::span<const double> predictions, std::span<const double> actuals);

/// counts[i][j] = samples whose true label is labels[i] and predicted label is labels[j].
struct ConfusionMatrix {
  std::vector<std::int64_t> labels;
  std::vector<std::vector<std::uint64_t>> counts;

  std::uint64_t total() const;
  std::uint64_t support(std::size_t i) const;
  std::uint64_t predicted(std::size_t j) const;
};

/// Label set is the sorted union of both vectors.
ConfusionMatrix confusion_matrix(std::span<const std::int64_t> truth,
                                 std::span<const std::int64_t> predicted);
/// Convenience overload for class codes carried as doubles.
ConfusionMatrix confusion_matrix(std::span<const double> truth, std::span<const double> predicted);

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct AverageMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ClassificationReport {
  std::vector<ClassMetrics> classes;
  double accuracy = 0.0;
  AverageMetrics macro;
  AverageMetrics weighted;
  std::uint64_t total_support = 0;
  /// Set when some precision/recall/f1 had a zero denominator and was defined as 0.
  bool zero_division = false;
};

ClassificationReport classification_report(const ConfusionMatrix& cm);

/// Unweighted mean and support-weighted mean of per-class metrics.
AverageMetrics macro_average(std::span<const ClassMetrics> classes);
AverageMetrics weighted_average(std::span<const ClassMetrics> classes);

/// Round half away from zero at `decimals` places, absorbing binary
/// representation error (0.915 displays as 0.92).
double round_half_up(double value, int decimals);

/// Fixed-width text block: per-class rows, then accuracy, macro avg,
/// weighted avg; accuracy is printed in the f1-score column.
std::string render_text(const ClassificationReport& report);
std::string render_json(const ClassificationReport& report);

double f1_macro(std::span<const double> truth, std::span<const double> predicted);
double accuracy(std::span<const double> truth, std::span<const double> predicted);

}  // namespace gapforge
