#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gapforge/learners.hpp"
#include "gapforge/tabular.hpp"

namespace gapforge {

namespace strategy {

struct Zero {};
struct Constant {
  double value = 0.0;
};
struct Mean {};
struct Median {};
struct Mode {};
struct NewCategory {
  std::string label = "missing";
};
/// Fill from the next observed row below; trailing gaps take the last observed value.
struct NextValid {};
struct Knn {
  int k = 5;
};
/// One predictor per target column trained on the other columns (mean/mode pre-filled).
struct Regression {
  LearnerSpec learner;
};
/// Regression repeated `rounds` times, each round refitting on the previous round's fills.
struct Iterative {
  LearnerSpec learner;
  int rounds = 3;
};

}  // namespace strategy

using ImputeStrategy =
    std::variant<strategy::Zero, strategy::Constant, strategy::Mean, strategy::Median,
                 strategy::Mode, strategy::NewCategory, strategy::NextValid, strategy::Knn,
                 strategy::Regression, strategy::Iterative>;

struct ImputerSpec {
  ImputeStrategy strategy;
  /// Empty means every column the strategy applies to.
  std::optional<std::vector<std::string>> target_columns;
};

/// Throws SpecError naming the first invalid field.
void validate(const ImputerSpec& spec);
bool applies_to(const ImputeStrategy& strategy, ColumnKind kind);
/// JSON tag, e.g. "mean" or "next_valid".
std::string strategy_tag(const ImputeStrategy& strategy);
/// Report column header, e.g. "Impute by mean".
std::string display_name(const ImputerSpec& spec);

/// Train-derived state of one imputer. Immutable once built by `fit`.
class FittedImputer {
 public:
  /// Fill value for a column under the constant-style strategies: numeric
  /// value, or label for categorical columns.
  struct Fill {
    double number = 0.0;
    std::string label;
  };

  /// Per-column predictors from one round of a predictive strategy.
  using Round = std::map<std::string, FittedLearner>;

  const ImputerSpec& spec() const noexcept { return spec_; }
  const std::vector<std::string>& targets() const noexcept { return targets_; }
  const FeatureSource& schema_of(const std::string& column) const;
  /// Fill statistic (or fallback statistic) per target column.
  const std::map<std::string, Fill>& fills() const noexcept { return fills_; }
  const std::vector<Round>& rounds() const noexcept { return rounds_; }

 private:
  friend FittedImputer fit(const ImputerSpec& spec, const Table& train);
  friend Table transform(const FittedImputer& model, const Table& table);

  ImputerSpec spec_;
  FeatureSchema schema_;               // every training column
  std::vector<std::string> targets_;   // in processing order
  std::map<std::string, Fill> fills_;  // constant fills / fallbacks / pre-fills
  // Pre-fill for every non-target feature column used by predictive strategies.
  std::map<std::string, Fill> prefill_;

  // KNN: per-column z-scoring and the standardized training rows over the
  // numeric columns in `knn_columns_`.
  std::vector<std::string> knn_columns_;
  std::vector<double> knn_mean_;
  std::vector<double> knn_scale_;
  std::vector<std::vector<double>> knn_rows_;          // [row][col], standardized
  std::vector<std::vector<double>> knn_raw_;           // [row][col], original scale
  std::vector<std::vector<std::uint8_t>> knn_missing_;  // [row][col]

  // Predictive strategies: per-round, per-column models and feature schemas.
  std::vector<Round> rounds_;
  std::map<std::string, FeatureSchema> feature_schemas_;
};

FittedImputer fit(const ImputerSpec& spec, const Table& train);
/// Fill every targeted missing cell; observed cells are left bit-identical.
Table transform(const FittedImputer& model, const Table& table);
Table fit_transform(const ImputerSpec& spec, const Table& table);

}  // namespace gapforge
