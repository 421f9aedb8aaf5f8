#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gapforge/imputers.hpp"
#include "gapforge/learners.hpp"
#include "gapforge/missingness.hpp"
#include "gapforge/tabular.hpp"

namespace gapforge {

enum class Metric { Mse, Rmse, Rmsle, Accuracy, F1Macro };

std::string_view to_string(Metric metric) noexcept;
/// Accepts "mse", "rmse", "rmsle", "accuracy", "f1_macro"; throws SpecError otherwise.
Metric metric_from_string(std::string_view name);
Task metric_task(Metric metric) noexcept;
bool lower_is_better(Metric metric) noexcept;

/// 0.1, 0.2, ..., 0.9
std::vector<double> default_train_fractions();
/// Impute by 0, mean, median, and iterative gradient-boosted-tree imputation.
std::vector<ImputerSpec> comparison_imputers();

struct BenchmarkPlan {
  std::vector<double> train_fractions = default_train_fractions();
  int trials = 5;
  std::uint64_t base_seed = 0;
  std::vector<ImputerSpec> imputers;
  std::vector<LearnerSpec> learners;
  /// Applied independently to the train and test features of every trial.
  std::optional<MissingnessSpec> missingness;
  Metric metric = Metric::Mse;
  std::string target_column = "target";
};

/// Throws SpecError naming the first invalid field.
void validate(const BenchmarkPlan& plan);

struct CellResult {
  double train_fraction = 0.0;
  std::size_t imputer_index = 0;
  std::size_t learner_index = 0;
  /// Metric per successful trial, in trial order.
  std::vector<double> trial_values;
  /// NaN when the cell failed.
  double mean = 0.0;
  double stddev = 0.0;
  bool failed = false;
  std::string error;
  /// Wall time over all trials of this cell (imputer fit shared across
  /// learners is charged to each of them).
  double seconds = 0.0;
};

struct BenchmarkReport {
  BenchmarkPlan plan;
  /// Column labels, made unique with a " #n" suffix where needed.
  std::vector<std::string> imputer_names;
  std::vector<std::string> learner_names;
  /// Fraction-major, then imputer, then learner.
  std::vector<CellResult> cells;

  const CellResult& cell(std::size_t fraction, std::size_t imputer, std::size_t learner) const;
  std::size_t failed_cells() const;
};

/// One train/test pair of the protocol, after splitting and injection.
struct TrialData {
  Table train;
  Table test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

/// Split and inject for trial `trial` at `train_fraction`. Rows whose target is
/// missing are dropped first; row indices refer to the remaining rows.
TrialData prepare_trial(const BenchmarkPlan& plan, const Table& table, double train_fraction,
                        int trial);

/// Runs the full grid. Throws PlanError if the metric, learners and target
/// disagree on the task, or the target column is absent; other failures are
/// recorded per cell.
BenchmarkReport run(const BenchmarkPlan& plan, const Table& table);

/// `base` with its imputer axis replaced and a single learner.
BenchmarkReport compare_imputers(BenchmarkPlan base, const Table& table,
                                 std::vector<ImputerSpec> imputers, LearnerSpec learner);
/// `base` with its learner axis replaced and a single imputer.
BenchmarkReport compare_learners(BenchmarkPlan base, const Table& table, ImputerSpec imputer,
                                 std::vector<LearnerSpec> learners);

struct JsonOptions {
  bool include_timing = false;
  int indent = 2;
};

std::string report_to_json(const BenchmarkReport& report, const JsonOptions& options = {});
/// One row per cell.
std::string report_to_csv(const BenchmarkReport& report);
/// Fractions as rows. A single learner gives imputer columns, a single imputer
/// with several learners gives learner columns, anything else gives one
/// column per (imputer, learner) pair.
std::string report_to_markdown(const BenchmarkReport& report);
/// Long format: fraction, series, value.
std::string report_to_plot_csv(const BenchmarkReport& report);

}  // namespace gapforge
