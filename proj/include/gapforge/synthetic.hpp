#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gapforge/learners.hpp"
#include "gapforge/tabular.hpp"

namespace gapforge {

/// Seeded stand-in datasets. Numeric features are named x0, x1, ...,
/// categorical features c0, c1, ..., and the target comes last.
struct SyntheticSpec {
  Task task = Task::Regression;
  std::size_t n_rows = 1000;
  int n_numeric_features = 8;
  /// One entry per categorical feature: its number of levels.
  std::vector<int> categorical_levels;
  /// Drives feature, class and noise draws.
  std::uint64_t seed = 0;
  /// Drives the regression coefficients only.
  std::uint64_t coefficient_seed = 0;
  double noise_stddev = 1.0;
  /// Added to every numeric feature after generation.
  double feature_offset = 0.0;
  /// Numeric features share one latent factor with this correlation.
  double feature_correlation = 0.5;
  /// Weight of the pairwise products z_j * z_{j+1} in the regression target.
  double nonlinearity = 0.1;
  int class_count = 2;
  /// Distance between adjacent class centroids on feature x0, in stddevs.
  /// Feature j gets separation * 0.7^j.
  double separation = 2.0;
  std::string target_name = "target";
};

/// Throws SpecError naming the first invalid field.
void validate(const SyntheticSpec& spec);

/// Generating coefficients of the regression family, on the raw (offset) feature scale:
/// y = intercept + sum_j numeric[j] * x_j + sum_k categorical[k][level_k]
///     + nonlinearity * sum_j z_j z_{j+1} + noise, with z_j = x_j - feature_offset.
struct SyntheticCoefficients {
  double intercept = 0.0;
  std::vector<double> numeric;
  std::vector<std::vector<double>> categorical;
};

SyntheticCoefficients synth_coefficients(const SyntheticSpec& spec);

/// Requires task = regression.
Table synth_regression(const SyntheticSpec& spec);
/// Requires task = classification; the target is categorical with labels "0", "1", ...
Table synth_classification(const SyntheticSpec& spec);
/// Dispatches on spec.task.
Table synthesize(const SyntheticSpec& spec);

}  // namespace gapforge
