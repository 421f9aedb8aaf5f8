#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gapforge/tabular.hpp"

namespace gapforge {

enum class Task { Regression, Classification };

std::string_view to_string(Task task) noexcept;

struct LearnerSpec;

/// Ordinary least squares with intercept and an unpenalized-intercept ridge term.
struct LinearRegression {
  double ridge = 0.0;
};

/// CART: variance reduction (regression) or Gini (classification).
struct DecisionTree {
  int max_depth = 6;
  int min_leaf = 2;
  Task task = Task::Regression;
};

struct Knn {
  int k = 5;
  Task task = Task::Regression;
};

struct Bagging {
  std::shared_ptr<const LearnerSpec> base;
  int n_estimators = 25;
  double sample_fraction = 1.0;
  bool with_replacement = true;
  std::uint64_t seed = 0;
};

/// Squared-error gradient boosting over depth-limited regression trees.
struct GradientBoostedTrees {
  int n_trees = 100;
  double learning_rate = 0.1;
  int max_depth = 6;
  int min_leaf = 2;
};

struct LearnerSpec {
  std::variant<LinearRegression, DecisionTree, Knn, Bagging, GradientBoostedTrees> kind;
};

LearnerSpec make_bagging(LearnerSpec base, int n_estimators = 25, double sample_fraction = 1.0,
                         bool with_replacement = true, std::uint64_t seed = 0);

Task task_of(const LearnerSpec& spec);
/// Throws SpecError naming the first invalid field.
void validate(const LearnerSpec& spec);
/// Report column header, e.g. "Bagging Reg".
std::string display_name(const LearnerSpec& spec);

// ---------------------------------------------------------------------------
// Design matrices

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Where each block of features comes from: a numeric column maps to one
/// feature, a categorical column to one indicator per vocabulary label.
struct FeatureSource {
  std::string column;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<std::string> vocabulary;
};

struct FeatureSchema {
  std::vector<FeatureSource> sources;

  std::size_t width() const;
  std::vector<std::string> feature_names() const;
};

/// Schema over every column of `table` except those named in `exclude`.
FeatureSchema feature_schema(const Table& table, std::span<const std::string> exclude = {});

struct DesignMatrix {
  Matrix features;
  std::vector<std::string> feature_names;
  std::vector<double> target;
  Task task = Task::Regression;
  /// Target labels for classification; codes index into this list.
  std::vector<std::string> classes;
  FeatureSchema schema;

  std::size_t n_rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t n_features() const { return static_cast<std::size_t>(features.cols()); }
};

/// Numeric columns pass through; each categorical column expands to one
/// indicator per label; the target is extracted (class codes for a
/// categorical target). Every cell must be observed.
DesignMatrix encode(const Table& table, const std::string& target_column);
/// Encode against a schema and class list fixed elsewhere (e.g. by training
/// data). Labels unknown to the schema encode as all-zero indicators; unknown
/// target labels get codes past the known classes.
DesignMatrix encode(const Table& table, const std::string& target_column,
                    const FeatureSchema& schema, const std::vector<std::string>& classes);
/// Features only. Cells outside the schema's columns are not read.
Matrix encode_features(const Table& table, const FeatureSchema& schema);

// ---------------------------------------------------------------------------
// Fitted models

class Model {
 public:
  virtual ~Model() = default;
  virtual std::vector<double> predict(const Matrix& features) const = 0;
};

class FittedLearner {
 public:
  FittedLearner(LearnerSpec spec, std::shared_ptr<const Model> model, std::size_t n_features,
                bool warning = false);

  const LearnerSpec& spec() const noexcept { return spec_; }
  Task task() const { return task_of(spec_); }
  std::size_t n_features() const noexcept { return n_features_; }
  /// Set when fitting had to stabilize a singular system.
  bool warning() const noexcept { return warning_; }

  /// Throws PredictError when the feature count differs from training.
  std::vector<double> predict(const Matrix& features) const;

  template <class M>
  const M* model_as() const {
    return dynamic_cast<const M*>(model_.get());
  }

 private:
  LearnerSpec spec_;
  std::shared_ptr<const Model> model_;
  std::size_t n_features_ = 0;
  bool warning_ = false;
};

class LinearModel final : public Model {
 public:
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  double ridge_used = 0.0;

  std::vector<double> predict(const Matrix& features) const override;
};

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

/// Rows with x[feature] <= threshold descend left.
class TreeModel final : public Model {
 public:
  std::vector<TreeNode> nodes;

  double predict_row(const double* row) const;
  std::vector<double> predict(const Matrix& features) const override;
  std::size_t leaf_count() const;
};

class KnnModel final : public Model {
 public:
  Matrix train_features;
  std::vector<double> train_target;
  int k = 5;
  Task task = Task::Regression;

  std::vector<double> predict(const Matrix& features) const override;
};

class EnsembleModel final : public Model {
 public:
  std::vector<FittedLearner> members;
  Task task = Task::Regression;

  std::vector<double> predict(const Matrix& features) const override;
};

class BoostedModel final : public Model {
 public:
  double initial = 0.0;
  double learning_rate = 0.1;
  std::vector<TreeModel> trees;

  std::vector<double> predict(const Matrix& features) const override;
  /// Prediction using only the first `n_trees` trees.
  std::vector<double> predict_first(const Matrix& features, std::size_t n_trees) const;
};

FittedLearner fit(const LearnerSpec& spec, const DesignMatrix& data);
/// `n_classes` is only read for classification; 0 means max code + 1.
FittedLearner fit(const LearnerSpec& spec, const Matrix& features, std::span<const double> target,
                  std::size_t n_classes = 0);
std::vector<double> predict(const FittedLearner& model, const DesignMatrix& data);

}  // namespace gapforge
