#include "gapforge/learners.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "gapforge/error.hpp"
#include "gapforge/random.hpp"
#include "tree_builder.hpp"

namespace gapforge {

std::string_view to_string(Task task) noexcept {
  return task == Task::Regression ? "regression" : "classification";
}

LearnerSpec make_bagging(LearnerSpec base, int n_estimators, double sample_fraction,
                         bool with_replacement, std::uint64_t seed) {
  Bagging b;
  b.base = std::make_shared<const LearnerSpec>(std::move(base));
  b.n_estimators = n_estimators;
  b.sample_fraction = sample_fraction;
  b.with_replacement = with_replacement;
  b.seed = seed;
  return LearnerSpec{b};
}

Task task_of(const LearnerSpec& spec) {
  return std::visit(
      [](const auto& k) -> Task {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, DecisionTree> || std::is_same_v<T, Knn>) {
          return k.task;
        } else if constexpr (std::is_same_v<T, Bagging>) {
          if (!k.base) throw SpecError("base", "bagging needs a base learner");
          return task_of(*k.base);
        } else {
          return Task::Regression;
        }
      },
      spec.kind);
}

void validate(const LearnerSpec& spec) {
  std::visit(
      [](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, LinearRegression>) {
          if (!(k.ridge >= 0.0) || !std::isfinite(k.ridge)) {
            throw SpecError("ridge", "must be finite and >= 0");
          }
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          if (k.max_depth < 1) throw SpecError("max_depth", "must be >= 1");
          if (k.min_leaf < 1) throw SpecError("min_leaf", "must be >= 1");
        } else if constexpr (std::is_same_v<T, Knn>) {
          if (k.k < 1) throw SpecError("k", "must be >= 1");
        } else if constexpr (std::is_same_v<T, Bagging>) {
          if (!k.base) throw SpecError("base", "bagging needs a base learner");
          if (k.n_estimators < 1) throw SpecError("n_estimators", "must be >= 1");
          if (!(k.sample_fraction > 0.0 && k.sample_fraction <= 1.0)) {
            throw SpecError("sample_fraction", "must lie in (0, 1]");
          }
          validate(*k.base);
        } else {
          if (k.n_trees < 1) throw SpecError("n_trees", "must be >= 1");
          if (!(k.learning_rate > 0.0 && k.learning_rate <= 1.0)) {
            throw SpecError("learning_rate", "must lie in (0, 1]");
          }
          if (k.max_depth < 1) throw SpecError("max_depth", "must be >= 1");
          if (k.min_leaf < 1) throw SpecError("min_leaf", "must be >= 1");
        }
      },
      spec.kind);
}

std::string display_name(const LearnerSpec& spec) {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        const auto suffix = [](Task t) { return t == Task::Regression ? " Reg" : " Clf"; };
        if constexpr (std::is_same_v<T, LinearRegression>) {
          return "Linear Reg";
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          return k.task == Task::Regression ? "Decision Tree" : "Decision Tree Clf";
        } else if constexpr (std::is_same_v<T, Knn>) {
          return k.task == Task::Regression ? "KNN" : "KNN Clf";
        } else if constexpr (std::is_same_v<T, Bagging>) {
          return std::string("Bagging") + suffix(k.base ? task_of(*k.base) : Task::Regression);
        } else {
          return "GBT Regressor";
        }
      },
      spec.kind);
}

// ---------------------------------------------------------------------------
// Prediction

FittedLearner::FittedLearner(LearnerSpec spec, std::shared_ptr<const Model> model,
                             std::size_t n_features, bool warning)
    : spec_(std::move(spec)), model_(std::move(model)), n_features_(n_features), warning_(warning) {}

std::vector<double> FittedLearner::predict(const Matrix& features) const {
  if (static_cast<std::size_t>(features.cols()) != n_features_) {
    throw PredictError("model was trained on " + std::to_string(n_features_) +
                       " features, got " + std::to_string(features.cols()));
  }
  return model_->predict(features);
}

std::vector<double> LinearModel::predict(const Matrix& features) const {
  std::vector<double> out(static_cast<std::size_t>(features.rows()), intercept);
  if (coefficients.size() == 0) return out;
  const Eigen::VectorXd y = features * coefficients;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += y(static_cast<Eigen::Index>(i));
  return out;
}

double TreeModel::predict_row(const double* row) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(row[n.feature] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

std::vector<double> TreeModel::predict(const Matrix& features) const {
  std::vector<double> out(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    out[static_cast<std::size_t>(r)] = predict_row(features.row(r).data());
  }
  return out;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

namespace {

// Most frequent code; ties go to the smallest code.
double majority(std::span<const double> codes) {
  std::size_t max_code = 0;
  for (double c : codes) max_code = std::max(max_code, static_cast<std::size_t>(c));
  std::vector<std::size_t> counts(max_code + 1, 0);
  for (double c : codes) ++counts[static_cast<std::size_t>(c)];
  const auto it = std::max_element(counts.begin(), counts.end());
  return static_cast<double>(it - counts.begin());
}

}  // namespace

std::vector<double> KnnModel::predict(const Matrix& features) const {
  const Eigen::Index n_train = train_features.rows();
  const auto kk = static_cast<std::size_t>(std::min<Eigen::Index>(k, n_train));
  std::vector<double> out(static_cast<std::size_t>(features.rows()));
  std::vector<std::pair<double, std::size_t>> dist(static_cast<std::size_t>(n_train));
  std::vector<double> picked(kk);
  for (Eigen::Index q = 0; q < features.rows(); ++q) {
    for (Eigen::Index t = 0; t < n_train; ++t) {
      dist[static_cast<std::size_t>(t)] = {(train_features.row(t) - features.row(q)).squaredNorm(),
                                           static_cast<std::size_t>(t)};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    for (std::size_t i = 0; i < kk; ++i) picked[i] = train_target[dist[i].second];
    double& o = out[static_cast<std::size_t>(q)];
    if (task == Task::Classification) {
      o = majority(picked);
    } else {
      o = std::accumulate(picked.begin(), picked.end(), 0.0) / static_cast<double>(kk);
    }
  }
  return out;
}

std::vector<double> EnsembleModel::predict(const Matrix& features) const {
  const auto n = static_cast<std::size_t>(features.rows());
  std::vector<std::vector<double>> votes;
  votes.reserve(members.size());
  for (const auto& m : members) votes.push_back(m.predict(features));
  std::vector<double> out(n, 0.0);
  std::vector<double> column(members.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < members.size(); ++m) column[m] = votes[m][i];
    if (task == Task::Classification) {
      out[i] = majority(column);
    } else {
      out[i] = std::accumulate(column.begin(), column.end(), 0.0) /
               static_cast<double>(column.size());
    }
  }
  return out;
}

std::vector<double> BoostedModel::predict(const Matrix& features) const {
  return predict_first(features, trees.size());
}

std::vector<double> BoostedModel::predict_first(const Matrix& features, std::size_t n_trees) const {
  n_trees = std::min(n_trees, trees.size());
  std::vector<double> out(static_cast<std::size_t>(features.rows()), initial);
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    const double* row = features.row(r).data();
    double& o = out[static_cast<std::size_t>(r)];
    for (std::size_t t = 0; t < n_trees; ++t) o += learning_rate * trees[t].predict_row(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

struct FitInput {
  const Matrix& x;
  std::span<const double> y;
  std::size_t n_classes;
};

FittedLearner fit_impl(const LearnerSpec& spec, const FitInput& in);

FittedLearner fit_linear(const LearnerSpec& spec, const LinearRegression& lr, const FitInput& in) {
  const Eigen::Index n = in.x.rows();
  const Eigen::Index p = in.x.cols();
  auto model = std::make_shared<LinearModel>();
  const Eigen::Map<const Eigen::VectorXd> y(in.y.data(), n);
  const double y_mean = y.mean();
  if (p == 0) {
    model->intercept = y_mean;
    return FittedLearner(spec, model, 0);
  }
  const Eigen::RowVectorXd x_mean = in.x.colwise().mean();
  const Eigen::MatrixXd xc = in.x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  const Eigen::MatrixXd gram = xc.transpose() * xc;
  const Eigen::VectorXd rhs = xc.transpose() * yc;

  // A singular system is stabilized by escalating the ridge from 1e-8.
  double ridge = lr.ridge;
  bool escalated = false;
  for (int attempt = 0; attempt < 40; ++attempt) {
    Eigen::MatrixXd a = gram;
    a.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    const Eigen::VectorXd d = ldlt.vectorD();
    const double d_max = d.cwiseAbs().maxCoeff();
    const bool ok = ldlt.info() == Eigen::Success && d.minCoeff() > 1e-12 * std::max(d_max, 1.0);
    if (ok) {
      model->coefficients = ldlt.solve(rhs);
      model->intercept = y_mean - x_mean.dot(model->coefficients);
      model->ridge_used = ridge;
      return FittedLearner(spec, model, static_cast<std::size_t>(p), escalated);
    }
    escalated = true;
    ridge = ridge < 1e-8 ? 1e-8 : ridge * 10.0;
  }
  throw FitError("linear regression: normal equations could not be stabilized");
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

FittedLearner fit_tree(const LearnerSpec& spec, const DecisionTree& dt, const FitInput& in) {
  const auto rows = all_rows(static_cast<std::size_t>(in.x.rows()));
  const detail::PresortedSample sample(in.x, rows);
  auto model = std::make_shared<TreeModel>(
      detail::grow_tree(sample, in.y, {dt.max_depth, dt.min_leaf, dt.task, in.n_classes}));
  return FittedLearner(spec, model, static_cast<std::size_t>(in.x.cols()));
}

FittedLearner fit_knn(const LearnerSpec& spec, const Knn& knn, const FitInput& in) {
  auto model = std::make_shared<KnnModel>();
  model->train_features = in.x;
  model->train_target.assign(in.y.begin(), in.y.end());
  model->k = knn.k;
  model->task = knn.task;
  return FittedLearner(spec, model, static_cast<std::size_t>(in.x.cols()));
}

FittedLearner fit_bagging(const LearnerSpec& spec, const Bagging& bag, const FitInput& in) {
  const auto n = static_cast<std::size_t>(in.x.rows());
  const auto m = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(bag.sample_fraction * static_cast<double>(n) + 0.5)));
  auto model = std::make_shared<EnsembleModel>();
  model->task = task_of(*bag.base);
  bool warning = false;
  for (int e = 0; e < bag.n_estimators; ++e) {
    Rng rng(mix_seed(bag.seed, static_cast<std::uint64_t>(e)));
    std::vector<std::size_t> rows;
    if (bag.with_replacement) {
      rows.resize(m);
      for (auto& r : rows) r = rng.below(n);
    } else {
      rows = rng.permutation(n);
      rows.resize(std::min(m, n));
    }
    std::sort(rows.begin(), rows.end());
    Matrix xs(static_cast<Eigen::Index>(rows.size()), in.x.cols());
    std::vector<double> ys(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      xs.row(static_cast<Eigen::Index>(i)) = in.x.row(static_cast<Eigen::Index>(rows[i]));
      ys[i] = in.y[rows[i]];
    }
    model->members.push_back(fit_impl(*bag.base, {xs, ys, in.n_classes}));
    warning = warning || model->members.back().warning();
  }
  return FittedLearner(spec, model, static_cast<std::size_t>(in.x.cols()), warning);
}

FittedLearner fit_gbt(const LearnerSpec& spec, const GradientBoostedTrees& gbt, const FitInput& in) {
  const auto n = static_cast<std::size_t>(in.x.rows());
  auto model = std::make_shared<BoostedModel>();
  model->learning_rate = gbt.learning_rate;
  model->initial = std::accumulate(in.y.begin(), in.y.end(), 0.0) / static_cast<double>(n);

  const auto rows = all_rows(n);
  const detail::PresortedSample sample(in.x, rows);
  std::vector<double> current(n, model->initial);
  std::vector<double> residual(n);
  const detail::TreeParams params{gbt.max_depth, gbt.min_leaf, Task::Regression, 0};
  model->trees.reserve(static_cast<std::size_t>(gbt.n_trees));
  for (int t = 0; t < gbt.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = in.y[i] - current[i];
    TreeModel tree = detail::grow_tree(sample, residual, params);
    for (std::size_t i = 0; i < n; ++i) {
      current[i] += gbt.learning_rate * tree.predict_row(in.x.row(static_cast<Eigen::Index>(i)).data());
    }
    model->trees.push_back(std::move(tree));
  }
  return FittedLearner(spec, model, static_cast<std::size_t>(in.x.cols()));
}

FittedLearner fit_impl(const LearnerSpec& spec, const FitInput& in) {
  return std::visit(
      [&](const auto& k) -> FittedLearner {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, LinearRegression>) {
          return fit_linear(spec, k, in);
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          return fit_tree(spec, k, in);
        } else if constexpr (std::is_same_v<T, Knn>) {
          return fit_knn(spec, k, in);
        } else if constexpr (std::is_same_v<T, Bagging>) {
          return fit_bagging(spec, k, in);
        } else {
          return fit_gbt(spec, k, in);
        }
      },
      spec.kind);
}

}  // namespace

FittedLearner fit(const LearnerSpec& spec, const Matrix& features, std::span<const double> target,
                  std::size_t n_classes) {
  validate(spec);
  if (features.rows() == 0) throw FitError("cannot fit a learner on zero rows");
  if (static_cast<std::size_t>(features.rows()) != target.size()) {
    throw FitError("feature rows and target length differ");
  }
  if (!features.allFinite()) throw FitError("feature matrix contains non-finite values");
  const Task task = task_of(spec);
  if (task == Task::Classification) {
    std::size_t max_code = 0;
    for (double c : target) {
      if (!(c >= 0.0) || c != std::floor(c)) {
        throw FitError("classification targets must be nonnegative integer codes");
      }
      max_code = std::max(max_code, static_cast<std::size_t>(c));
    }
    n_classes = std::max(n_classes, max_code + 1);
  } else {
    for (double v : target) {
      if (!std::isfinite(v)) throw FitError("regression targets must be finite");
    }
  }
  return fit_impl(spec, {features, target, n_classes});
}

FittedLearner fit(const LearnerSpec& spec, const DesignMatrix& data) {
  if (task_of(spec) != data.task) {
    throw FitError(std::string(to_string(task_of(spec))) + " learner cannot fit a " +
                   std::string(to_string(data.task)) + " target");
  }
  return fit(spec, data.features, data.target, data.classes.size());
}

std::vector<double> predict(const FittedLearner& model, const DesignMatrix& data) {
  return model.predict(data.features);
}

}  // namespace gapforge
