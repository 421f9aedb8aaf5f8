#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gapforge/error.hpp"
#include "gapforge/learners.hpp"
#include "gapforge/metrics.hpp"
#include "gapforge/random.hpp"

using namespace gapforge;

namespace {

struct Data {
  Matrix x;
  std::vector<double> y;
};

Data random_regression(std::size_t n, std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  Data d{Matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p)), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double y = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double v = rng.normal();
      d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      y += (j % 2 == 0 ? 1.0 : -0.5) * v + 0.3 * v * v;
    }
    d.y[i] = y + 0.1 * rng.normal();
  }
  return d;
}

Data random_classification(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Data d{Matrix(static_cast<Eigen::Index>(n), 2), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<double>(rng.below(3));
    d.y[i] = c;
    d.x(static_cast<Eigen::Index>(i), 0) = c * 2.0 + rng.normal();
    d.x(static_cast<Eigen::Index>(i), 1) = rng.normal();
  }
  return d;
}

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

double training_mse(const FittedLearner& m, const Data& d) { return mse(m.predict(d.x), d.y); }

}  // namespace

TEST_CASE("OLS recovers an exact line") {
  const Matrix x = column({0, 1, 2, 3, 4, 5});
  const std::vector<double> y{1, 3, 5, 7, 9, 11};
  const FittedLearner m = fit(LearnerSpec{LinearRegression{}}, x, y);
  const auto* lin = m.model_as<LinearModel>();
  REQUIRE(lin);
  CHECK(std::abs(lin->coefficients(0) - 2.0) <= 1e-9);
  CHECK(std::abs(lin->intercept - 1.0) <= 1e-9);
  CHECK(std::abs(m.predict(column({10}))[0] - 21.0) <= 1e-9);
  CHECK_FALSE(m.warning());
}

TEST_CASE("singular systems are stabilised and flagged") {
  Matrix x(4, 2);
  x << 1, 2, 2, 4, 3, 6, 4, 8;  // second column duplicates the first
  const std::vector<double> y{1, 2, 3, 4};
  const FittedLearner m = fit(LearnerSpec{LinearRegression{}}, x, y);
  CHECK(m.warning());
  const auto pred = m.predict(x);
  for (std::size_t i = 0; i < 4; ++i) CHECK(pred[i] == doctest::Approx(y[i]).epsilon(1e-6));

  const FittedLearner constant =
      fit(LearnerSpec{LinearRegression{}}, column({3, 3, 3}), std::vector<double>{1, 2, 3});
  CHECK(constant.warning());
  CHECK(constant.predict(column({3}))[0] == doctest::Approx(2.0));
}

TEST_CASE("decision trees") {
  SUBCASE("constant target gives one leaf") {
    const Data d = random_regression(50, 3, 1);
    const std::vector<double> y(50, 4.25);
    const FittedLearner m = fit(LearnerSpec{DecisionTree{}}, d.x, y);
    CHECK(m.model_as<TreeModel>()->leaf_count() == 1);
    for (double p : m.predict(d.x)) CHECK(p == 4.25);
  }
  SUBCASE("deep trees interpolate distinct rows") {
    const Data d = random_regression(64, 3, 2);
    const FittedLearner m = fit(LearnerSpec{DecisionTree{64, 1, Task::Regression}}, d.x, d.y);
    CHECK(training_mse(m, d) == 0.0);
    const Data c = random_classification(64, 3);
    const FittedLearner k = fit(LearnerSpec{DecisionTree{64, 1, Task::Classification}}, c.x, c.y);
    CHECK(k.predict(c.x) == c.y);
  }
  SUBCASE("split thresholds are midpoints and ties pick the first feature") {
    Matrix x(4, 2);
    x << 0, 0, 1, 1, 2, 2, 3, 3;  // both features split the target equally well
    const std::vector<double> y{0, 0, 1, 1};
    const FittedLearner m = fit(LearnerSpec{DecisionTree{1, 1, Task::Regression}}, x, y);
    const auto& root = m.model_as<TreeModel>()->nodes.front();
    CHECK(root.feature == 0);
    CHECK(root.threshold == 1.5);
  }
  SUBCASE("min_leaf and max_depth are honoured") {
    const Data d = random_regression(100, 2, 4);
    const FittedLearner stump = fit(LearnerSpec{DecisionTree{1, 2, Task::Regression}}, d.x, d.y);
    CHECK(stump.model_as<TreeModel>()->leaf_count() == 2);
    const FittedLearner fat = fit(LearnerSpec{DecisionTree{20, 30, Task::Regression}}, d.x, d.y);
    CHECK(fat.model_as<TreeModel>()->leaf_count() <= 3);
  }
}

TEST_CASE("knn") {
  const Data d = random_regression(40, 2, 5);
  const FittedLearner one = fit(LearnerSpec{Knn{1, Task::Regression}}, d.x, d.y);
  CHECK(one.predict(d.x) == d.y);
  const FittedLearner all = fit(LearnerSpec{Knn{40, Task::Regression}}, d.x, d.y);
  const double mean = std::accumulate(d.y.begin(), d.y.end(), 0.0) / 40.0;
  for (double p : all.predict(d.x)) CHECK(p == doctest::Approx(mean).epsilon(1e-12));

  SUBCASE("vote ties go to the smallest class") {
    const Matrix x = column({0, 1, 10, 11});
    const std::vector<double> y{1, 0, 1, 0};
    const FittedLearner m = fit(LearnerSpec{Knn{2, Task::Classification}}, x, y);
    CHECK(m.predict(column({0.4}))[0] == 0.0);
  }
}

TEST_CASE("bagging") {
  const Data d = random_regression(80, 3, 6);
  const LearnerSpec tree{DecisionTree{}};
  SUBCASE("one full sample without replacement is the base learner") {
    const FittedLearner bag = fit(make_bagging(tree, 1, 1.0, false, 9), d.x, d.y);
    const FittedLearner base = fit(tree, d.x, d.y);
    CHECK(bag.predict(d.x) == base.predict(d.x));
  }
  SUBCASE("seeded and reproducible") {
    const LearnerSpec spec = make_bagging(tree, 10, 0.8, true, 3);
    CHECK(fit(spec, d.x, d.y).predict(d.x) == fit(spec, d.x, d.y).predict(d.x));
    CHECK(fit(make_bagging(tree, 10, 0.8, true, 4), d.x, d.y).predict(d.x) != fit(spec, d.x, d.y).predict(d.x));
  }
  SUBCASE("classification votes") {
    const Data c = random_classification(90, 7);
    const FittedLearner m =
        fit(make_bagging(LearnerSpec{DecisionTree{4, 2, Task::Classification}}, 7), c.x, c.y);
    CHECK(m.task() == Task::Classification);
    CHECK(accuracy(c.y, m.predict(c.x)) > 0.8);
  }
}

TEST_CASE("gradient boosting") {
  const Data d = random_regression(120, 4, 8);
  const FittedLearner m = fit(LearnerSpec{GradientBoostedTrees{40, 0.3, 3, 2}}, d.x, d.y);
  const auto* boosted = m.model_as<BoostedModel>();
  REQUIRE(boosted);
  CHECK(boosted->initial == doctest::Approx(std::accumulate(d.y.begin(), d.y.end(), 0.0) / 120.0));
  double previous = mse(boosted->predict_first(d.x, 0), d.y);
  for (std::size_t t = 1; t <= boosted->trees.size(); ++t) {
    const double now = mse(boosted->predict_first(d.x, t), d.y);
    CHECK(now <= previous + 1e-12);
    previous = now;
  }
  CHECK(boosted->predict_first(d.x, boosted->trees.size()) == m.predict(d.x));
}

TEST_CASE("feature order does not matter") {
  const Data d = random_regression(60, 3, 10);
  Matrix flipped(d.x.rows(), 3);
  flipped.col(0) = d.x.col(2);
  flipped.col(1) = d.x.col(1);
  flipped.col(2) = d.x.col(0);
  for (const LearnerSpec& spec : {LearnerSpec{LinearRegression{}}, LearnerSpec{Knn{3}},
                                  LearnerSpec{GradientBoostedTrees{10, 0.1, 3, 2}},
                                  make_bagging(LearnerSpec{DecisionTree{3, 8}}, 5)}) {
    CAPTURE(display_name(spec));
    const auto a = fit(spec, d.x, d.y).predict(d.x);
    const auto b = fit(spec, flipped, d.y).predict(flipped);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
  }
}

TEST_CASE("encode") {
  const Table t({Column::numeric("a", {1, 2, 3}), Column::numeric("b", {0, 0, 1}),
                 Column::from_labels("c", {"x", "y", "z"}), Column::numeric("target", {5, 6, 7})});
  const DesignMatrix d = encode(t, "target");
  CHECK(d.n_features() == 5);
  CHECK(d.feature_names.size() == 5);
  CHECK(d.target == std::vector<double>{5, 6, 7});
  for (Eigen::Index r = 0; r < 3; ++r) CHECK(d.features.row(r).tail(3).sum() == 1.0);

  const Table numeric({Column::numeric("a", {1, 2}), Column::numeric("y", {3, 4})});
  CHECK(encode(numeric, "y").n_features() == 1);

  const Table unseen({Column::numeric("a", {1}), Column::numeric("b", {0}),
                      Column::from_labels("c", {"new"}), Column::numeric("target", {0})});
  CHECK(encode(unseen, "target", d.schema, d.classes).features.row(0).tail(3).sum() == 0.0);

  CHECK_THROWS_AS(encode(t, "nope"), NameError);
  const Table holey({Column::numeric("a", {1, 0}, {0, 1}), Column::numeric("y", {3, 4})});
  CHECK_THROWS_AS(encode(holey, "y"), EncodeError);
}

TEST_CASE("fit and predict errors") {
  const Data d = random_regression(10, 2, 11);
  const FittedLearner m = fit(LearnerSpec{LinearRegression{}}, d.x, d.y);
  CHECK_THROWS_AS(m.predict(Matrix::Zero(2, 3)), PredictError);
  CHECK_THROWS_AS(fit(LearnerSpec{LinearRegression{}}, Matrix(0, 2), std::vector<double>{}), FitError);
  CHECK_THROWS_AS(validate(LearnerSpec{Knn{0}}), SpecError);
  CHECK_THROWS_AS(validate(LearnerSpec{GradientBoostedTrees{10, 1.5, 3, 2}}), SpecError);
  CHECK_THROWS_AS(validate(LearnerSpec{DecisionTree{0, 1, Task::Regression}}), SpecError);
}

TEST_CASE("display names") {
  CHECK(display_name(LearnerSpec{LinearRegression{}}) == "Linear Reg");
  CHECK(display_name(LearnerSpec{DecisionTree{}}) == "Decision Tree");
  CHECK(display_name(LearnerSpec{Knn{}}) == "KNN");
  CHECK(display_name(make_bagging(LearnerSpec{DecisionTree{}})) == "Bagging Reg");
  CHECK(display_name(LearnerSpec{GradientBoostedTrees{}}) == "GBT Regressor");
}
