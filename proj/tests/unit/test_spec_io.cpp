#include <doctest.h>

#include "gapforge/error.hpp"
#include "gapforge/spec_io.hpp"

using namespace gapforge;

namespace {

std::string field_of(auto&& call) {
  try {
    call();
  } catch (const SpecError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("missingness specs round trip") {
  const auto m = parse_missingness_spec(R"({"mechanism":"mnar","target_column":"x0","quantile":0.8,"rate":0.9,"seed":12})");
  const auto* mnar = std::get_if<Mnar>(&m.mechanism);
  REQUIRE(mnar != nullptr);
  CHECK(mnar->quantile == 0.8);
  CHECK(m.seed == 12);
  CHECK(to_json(parse_missingness_spec(to_json(m))) == to_json(m));

  const auto mar = parse_missingness_spec(
      R"({"mechanism":"mar","target_column":"a","driver_column":"b","slope":2})", 99);
  CHECK(mar.seed == 99);
  CHECK(std::get<Mar>(mar.mechanism).base_rate == 0.5);

  const auto mcar = parse_missingness_spec(R"({"mechanism":"mcar","target_columns":["a","b"],"rate":0.2})");
  CHECK(mcar.seed == 0);
  CHECK(std::get<Mcar>(mcar.mechanism).target_columns.size() == 2);
}

TEST_CASE("imputer and learner specs round trip") {
  const char* doc = R"({"strategy":"iterative","learner":{"kind":"gbt","n_trees":50},"rounds":4,"target_columns":["x1"]})";
  const ImputerSpec s = parse_imputer_spec(doc);
  const auto& it = std::get<strategy::Iterative>(s.strategy);
  CHECK(it.rounds == 4);
  CHECK(std::get<GradientBoostedTrees>(it.learner.kind).n_trees == 50);
  CHECK(std::get<GradientBoostedTrees>(it.learner.kind).learning_rate == 0.1);
  REQUIRE(s.target_columns.has_value());
  CHECK(to_json(parse_imputer_spec(to_json(s))) == to_json(s));

  CHECK_FALSE(parse_imputer_spec(R"({"strategy":"mean","target_columns":"all"})").target_columns);
  CHECK(std::get<strategy::NewCategory>(parse_imputer_spec(R"({"strategy":"new_category"})").strategy).label ==
        "missing");

  const LearnerSpec bag = parse_learner_spec(
      R"({"kind":"bagging","base":{"kind":"tree","task":"classification"},"n_estimators":7,"seed":3})");
  CHECK(task_of(bag) == Task::Classification);
  CHECK(std::get<Bagging>(bag.kind).n_estimators == 7);
  CHECK(to_json(parse_learner_spec(to_json(bag))) == to_json(bag));
}

TEST_CASE("plans and synthetic specs round trip") {
  const char* doc = R"({
    "train_fractions": [0.2, 0.8], "trials": 3,
    "imputers": [{"strategy":"zero"}, {"strategy":"knn","k":3}],
    "learners": [{"kind":"linear"}],
    "missingness": {"mechanism":"mcar","target_columns":["x0"],"rate":0.1},
    "metric": "rmsle"})";
  const BenchmarkPlan p = parse_benchmark_plan(doc, 5);
  CHECK(p.base_seed == 5);
  CHECK(p.metric == Metric::Rmsle);
  CHECK(p.target_column == "target");
  CHECK(p.missingness->seed == 0);
  CHECK(to_json(parse_benchmark_plan(to_json(p))) == to_json(p));

  const BenchmarkPlan defaults = parse_benchmark_plan(R"({"imputers":[{"strategy":"mean"}],"learners":[{"kind":"linear"}]})");
  CHECK(defaults.train_fractions.size() == 9);
  CHECK(defaults.trials == 5);
  CHECK_FALSE(defaults.missingness);

  const SyntheticSpec s = parse_synthetic_spec(R"({"task":"classification","n_rows":50,"categorical_levels":[3]})", 8);
  CHECK(s.seed == 8);
  CHECK(s.task == Task::Classification);
  CHECK(to_json(parse_synthetic_spec(to_json(s))) == to_json(s));
  CHECK(parse_synthetic_spec(R"({"seed":2})", 8).seed == 2);
}

TEST_CASE("errors name the offending field") {
  CHECK(field_of([] { parse_learner_spec(R"({"kind":"tree","max_dept":3})"); }) == "max_dept");
  CHECK(field_of([] { parse_learner_spec(R"({"kind":"svm"})"); }) == "kind");
  CHECK(field_of([] { parse_learner_spec(R"({"kind":"knn","k":0})"); }) == "k");
  CHECK(field_of([] { parse_imputer_spec(R"({"strategy":"knn","k":"three"})"); }) == "k");
  CHECK(field_of([] { parse_missingness_spec(R"({"mechanism":"mcar","rate":1.5,"target_columns":["a"]})"); }) ==
        "rate");
  CHECK(field_of([] { parse_missingness_spec(R"({"mechanism":"mnar"})"); }) == "target_column");
  CHECK(field_of([] { parse_benchmark_plan(R"({"imputers":[{"strategy":"mean"},{"strategy":"iterative","learner":{"kind":"gbt","n_trees":-1}}],"learners":[{"kind":"linear"}]})"); }) ==
        "imputers[1].learner.n_trees");
  CHECK(field_of([] { parse_benchmark_plan(R"({"imputers":[],"learners":[{"kind":"linear"}]})"); }) == "imputers");
  CHECK(field_of([] { parse_benchmark_plan(R"({"imputers":[{"strategy":"mean"}],"learners":[{"kind":"linear"}],"metric":"auc"})"); }) ==
        "metric");
  CHECK(field_of([] { parse_synthetic_spec(R"({"n_rows":3})"); }) == "n_rows");
  CHECK(field_of([] { parse_imputer_spec("{not json"); }) == "(document)");
  CHECK(field_of([] { parse_imputer_spec("[1]"); }) != "<no error>");
}
