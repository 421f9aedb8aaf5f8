#include "gapforge/spec_io.hpp"

#include <cmath>
#include <set>

#include "gapforge/error.hpp"
#include "json_io.hpp"

namespace gapforge {

namespace detail {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Re-raise a validation error with the field path of the enclosing document.
template <class F>
void validated(const std::string& path, F&& check) {
  try {
    check();
  } catch (const SpecError& e) {
    if (path.empty()) throw;
    const std::string prefix = "field '" + e.field() + "': ";
    std::string what = e.what();
    if (what.rfind(prefix, 0) == 0) what.erase(0, prefix.size());
    throw SpecError(join(path, e.field()), what);
  }
}

// Field access over one JSON object; rejects fields nobody asked for.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SpecError(path_.empty() ? "(document)" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return join(path_, key); }

  const Json* get(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  const Json& required(const std::string& key) {
    const Json* v = get(key);
    if (!v) throw SpecError(field(key), "is required");
    return *v;
  }

  double number(const std::string& key, double fallback) {
    const Json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number()) throw SpecError(field(key), "expected a number");
    return v->get<double>();
  }

  long long integer(const std::string& key, long long fallback) {
    const Json* v = get(key);
    if (!v) return fallback;
    if (v->is_number_integer()) return v->get<long long>();
    if (v->is_number_float()) {
      const double d = v->get<double>();
      if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    throw SpecError(field(key), "expected an integer");
  }

  int small_int(const std::string& key, int fallback) {
    const long long v = integer(key, fallback);
    if (v < -1000000000LL || v > 1000000000LL) throw SpecError(field(key), "out of range");
    return static_cast<int>(v);
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    const Json* v = get(key);
    if (!v) return fallback;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer() && v->get<long long>() >= 0) return v->get<std::uint64_t>();
    throw SpecError(field(key), "expected a non-negative integer");
  }

  std::optional<std::uint64_t> optional_seed(const std::string& key) {
    if (!j_.contains(key) || j_.at(key).is_null()) {
      used_.insert(key);
      return std::nullopt;
    }
    return seed(key, 0);
  }

  bool boolean(const std::string& key, bool fallback) {
    const Json* v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw SpecError(field(key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const Json* v = get(key);
    if (!v) return fallback;
    if (!v->is_string()) throw SpecError(field(key), "expected a string");
    return v->get<std::string>();
  }

  std::string required_string(const std::string& key) {
    const Json& v = required(key);
    if (!v.is_string()) throw SpecError(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<std::string> strings(const std::string& key) {
    const Json& v = required(key);
    if (!v.is_array()) throw SpecError(field(key), "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& s : v) {
      if (!s.is_string()) throw SpecError(field(key), "expected an array of strings");
      out.push_back(s.get<std::string>());
    }
    return out;
  }

  const Json& array(const std::string& key) {
    const Json& v = required(key);
    if (!v.is_array()) throw SpecError(field(key), "expected an array");
    return v;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) throw SpecError(field(item.key()), "unknown field");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Task task_from(const std::string& name, const std::string& field) {
  if (name == "regression") return Task::Regression;
  if (name == "classification") return Task::Classification;
  throw SpecError(field, "expected \"regression\" or \"classification\"");
}

std::string indexed(const std::string& path, const std::string& key, std::size_t i) {
  return join(path, key) + "[" + std::to_string(i) + "]";
}

}  // namespace

Json json_value(const MissingnessSpec& spec) {
  Json j = std::visit(overloaded{
                          [](const Mcar& m) {
                            return Json{{"mechanism", "mcar"},
                                        {"target_columns", m.target_columns},
                                        {"rate", m.rate}};
                          },
                          [](const Mar& m) {
                            return Json{{"mechanism", "mar"},
                                        {"target_column", m.target_column},
                                        {"driver_column", m.driver_column},
                                        {"base_rate", m.base_rate},
                                        {"slope", m.slope}};
                          },
                          [](const Mnar& m) {
                            return Json{{"mechanism", "mnar"},
                                        {"target_column", m.target_column},
                                        {"quantile", m.quantile},
                                        {"rate", m.rate}};
                          },
                      },
                      spec.mechanism);
  j["seed"] = spec.seed;
  return j;
}

Json json_value(const LearnerSpec& spec) {
  return std::visit(overloaded{
                        [](const LinearRegression& l) {
                          return Json{{"kind", "linear"}, {"ridge", l.ridge}};
                        },
                        [](const DecisionTree& t) {
                          return Json{{"kind", "tree"},
                                      {"max_depth", t.max_depth},
                                      {"min_leaf", t.min_leaf},
                                      {"task", std::string(to_string(t.task))}};
                        },
                        [](const Knn& k) {
                          return Json{{"kind", "knn"},
                                      {"k", k.k},
                                      {"task", std::string(to_string(k.task))}};
                        },
                        [](const Bagging& b) {
                          Json j{{"kind", "bagging"}};
                          j["base"] = b.base ? json_value(*b.base) : Json();
                          j["n_estimators"] = b.n_estimators;
                          j["sample_fraction"] = b.sample_fraction;
                          j["with_replacement"] = b.with_replacement;
                          j["seed"] = b.seed;
                          return j;
                        },
                        [](const GradientBoostedTrees& g) {
                          return Json{{"kind", "gbt"},
                                      {"n_trees", g.n_trees},
                                      {"learning_rate", g.learning_rate},
                                      {"max_depth", g.max_depth},
                                      {"min_leaf", g.min_leaf}};
                        },
                    },
                    spec.kind);
}

Json json_value(const ImputerSpec& spec) {
  Json j{{"strategy", strategy_tag(spec.strategy)}};
  std::visit(overloaded{
                 [&](const strategy::Constant& c) { j["value"] = c.value; },
                 [&](const strategy::NewCategory& c) { j["label"] = c.label; },
                 [&](const strategy::Knn& k) { j["k"] = k.k; },
                 [&](const strategy::Regression& r) { j["learner"] = json_value(r.learner); },
                 [&](const strategy::Iterative& i) {
                   j["learner"] = json_value(i.learner);
                   j["rounds"] = i.rounds;
                 },
                 [](const auto&) {},
             },
             spec.strategy);
  if (spec.target_columns) {
    j["target_columns"] = *spec.target_columns;
  } else {
    j["target_columns"] = "all";
  }
  return j;
}

Json json_value(const BenchmarkPlan& plan) {
  Json j;
  j["train_fractions"] = plan.train_fractions;
  j["trials"] = plan.trials;
  j["base_seed"] = plan.base_seed;
  Json imputers = Json::array();
  for (const auto& i : plan.imputers) imputers.push_back(json_value(i));
  j["imputers"] = std::move(imputers);
  Json learners = Json::array();
  for (const auto& l : plan.learners) learners.push_back(json_value(l));
  j["learners"] = std::move(learners);
  j["missingness"] = plan.missingness ? json_value(*plan.missingness) : Json();
  j["metric"] = std::string(to_string(plan.metric));
  j["target_column"] = plan.target_column;
  return j;
}

Json json_value(const SyntheticSpec& spec) {
  return Json{{"task", std::string(to_string(spec.task))},
              {"n_rows", spec.n_rows},
              {"n_numeric_features", spec.n_numeric_features},
              {"categorical_levels", spec.categorical_levels},
              {"seed", spec.seed},
              {"coefficient_seed", spec.coefficient_seed},
              {"noise_stddev", spec.noise_stddev},
              {"feature_offset", spec.feature_offset},
              {"feature_correlation", spec.feature_correlation},
              {"nonlinearity", spec.nonlinearity},
              {"class_count", spec.class_count},
              {"separation", spec.separation},
              {"target_name", spec.target_name}};
}

MissingnessSpec missingness_from_json(const Json& j, const std::string& path,
                                      std::optional<std::uint64_t> default_seed) {
  Reader r(j, path);
  const std::string tag = r.required_string("mechanism");
  MissingnessSpec spec;
  if (tag == "mcar") {
    Mcar m;
    m.target_columns = r.strings("target_columns");
    m.rate = r.number("rate", m.rate);
    spec.mechanism = m;
  } else if (tag == "mar") {
    Mar m;
    m.target_column = r.required_string("target_column");
    m.driver_column = r.required_string("driver_column");
    m.base_rate = r.number("base_rate", m.base_rate);
    m.slope = r.number("slope", m.slope);
    spec.mechanism = m;
  } else if (tag == "mnar") {
    Mnar m;
    m.target_column = r.required_string("target_column");
    m.quantile = r.number("quantile", m.quantile);
    m.rate = r.number("rate", m.rate);
    spec.mechanism = m;
  } else {
    throw SpecError(r.field("mechanism"), "unknown mechanism '" + tag + "' (expected mcar, mar or mnar)");
  }
  spec.seed = r.seed("seed", default_seed.value_or(0));
  r.finish();
  validated(path, [&] { validate(spec); });
  return spec;
}

LearnerSpec learner_from_json(const Json& j, const std::string& path) {
  Reader r(j, path);
  const std::string tag = r.required_string("kind");
  LearnerSpec spec;
  if (tag == "linear") {
    LinearRegression l;
    l.ridge = r.number("ridge", l.ridge);
    spec.kind = l;
  } else if (tag == "tree") {
    DecisionTree t;
    t.max_depth = r.small_int("max_depth", t.max_depth);
    t.min_leaf = r.small_int("min_leaf", t.min_leaf);
    t.task = task_from(r.string("task", "regression"), r.field("task"));
    spec.kind = t;
  } else if (tag == "knn") {
    Knn k;
    k.k = r.small_int("k", k.k);
    k.task = task_from(r.string("task", "regression"), r.field("task"));
    spec.kind = k;
  } else if (tag == "bagging") {
    LearnerSpec base = learner_from_json(r.required("base"), r.field("base"));
    Bagging b;
    b.n_estimators = r.small_int("n_estimators", b.n_estimators);
    b.sample_fraction = r.number("sample_fraction", b.sample_fraction);
    b.with_replacement = r.boolean("with_replacement", b.with_replacement);
    b.seed = r.seed("seed", b.seed);
    spec = make_bagging(std::move(base), b.n_estimators, b.sample_fraction, b.with_replacement,
                        b.seed);
  } else if (tag == "gbt") {
    GradientBoostedTrees g;
    g.n_trees = r.small_int("n_trees", g.n_trees);
    g.learning_rate = r.number("learning_rate", g.learning_rate);
    g.max_depth = r.small_int("max_depth", g.max_depth);
    g.min_leaf = r.small_int("min_leaf", g.min_leaf);
    spec.kind = g;
  } else {
    throw SpecError(r.field("kind"),
                    "unknown learner '" + tag + "' (expected linear, tree, knn, bagging or gbt)");
  }
  r.finish();
  validated(path, [&] { validate(spec); });
  return spec;
}

ImputerSpec imputer_from_json(const Json& j, const std::string& path) {
  Reader r(j, path);
  const std::string tag = r.required_string("strategy");
  ImputerSpec spec;
  if (tag == "zero") {
    spec.strategy = strategy::Zero{};
  } else if (tag == "constant") {
    const Json& v = r.required("value");
    if (!v.is_number()) throw SpecError(r.field("value"), "expected a number");
    spec.strategy = strategy::Constant{v.get<double>()};
  } else if (tag == "mean") {
    spec.strategy = strategy::Mean{};
  } else if (tag == "median") {
    spec.strategy = strategy::Median{};
  } else if (tag == "mode") {
    spec.strategy = strategy::Mode{};
  } else if (tag == "new_category") {
    spec.strategy = strategy::NewCategory{r.string("label", "missing")};
  } else if (tag == "next_valid") {
    spec.strategy = strategy::NextValid{};
  } else if (tag == "knn") {
    strategy::Knn k;
    k.k = r.small_int("k", k.k);
    spec.strategy = k;
  } else if (tag == "regression") {
    spec.strategy = strategy::Regression{learner_from_json(r.required("learner"), r.field("learner"))};
  } else if (tag == "iterative") {
    strategy::Iterative it{learner_from_json(r.required("learner"), r.field("learner"))};
    it.rounds = r.small_int("rounds", it.rounds);
    spec.strategy = std::move(it);
  } else {
    throw SpecError(r.field("strategy"), "unknown strategy '" + tag + "'");
  }
  if (const Json* t = r.get("target_columns")) {
    if (t->is_string() && t->get<std::string>() == "all") {
      spec.target_columns.reset();
    } else {
      spec.target_columns = r.strings("target_columns");
    }
  }
  r.finish();
  validated(path, [&] { validate(spec); });
  return spec;
}

BenchmarkPlan plan_from_json(const Json& j, std::optional<std::uint64_t> default_seed) {
  Reader r(j, "");
  BenchmarkPlan plan;
  if (const Json* f = r.get("train_fractions")) {
    if (!f->is_array()) throw SpecError("train_fractions", "expected an array of numbers");
    plan.train_fractions.clear();
    for (const auto& v : *f) {
      if (!v.is_number()) throw SpecError("train_fractions", "expected an array of numbers");
      plan.train_fractions.push_back(v.get<double>());
    }
  }
  plan.trials = r.small_int("trials", plan.trials);
  plan.base_seed = r.seed("base_seed", default_seed.value_or(0));
  const Json& imputers = r.array("imputers");
  for (std::size_t i = 0; i < imputers.size(); ++i) {
    plan.imputers.push_back(imputer_from_json(imputers[i], indexed("", "imputers", i)));
  }
  const Json& learners = r.array("learners");
  for (std::size_t i = 0; i < learners.size(); ++i) {
    plan.learners.push_back(learner_from_json(learners[i], indexed("", "learners", i)));
  }
  if (const Json* m = r.get("missingness")) {
    plan.missingness = missingness_from_json(*m, "missingness", std::nullopt);
  }
  plan.metric = metric_from_string(r.string("metric", "mse"));
  plan.target_column = r.string("target_column", plan.target_column);
  r.finish();
  validate(plan);
  return plan;
}

SyntheticSpec synthetic_from_json(const Json& j, std::optional<std::uint64_t> default_seed) {
  Reader r(j, "");
  SyntheticSpec s;
  s.task = task_from(r.string("task", "regression"), "task");
  const long long rows = r.integer("n_rows", static_cast<long long>(s.n_rows));
  if (rows < 0) throw SpecError("n_rows", "must be >= 10");
  s.n_rows = static_cast<std::size_t>(rows);
  s.n_numeric_features = r.small_int("n_numeric_features", s.n_numeric_features);
  if (const Json* levels = r.get("categorical_levels")) {
    if (!levels->is_array()) throw SpecError("categorical_levels", "expected an array of integers");
    for (const auto& v : *levels) {
      if (!v.is_number_integer()) throw SpecError("categorical_levels", "expected an array of integers");
      s.categorical_levels.push_back(v.get<int>());
    }
  }
  s.seed = r.seed("seed", default_seed.value_or(0));
  s.coefficient_seed = r.seed("coefficient_seed", s.coefficient_seed);
  s.noise_stddev = r.number("noise_stddev", s.noise_stddev);
  s.feature_offset = r.number("feature_offset", s.feature_offset);
  s.feature_correlation = r.number("feature_correlation", s.feature_correlation);
  s.nonlinearity = r.number("nonlinearity", s.nonlinearity);
  s.class_count = r.small_int("class_count", s.class_count);
  s.separation = r.number("separation", s.separation);
  s.target_name = r.string("target_name", s.target_name);
  r.finish();
  validate(s);
  return s;
}

}  // namespace detail

namespace {

detail::Json parse_document(std::string_view text) {
  try {
    return detail::Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError("(document)", std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

MissingnessSpec parse_missingness_spec(std::string_view json,
                                       std::optional<std::uint64_t> default_seed) {
  return detail::missingness_from_json(parse_document(json), "", default_seed);
}

ImputerSpec parse_imputer_spec(std::string_view json) {
  return detail::imputer_from_json(parse_document(json), "");
}

LearnerSpec parse_learner_spec(std::string_view json) {
  return detail::learner_from_json(parse_document(json), "");
}

BenchmarkPlan parse_benchmark_plan(std::string_view json, std::optional<std::uint64_t> default_seed) {
  return detail::plan_from_json(parse_document(json), default_seed);
}

SyntheticSpec parse_synthetic_spec(std::string_view json, std::optional<std::uint64_t> default_seed) {
  return detail::synthetic_from_json(parse_document(json), default_seed);
}

std::string to_json(const MissingnessSpec& spec) { return detail::json_value(spec).dump(2); }
std::string to_json(const ImputerSpec& spec) { return detail::json_value(spec).dump(2); }
std::string to_json(const LearnerSpec& spec) { return detail::json_value(spec).dump(2); }
std::string to_json(const BenchmarkPlan& plan) { return detail::json_value(plan).dump(2); }
std::string to_json(const SyntheticSpec& spec) { return detail::json_value(spec).dump(2); }

}  // namespace gapforge
