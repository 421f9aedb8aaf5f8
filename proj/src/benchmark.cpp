#include "gapforge/benchmark.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "gapforge/error.hpp"
#include "gapforge/metrics.hpp"
#include "gapforge/random.hpp"
#include "json_io.hpp"

namespace gapforge {

namespace {

constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kTestStream = 2;

double score(Metric metric, const std::vector<double>& predicted, const std::vector<double>& truth) {
  switch (metric) {
    case Metric::Mse:
      return mse(predicted, truth);
    case Metric::Rmse:
      return rmse(predicted, truth);
    case Metric::Rmsle:
      return rmsle(predicted, truth);
    case Metric::Accuracy:
      return accuracy(truth, predicted);
    case Metric::F1Macro:
      return f1_macro(truth, predicted);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<std::string> unique_names(std::vector<std::string> names) {
  std::map<std::string, int> total;
  for (const auto& n : names) ++total[n];
  std::map<std::string, int> seen;
  for (auto& n : names) {
    if (total[n] > 1) n += " #" + std::to_string(++seen[n]);
  }
  return names;
}

// Mean for still-missing numeric cells, a dedicated label for categorical ones.
// Only runs after the plan's imputer, so it touches columns that imputer skips.
const ImputerSpec& residual_numeric() {
  static const ImputerSpec spec{strategy::Mean{}, std::nullopt};
  return spec;
}
const ImputerSpec& residual_categorical() {
  static const ImputerSpec spec{strategy::NewCategory{}, std::nullopt};
  return spec;
}

bool has_missing(const Table& t, ColumnKind kind) {
  for (const auto& c : t.columns()) {
    if (c.kind() == kind && c.missing_count() > 0) return true;
  }
  return false;
}

std::pair<Table, Table> impute_pair(const ImputerSpec& spec, const Table& train, const Table& test) {
  const FittedImputer fitted = fit(spec, train);
  return {transform(fitted, train), transform(fitted, test)};
}

void finish_cell(CellResult& cell) {
  if (cell.failed) {
    cell.mean = cell.stddev = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  const auto n = static_cast<double>(cell.trial_values.size());
  double sum = 0.0;
  for (double v : cell.trial_values) sum += v;
  cell.mean = sum / n;
  double ss = 0.0;
  for (double v : cell.trial_values) ss += (v - cell.mean) * (v - cell.mean);
  cell.stddev = cell.trial_values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

void check_plan_against(const BenchmarkPlan& plan, const Table& table) {
  validate(plan);
  const auto idx = table.find(plan.target_column);
  if (!idx) throw PlanError("target column '" + plan.target_column + "' is not in the table");
  const Task task = metric_task(plan.metric);
  const Task target_task = table.column(*idx).is_numeric() ? Task::Regression : Task::Classification;
  if (task != target_task) {
    throw PlanError("metric '" + std::string(to_string(plan.metric)) + "' is a " +
                    std::string(to_string(task)) + " metric but target '" + plan.target_column +
                    "' is " + std::string(to_string(table.column(*idx).kind())));
  }
  for (const auto& l : plan.learners) {
    if (task_of(l) != task) {
      throw PlanError("learner '" + display_name(l) + "' does not match the " +
                      std::string(to_string(task)) + " metric '" +
                      std::string(to_string(plan.metric)) + "'");
    }
  }
  if (plan.missingness) {
    for (const auto& c : target_columns(*plan.missingness)) {
      if (!table.has_column(c)) throw PlanError("missingness targets unknown column '" + c + "'");
    }
  }
}

Table rows_with_target(const Table& table, const std::string& target) {
  const Column& col = table.column(target);
  if (col.missing_count() == 0) return table;
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    if (col.is_observed(r)) keep.push_back(r);
  }
  return table.select_rows(keep);
}

std::string fixed(double v, int decimals) {
  if (std::isnan(v)) return "failed";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::string percent(double fraction) { return format_number(round_half_up(fraction * 100.0, 6)); }

}  // namespace

std::string_view to_string(Metric metric) noexcept {
  switch (metric) {
    case Metric::Mse:
      return "mse";
    case Metric::Rmse:
      return "rmse";
    case Metric::Rmsle:
      return "rmsle";
    case Metric::Accuracy:
      return "accuracy";
    case Metric::F1Macro:
      return "f1_macro";
  }
  return "?";
}

Metric metric_from_string(std::string_view name) {
  for (Metric m : {Metric::Mse, Metric::Rmse, Metric::Rmsle, Metric::Accuracy, Metric::F1Macro}) {
    if (to_string(m) == name) return m;
  }
  throw SpecError("metric", "unknown metric '" + std::string(name) +
                                "' (expected mse, rmse, rmsle, accuracy or f1_macro)");
}

Task metric_task(Metric metric) noexcept {
  return metric == Metric::Accuracy || metric == Metric::F1Macro ? Task::Classification
                                                                 : Task::Regression;
}

bool lower_is_better(Metric metric) noexcept { return metric_task(metric) == Task::Regression; }

std::vector<double> default_train_fractions() {
  std::vector<double> f;
  for (int i = 1; i <= 9; ++i) f.push_back(i / 10.0);
  return f;
}

std::vector<ImputerSpec> comparison_imputers() {
  return {
      ImputerSpec{strategy::Zero{}, std::nullopt},
      ImputerSpec{strategy::Mean{}, std::nullopt},
      ImputerSpec{strategy::Median{}, std::nullopt},
      ImputerSpec{strategy::Iterative{LearnerSpec{GradientBoostedTrees{}}, 3}, std::nullopt},
  };
}

void validate(const BenchmarkPlan& plan) {
  if (plan.train_fractions.empty()) throw SpecError("train_fractions", "must not be empty");
  for (double f : plan.train_fractions) {
    if (!(f > 0.0 && f < 1.0)) throw SpecError("train_fractions", "every fraction must be in (0, 1)");
  }
  if (plan.trials < 1) throw SpecError("trials", "must be >= 1");
  if (plan.imputers.empty()) throw SpecError("imputers", "must not be empty");
  if (plan.learners.empty()) throw SpecError("learners", "must not be empty");
  for (std::size_t i = 0; i < plan.imputers.size(); ++i) {
    try {
      validate(plan.imputers[i]);
    } catch (const SpecError& e) {
      throw SpecError("imputers[" + std::to_string(i) + "]." + e.field(), e.what());
    }
  }
  for (std::size_t i = 0; i < plan.learners.size(); ++i) {
    try {
      validate(plan.learners[i]);
    } catch (const SpecError& e) {
      throw SpecError("learners[" + std::to_string(i) + "]." + e.field(), e.what());
    }
  }
  if (plan.missingness) {
    try {
      validate(*plan.missingness);
    } catch (const SpecError& e) {
      throw SpecError("missingness." + e.field(), e.what());
    }
    for (const auto& c : target_columns(*plan.missingness)) {
      if (c == plan.target_column) {
        throw SpecError("missingness", "must not mask the target column '" + c + "'");
      }
    }
  }
  if (plan.target_column.empty()) throw SpecError("target_column", "must not be empty");
}

const CellResult& BenchmarkReport::cell(std::size_t fraction, std::size_t imputer,
                                        std::size_t learner) const {
  const std::size_t ni = imputer_names.size();
  const std::size_t nl = learner_names.size();
  return cells.at((fraction * ni + imputer) * nl + learner);
}

std::size_t BenchmarkReport::failed_cells() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.failed ? 1 : 0;
  return n;
}

TrialData prepare_trial(const BenchmarkPlan& plan, const Table& table, double train_fraction,
                        int trial) {
  const Table data = rows_with_target(table, plan.target_column);
  const auto t = static_cast<std::uint64_t>(trial);
  const SplitIndices split = split_indices(data.n_rows(), train_fraction, mix_seed(plan.base_seed, t));
  TrialData out{data.select_rows(split.train), data.select_rows(split.test), split.train, split.test};
  if (plan.missingness) {
    const std::uint64_t inject_seed =
        mix_seed(mix_seed(plan.base_seed, t), plan.missingness->seed);
    MissingnessSpec spec = *plan.missingness;
    spec.seed = mix_seed(inject_seed, kTrainStream);
    out.train = inject(out.train, spec).table;
    spec.seed = mix_seed(inject_seed, kTestStream);
    out.test = inject(out.test, spec).table;
  }
  return out;
}

BenchmarkReport run(const BenchmarkPlan& plan, const Table& table) {
  check_plan_against(plan, table);
  using Clock = std::chrono::steady_clock;

  BenchmarkReport report;
  report.plan = plan;
  for (const auto& i : plan.imputers) report.imputer_names.push_back(display_name(i));
  for (const auto& l : plan.learners) report.learner_names.push_back(display_name(l));
  report.imputer_names = unique_names(std::move(report.imputer_names));
  report.learner_names = unique_names(std::move(report.learner_names));

  const std::size_t ni = plan.imputers.size();
  const std::size_t nl = plan.learners.size();
  for (double f : plan.train_fractions) {
    for (std::size_t i = 0; i < ni; ++i) {
      for (std::size_t l = 0; l < nl; ++l) {
        CellResult c;
        c.train_fraction = f;
        c.imputer_index = i;
        c.learner_index = l;
        report.cells.push_back(std::move(c));
      }
    }
  }

  const std::vector<std::string> target{plan.target_column};
  for (std::size_t fi = 0; fi < plan.train_fractions.size(); ++fi) {
    for (int t = 0; t < plan.trials; ++t) {
      auto* cells = &report.cells[fi * ni * nl];
      std::optional<TrialData> trial;
      try {
        trial = prepare_trial(plan, table, plan.train_fractions[fi], t);
      } catch (const std::exception& e) {
        for (std::size_t k = 0; k < ni * nl; ++k) {
          if (!cells[k].failed) cells[k].error = e.what();
          cells[k].failed = true;
        }
        continue;
      }
      const Table train_x = trial->train.without_column(plan.target_column);
      const Table test_x = trial->test.without_column(plan.target_column);

      for (std::size_t i = 0; i < ni; ++i) {
        const auto impute_start = Clock::now();
        std::optional<std::pair<Table, Table>> imputed;
        std::string impute_error;
        try {
          imputed = impute_pair(plan.imputers[i], train_x, test_x);
          if (has_missing(imputed->first, ColumnKind::Numeric) ||
              has_missing(imputed->second, ColumnKind::Numeric)) {
            imputed = impute_pair(residual_numeric(), imputed->first, imputed->second);
          }
          if (has_missing(imputed->first, ColumnKind::Categorical) ||
              has_missing(imputed->second, ColumnKind::Categorical)) {
            imputed = impute_pair(residual_categorical(), imputed->first, imputed->second);
          }
        } catch (const std::exception& e) {
          imputed.reset();
          impute_error = e.what();
        }
        const double impute_seconds =
            std::chrono::duration<double>(Clock::now() - impute_start).count();

        for (std::size_t l = 0; l < nl; ++l) {
          CellResult& cell = cells[i * nl + l];
          cell.seconds += impute_seconds;
          if (!imputed) {
            if (!cell.failed) cell.error = impute_error;
            cell.failed = true;
            continue;
          }
          const auto start = Clock::now();
          try {
            const Table train = imputed->first.with_column(trial->train.column(plan.target_column));
            const Table test = imputed->second.with_column(trial->test.column(plan.target_column));
            const DesignMatrix dtrain = encode(train, plan.target_column);
            const DesignMatrix dtest = encode(test, plan.target_column, dtrain.schema, dtrain.classes);
            const FittedLearner model = fit(plan.learners[l], dtrain);
            cell.trial_values.push_back(score(plan.metric, predict(model, dtest), dtest.target));
          } catch (const std::exception& e) {
            if (!cell.failed) cell.error = e.what();
            cell.failed = true;
          }
          cell.seconds += std::chrono::duration<double>(Clock::now() - start).count();
        }
      }
    }
  }
  for (auto& c : report.cells) finish_cell(c);
  return report;
}

BenchmarkReport compare_imputers(BenchmarkPlan base, const Table& table,
                                 std::vector<ImputerSpec> imputers, LearnerSpec learner) {
  base.imputers = std::move(imputers);
  base.learners = {std::move(learner)};
  return run(base, table);
}

BenchmarkReport compare_learners(BenchmarkPlan base, const Table& table, ImputerSpec imputer,
                                 std::vector<LearnerSpec> learners) {
  base.imputers = {std::move(imputer)};
  base.learners = std::move(learners);
  return run(base, table);
}

std::string report_to_json(const BenchmarkReport& report, const JsonOptions& options) {
  using detail::Json;
  Json j;
  j["plan"] = detail::json_value(report.plan);
  j["imputers"] = report.imputer_names;
  j["learners"] = report.learner_names;
  Json cells = Json::array();
  for (const auto& c : report.cells) {
    Json cell;
    cell["train_fraction"] = c.train_fraction;
    cell["imputer"] = report.imputer_names[c.imputer_index];
    cell["learner"] = report.learner_names[c.learner_index];
    cell["failed"] = c.failed;
    if (c.failed) {
      cell["mean"] = nullptr;
      cell["stddev"] = nullptr;
      cell["error"] = c.error;
    } else {
      cell["mean"] = c.mean;
      cell["stddev"] = c.stddev;
    }
    cell["trials"] = c.trial_values;
    if (options.include_timing) cell["seconds"] = c.seconds;
    cells.push_back(std::move(cell));
  }
  j["cells"] = std::move(cells);
  j["failed_cells"] = report.failed_cells();
  return j.dump(options.indent) + "\n";
}

std::string report_to_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "train_fraction,imputer,learner,metric,mean,stddev,trials,failed,error\n";
  for (const auto& c : report.cells) {
    out << format_number(c.train_fraction) << ','
        << csv_field(report.imputer_names[c.imputer_index]) << ','
        << csv_field(report.learner_names[c.learner_index]) << ',' << to_string(report.plan.metric)
        << ',' << (c.failed ? "" : format_number(c.mean)) << ','
        << (c.failed ? "" : format_number(c.stddev)) << ',' << c.trial_values.size() << ','
        << (c.failed ? "true" : "false") << ',' << csv_field(c.error) << '\n';
  }
  return out.str();
}

std::string report_to_markdown(const BenchmarkReport& report) {
  const std::size_t ni = report.imputer_names.size();
  const std::size_t nl = report.learner_names.size();
  const bool learner_columns = ni == 1 && nl > 1;

  std::vector<std::string> headers;
  std::vector<std::pair<std::size_t, std::size_t>> series;
  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t l = 0; l < nl; ++l) {
      series.emplace_back(i, l);
      if (learner_columns) {
        headers.push_back(report.learner_names[l]);
      } else if (nl == 1) {
        headers.push_back(report.imputer_names[i]);
      } else {
        headers.push_back(report.imputer_names[i] + " / " + report.learner_names[l]);
      }
    }
  }

  const std::string metric(to_string(report.plan.metric));
  std::ostringstream out;
  if (learner_columns) {
    out << "Learner comparison (" << metric << ", imputer: " << report.imputer_names[0] << ")\n\n";
    out << "| Train data size %";
  } else {
    out << "Imputer comparison (" << metric << ", learner: "
        << (nl == 1 ? report.learner_names[0] : std::string("per column")) << ")\n\n";
    out << "| Training data size";
  }
  for (const auto& h : headers) out << " | " << h;
  out << " |\n|---";
  for (std::size_t k = 0; k < headers.size(); ++k) out << "|---:";
  out << "|\n";

  const int decimals = learner_columns ? 2 : 4;
  for (std::size_t fi = 0; fi < report.plan.train_fractions.size(); ++fi) {
    const std::string size = percent(report.plan.train_fractions[fi]);
    out << "| " << (learner_columns ? size : size + "%");
    for (const auto& [i, l] : series) out << " | " << fixed(report.cell(fi, i, l).mean, decimals);
    out << " |\n";
  }
  return out.str();
}

std::string report_to_plot_csv(const BenchmarkReport& report) {
  const std::size_t ni = report.imputer_names.size();
  const std::size_t nl = report.learner_names.size();
  std::ostringstream out;
  out << "fraction,series,value\n";
  for (const auto& c : report.cells) {
    std::string name;
    if (nl == 1) {
      name = report.imputer_names[c.imputer_index];
    } else if (ni == 1) {
      name = report.learner_names[c.learner_index];
    } else {
      name = report.imputer_names[c.imputer_index] + " / " + report.learner_names[c.learner_index];
    }
    out << format_number(c.train_fraction) << ',' << csv_field(name) << ','
        << (c.failed ? "" : format_number(c.mean)) << '\n';
  }
  return out.str();
}

}  // namespace gapforge
