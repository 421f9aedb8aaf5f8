#include "gapforge/imputers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gapforge/error.hpp"

namespace gapforge {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_predictive(const ImputeStrategy& s) {
  return std::holds_alternative<strategy::Regression>(s) ||
         std::holds_alternative<strategy::Iterative>(s);
}

const LearnerSpec* learner_of(const ImputeStrategy& s) {
  if (const auto* r = std::get_if<strategy::Regression>(&s)) return &r->learner;
  if (const auto* i = std::get_if<strategy::Iterative>(&s)) return &i->learner;
  return nullptr;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// Most frequent observed label; ties go to the earliest vocabulary entry.
std::string mode_of(const Column& col) {
  std::vector<std::size_t> counts(col.vocabulary().size(), 0);
  for (std::size_t r = 0; r < col.size(); ++r) {
    if (col.is_observed(r)) ++counts[col.code(r)];
  }
  const auto it = std::max_element(counts.begin(), counts.end());
  return col.vocabulary()[static_cast<std::size_t>(it - counts.begin())];
}

void require_observed(const Column& col) {
  if (col.observed_count() == 0) {
    throw FitError("column '" + col.name() + "' has no observed training cells");
  }
}

// Statistic used wherever a column needs a typical value: mean or mode.
FittedImputer::Fill central_fill(const Column& col) {
  require_observed(col);
  FittedImputer::Fill f;
  if (col.is_numeric()) {
    f.number = mean_of(col.observed_values());
  } else {
    f.label = mode_of(col);
  }
  return f;
}

// Copy of `col` with the given rows set to `fill_values` (numeric) or to
// labels (categorical). Rows must currently be missing.
Column fill_numeric(const Column& col, const std::vector<std::size_t>& rows,
                    const std::vector<double>& fill_values) {
  std::vector<double> values(col.values().begin(), col.values().end());
  std::vector<std::uint8_t> missing(col.missing_mask().begin(), col.missing_mask().end());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    values[rows[i]] = fill_values[i];
    missing[rows[i]] = 0;
  }
  return Column::numeric(col.name(), std::move(values), std::move(missing));
}

Column fill_label(const Column& col, const std::vector<std::size_t>& rows, const std::string& label) {
  std::vector<std::string> vocabulary = col.vocabulary();
  auto it = std::find(vocabulary.begin(), vocabulary.end(), label);
  const auto code = static_cast<double>(it - vocabulary.begin());
  if (it == vocabulary.end()) vocabulary.push_back(label);
  std::vector<double> values(col.values().begin(), col.values().end());
  std::vector<std::uint8_t> missing(col.missing_mask().begin(), col.missing_mask().end());
  for (std::size_t r : rows) {
    values[r] = code;
    missing[r] = 0;
  }
  return Column::categorical(col.name(), std::move(vocabulary), std::move(values),
                             std::move(missing));
}

Column fill_with(const Column& col, const FittedImputer::Fill& fill) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < col.size(); ++r) {
    if (col.is_missing(r)) rows.push_back(r);
  }
  if (rows.empty()) return col;
  if (col.is_numeric()) return fill_numeric(col, rows, std::vector<double>(rows.size(), fill.number));
  return fill_label(col, rows, fill.label);
}

std::vector<std::size_t> missing_rows(const Column& col) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < col.size(); ++r) {
    if (col.is_missing(r)) rows.push_back(r);
  }
  return rows;
}

std::vector<std::size_t> observed_rows(const Column& col) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < col.size(); ++r) {
    if (col.is_observed(r)) rows.push_back(r);
  }
  return rows;
}

Table prefilled(const Table& table, const std::map<std::string, FittedImputer::Fill>& prefill) {
  std::vector<Column> cols;
  cols.reserve(table.n_cols());
  for (const auto& c : table.columns()) {
    auto it = prefill.find(c.name());
    cols.push_back(it == prefill.end() ? c : fill_with(c, it->second));
  }
  return Table(std::move(cols), table.n_rows());
}

// Predictions for `rows` of column `target`, using features from `current`.
std::vector<double> predict_rows(const FittedLearner& model, const FeatureSchema& schema,
                                 const Table& current, const std::vector<std::size_t>& rows) {
  const Table subset = current.select_rows(rows);
  return model.predict(encode_features(subset, schema));
}

}  // namespace

bool applies_to(const ImputeStrategy& s, ColumnKind kind) {
  if (std::holds_alternative<strategy::NextValid>(s)) return true;
  const bool categorical_only =
      std::holds_alternative<strategy::Mode>(s) || std::holds_alternative<strategy::NewCategory>(s);
  return categorical_only == (kind == ColumnKind::Categorical);
}

std::string strategy_tag(const ImputeStrategy& s) {
  return std::visit(overloaded{
                        [](const strategy::Zero&) { return std::string("zero"); },
                        [](const strategy::Constant&) { return std::string("constant"); },
                        [](const strategy::Mean&) { return std::string("mean"); },
                        [](const strategy::Median&) { return std::string("median"); },
                        [](const strategy::Mode&) { return std::string("mode"); },
                        [](const strategy::NewCategory&) { return std::string("new_category"); },
                        [](const strategy::NextValid&) { return std::string("next_valid"); },
                        [](const strategy::Knn&) { return std::string("knn"); },
                        [](const strategy::Regression&) { return std::string("regression"); },
                        [](const strategy::Iterative&) { return std::string("iterative"); },
                    },
                    s);
}

std::string display_name(const ImputerSpec& spec) {
  return std::visit(
      overloaded{
          [](const strategy::Zero&) { return std::string("Impute by 0"); },
          [](const strategy::Constant& c) { return "Impute by " + format_number(c.value); },
          [](const strategy::Mean&) { return std::string("Impute by mean"); },
          [](const strategy::Median&) { return std::string("Impute by median"); },
          [](const strategy::Mode&) { return std::string("Impute by mode"); },
          [](const strategy::NewCategory& c) { return "Impute by new category '" + c.label + "'"; },
          [](const strategy::NextValid&) { return std::string("Impute by next valid"); },
          [](const strategy::Knn& k) { return "Impute by KNN (k=" + std::to_string(k.k) + ")"; },
          [](const strategy::Regression& r) {
            return "Regression (" + display_name(r.learner) + ")";
          },
          [](const strategy::Iterative&) { return std::string("ML Method"); },
      },
      spec.strategy);
}

void validate(const ImputerSpec& spec) {
  std::visit(overloaded{
                 [](const strategy::Constant& c) {
                   if (!std::isfinite(c.value)) throw SpecError("value", "must be finite");
                 },
                 [](const strategy::NewCategory& c) {
                   if (c.label.empty()) throw SpecError("label", "must not be empty");
                 },
                 [](const strategy::Knn& k) {
                   if (k.k < 1) throw SpecError("k", "must be >= 1");
                 },
                 [](const strategy::Regression& r) { validate(r.learner); },
                 [](const strategy::Iterative& i) {
                   if (i.rounds < 1) throw SpecError("rounds", "must be >= 1");
                   validate(i.learner);
                 },
                 [](const auto&) {},
             },
             spec.strategy);
  if (const LearnerSpec* l = learner_of(spec.strategy); l && task_of(*l) != Task::Regression) {
    throw SpecError("learner", "imputation learners must be regression learners");
  }
  if (spec.target_columns && spec.target_columns->empty()) {
    throw SpecError("target_columns", "must be \"all\" or a nonempty list");
  }
}

const FeatureSource& FittedImputer::schema_of(const std::string& column) const {
  for (const auto& s : schema_.sources) {
    if (s.column == column) return s;
  }
  throw NameError("imputer was not fitted on a column named '" + column + "'");
}

FittedImputer fit(const ImputerSpec& spec, const Table& train) {
  validate(spec);
  FittedImputer m;
  m.spec_ = spec;
  m.schema_ = feature_schema(train);

  if (spec.target_columns) {
    std::set<std::string> seen;
    for (const auto& name : *spec.target_columns) {
      const Column& col = train.column(name);
      if (!applies_to(spec.strategy, col.kind())) {
        throw FitError("strategy '" + strategy_tag(spec.strategy) + "' does not apply to " +
                       std::string(to_string(col.kind())) + " column '" + name + "'");
      }
      if (seen.insert(name).second) m.targets_.push_back(name);
    }
  } else {
    for (const auto& col : train.columns()) {
      if (applies_to(spec.strategy, col.kind())) m.targets_.push_back(col.name());
    }
  }

  std::visit(
      overloaded{
          [&](const strategy::Zero&) {
            for (const auto& c : m.targets_) m.fills_[c].number = 0.0;
          },
          [&](const strategy::Constant& k) {
            for (const auto& c : m.targets_) m.fills_[c].number = k.value;
          },
          [&](const strategy::Mean&) {
            for (const auto& c : m.targets_) {
              require_observed(train.column(c));
              m.fills_[c].number = mean_of(train.column(c).observed_values());
            }
          },
          [&](const strategy::Median&) {
            for (const auto& c : m.targets_) {
              require_observed(train.column(c));
              m.fills_[c].number = median_of(train.column(c).observed_values());
            }
          },
          [&](const strategy::Mode&) {
            for (const auto& c : m.targets_) {
              require_observed(train.column(c));
              m.fills_[c].label = mode_of(train.column(c));
            }
          },
          [&](const strategy::NewCategory& k) {
            for (const auto& c : m.targets_) m.fills_[c].label = k.label;
          },
          [&](const strategy::NextValid&) {
            for (const auto& c : m.targets_) m.fills_[c] = central_fill(train.column(c));
          },
          [&](const strategy::Knn&) {
            for (const auto& c : m.targets_) m.fills_[c] = central_fill(train.column(c));
            for (const auto& col : train.columns()) {
              if (!col.is_numeric()) continue;
              m.knn_columns_.push_back(col.name());
              const auto obs = col.observed_values();
              double mu = 0.0;
              double sd = 1.0;
              if (!obs.empty()) {
                mu = mean_of(obs);
                double var = 0.0;
                for (double v : obs) var += (v - mu) * (v - mu);
                sd = std::sqrt(var / static_cast<double>(obs.size()));
                if (!(sd > 0.0)) sd = 1.0;
              }
              m.knn_mean_.push_back(mu);
              m.knn_scale_.push_back(sd);
            }
            const std::size_t p = m.knn_columns_.size();
            m.knn_rows_.assign(train.n_rows(), std::vector<double>(p, 0.0));
            m.knn_raw_.assign(train.n_rows(), std::vector<double>(p, 0.0));
            m.knn_missing_.assign(train.n_rows(), std::vector<std::uint8_t>(p, 1));
            for (std::size_t j = 0; j < p; ++j) {
              const Column& col = train.column(m.knn_columns_[j]);
              for (std::size_t r = 0; r < train.n_rows(); ++r) {
                if (col.is_missing(r)) continue;
                m.knn_missing_[r][j] = 0;
                m.knn_raw_[r][j] = col.value(r);
                m.knn_rows_[r][j] = (col.value(r) - m.knn_mean_[j]) / m.knn_scale_[j];
              }
            }
          },
          [&](const auto&) {},
      },
      spec.strategy);

  if (!is_predictive(spec.strategy)) return m;

  // Predictive strategies: pre-fill every column, then train one model per
  // target column and round. Within a round every model sees the previous
  // round's fills, so round one coincides with plain regression imputation.
  const LearnerSpec& learner = *learner_of(spec.strategy);
  const int n_rounds = std::holds_alternative<strategy::Iterative>(spec.strategy)
                           ? std::get<strategy::Iterative>(spec.strategy).rounds
                           : 1;
  for (const auto& col : train.columns()) m.prefill_[col.name()] = central_fill(col);
  for (const auto& c : m.targets_) m.fills_[c] = m.prefill_[c];

  std::stable_sort(m.targets_.begin(), m.targets_.end(), [&](const auto& a, const auto& b) {
    return train.column(a).missing_count() < train.column(b).missing_count();
  });
  for (const auto& c : m.targets_) {
    const std::vector<std::string> exclude{c};
    m.feature_schemas_[c] = feature_schema(train, exclude);
    if (train.column(c).observed_count() < 2) {
      throw FitError("column '" + c + "' needs at least 2 observed training rows for regression");
    }
  }

  Table current = prefilled(train, m.prefill_);
  for (int round = 0; round < n_rounds; ++round) {
    FittedImputer::Round models;
    for (const auto& c : m.targets_) {
      const Column& original = train.column(c);
      const auto rows = observed_rows(original);
      const Matrix x = encode_features(current.select_rows(rows), m.feature_schemas_.at(c));
      std::vector<double> y(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) y[i] = original.value(rows[i]);
      models.emplace(c, fit(learner, x, y));
    }
    if (round + 1 < n_rounds) {
      std::vector<Column> updated;
      for (const auto& c : m.targets_) {
        const auto rows = missing_rows(train.column(c));
        if (rows.empty()) continue;
        const auto pred = predict_rows(models.at(c), m.feature_schemas_.at(c), current, rows);
        updated.push_back(fill_numeric(train.column(c), rows, pred));
      }
      for (auto& col : updated) current = current.with_column(std::move(col));
    }
    m.rounds_.push_back(std::move(models));
  }
  return m;
}

Table transform(const FittedImputer& m, const Table& table) {
  for (const auto& src : m.schema_.sources) {
    const auto idx = table.find(src.column);
    if (!idx) throw TransformError("table lacks fitted column '" + src.column + "'");
    if (table.column(*idx).kind() != src.kind) {
      throw TransformError("column '" + src.column + "' was " + std::string(to_string(src.kind)) +
                           " at fit time, is " +
                           std::string(to_string(table.column(*idx).kind())) + " now");
    }
  }

  const ImputeStrategy& s = m.spec_.strategy;
  std::vector<Column> out(table.columns().begin(), table.columns().end());
  auto slot = [&](const std::string& name) -> Column& { return out[*table.find(name)]; };

  if (std::holds_alternative<strategy::NextValid>(s)) {
    for (const auto& c : m.targets_) {
      const Column& col = table.column(c);
      const auto rows = missing_rows(col);
      if (rows.empty()) continue;
      std::vector<double> fill(rows.size());
      std::optional<std::size_t> next;  // next observed row below
      std::optional<std::size_t> last;  // last observed row in the column
      for (std::size_t r = col.size(); r-- > 0;) {
        if (col.is_observed(r)) {
          last = last ? last : r;
        }
      }
      std::size_t i = rows.size();
      for (std::size_t r = col.size(); r-- > 0;) {
        if (col.is_observed(r)) {
          next = r;
          continue;
        }
        --i;
        if (next) {
          fill[i] = col.value(*next);
        } else if (last) {
          fill[i] = col.value(*last);
        } else {
          fill[i] = std::numeric_limits<double>::quiet_NaN();
        }
      }
      if (!last) {
        slot(c) = fill_with(col, m.fills_.at(c));
        continue;
      }
      if (col.is_numeric()) {
        slot(c) = fill_numeric(col, rows, fill);
      } else {
        std::vector<double> values(col.values().begin(), col.values().end());
        std::vector<std::uint8_t> missing(col.missing_mask().begin(), col.missing_mask().end());
        for (std::size_t k = 0; k < rows.size(); ++k) {
          values[rows[k]] = fill[k];
          missing[rows[k]] = 0;
        }
        slot(c) = Column::categorical(col.name(), col.vocabulary(), std::move(values),
                                      std::move(missing));
      }
    }
    return Table(std::move(out), table.n_rows());
  }

  if (std::holds_alternative<strategy::Knn>(s)) {
    const int k = std::get<strategy::Knn>(s).k;
    const std::size_t p = m.knn_columns_.size();
    const std::size_t n_train = m.knn_rows_.size();
    std::vector<const Column*> cols;
    for (const auto& name : m.knn_columns_) cols.push_back(&table.column(name));
    std::vector<std::size_t> target_index;
    for (const auto& c : m.targets_) {
      target_index.push_back(static_cast<std::size_t>(
          std::find(m.knn_columns_.begin(), m.knn_columns_.end(), c) - m.knn_columns_.begin()));
    }
    std::vector<std::vector<double>> fills(m.targets_.size());
    std::vector<std::vector<std::size_t>> fill_rows(m.targets_.size());

    std::vector<double> query(p);
    std::vector<double> dist(n_train);
    std::vector<std::uint8_t> usable(n_train);
    std::vector<std::pair<double, std::size_t>> candidates;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
      bool any = false;
      for (std::size_t t = 0; t < m.targets_.size(); ++t) any = any || cols[target_index[t]]->is_missing(r);
      if (!any) continue;
      for (std::size_t j = 0; j < p; ++j) {
        query[j] = cols[j]->is_observed(r) ? (cols[j]->value(r) - m.knn_mean_[j]) / m.knn_scale_[j]
                                           : 0.0;
      }
      // Distance over mutually observed coordinates, rescaled by total/used.
      for (std::size_t t = 0; t < n_train; ++t) {
        double sum = 0.0;
        std::size_t used = 0;
        for (std::size_t j = 0; j < p; ++j) {
          if (cols[j]->is_missing(r) || m.knn_missing_[t][j]) continue;
          const double d = query[j] - m.knn_rows_[t][j];
          sum += d * d;
          ++used;
        }
        usable[t] = used > 0;
        dist[t] = used > 0 ? std::sqrt(sum * static_cast<double>(p) / static_cast<double>(used)) : 0.0;
      }
      for (std::size_t ti = 0; ti < m.targets_.size(); ++ti) {
        const std::size_t j = target_index[ti];
        if (cols[j]->is_observed(r)) continue;
        candidates.clear();
        for (std::size_t t = 0; t < n_train; ++t) {
          if (usable[t] && !m.knn_missing_[t][j]) candidates.emplace_back(dist[t], t);
        }
        double value = m.fills_.at(m.targets_[ti]).number;
        if (!candidates.empty()) {
          const auto kk = std::min(candidates.size(), static_cast<std::size_t>(k));
          std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(kk),
                            candidates.end());
          double sum = 0.0;
          for (std::size_t i = 0; i < kk; ++i) sum += m.knn_raw_[candidates[i].second][j];
          value = sum / static_cast<double>(kk);
        }
        fill_rows[ti].push_back(r);
        fills[ti].push_back(value);
      }
    }
    for (std::size_t ti = 0; ti < m.targets_.size(); ++ti) {
      if (fill_rows[ti].empty()) continue;
      const std::string& c = m.targets_[ti];
      slot(c) = fill_numeric(table.column(c), fill_rows[ti], fills[ti]);
    }
    return Table(std::move(out), table.n_rows());
  }

  if (is_predictive(s)) {
    Table current = prefilled(table, m.prefill_);
    for (const auto& models : m.rounds_) {
      std::vector<Column> updated;
      for (const auto& c : m.targets_) {
        const auto rows = missing_rows(table.column(c));
        if (rows.empty()) continue;
        const auto pred = predict_rows(models.at(c), m.feature_schemas_.at(c), current, rows);
        updated.push_back(fill_numeric(table.column(c), rows, pred));
      }
      for (auto& col : updated) current = current.with_column(std::move(col));
    }
    for (const auto& c : m.targets_) slot(c) = current.column(c);
    return Table(std::move(out), table.n_rows());
  }

  for (const auto& c : m.targets_) slot(c) = fill_with(table.column(c), m.fills_.at(c));
  return Table(std::move(out), table.n_rows());
}

Table fit_transform(const ImputerSpec& spec, const Table& table) {
  return transform(fit(spec, table), table);
}

}  // namespace gapforge
