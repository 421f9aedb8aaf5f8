#include "gapforge/missingness.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gapforge/error.hpp"
#include "gapforge/random.hpp"

namespace gapforge {

class HeldOutBuilder {
 public:
  static void add(HeldOutValues& h, const std::string& column, std::size_t row, double value) {
    h.cells_[column].push_back({row, value});
  }
};

const std::vector<HeldOutValues::Cell>& HeldOutValues::cells(const std::string& column) const {
  static const std::vector<Cell> kEmpty;
  auto it = cells_.find(column);
  return it == cells_.end() ? kEmpty : it->second;
}

std::size_t HeldOutValues::total() const noexcept {
  std::size_t n = 0;
  for (const auto& [name, cells] : cells_) n += cells.size();
  return n;
}

std::vector<std::string> HeldOutValues::columns() const {
  std::vector<std::string> out;
  for (const auto& [name, cells] : cells_) out.push_back(name);
  return out;
}

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Rebuilds a column with extra missing marks; the hidden values go to `held`.
Column mask_cells(const Column& col, const std::vector<std::uint8_t>& new_marks,
                  HeldOutValues& held) {
  std::vector<double> values(col.values().begin(), col.values().end());
  std::vector<std::uint8_t> missing(col.missing_mask().begin(), col.missing_mask().end());
  for (std::size_t r = 0; r < col.size(); ++r) {
    if (new_marks[r] && !missing[r]) {
      HeldOutBuilder::add(held, col.name(), r, values[r]);
      missing[r] = 1;
    }
  }
  if (col.is_numeric()) return Column::numeric(col.name(), std::move(values), std::move(missing));
  return Column::categorical(col.name(), col.vocabulary(), std::move(values), std::move(missing));
}

}  // namespace

void validate(const MissingnessSpec& spec) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Mcar>) {
          if (m.target_columns.empty()) throw SpecError("target_columns", "must not be empty");
          if (!is_probability(m.rate)) throw SpecError("rate", "must lie in [0, 1]");
        } else if constexpr (std::is_same_v<T, Mar>) {
          if (m.target_column.empty()) throw SpecError("target_column", "must not be empty");
          if (m.driver_column.empty()) throw SpecError("driver_column", "must not be empty");
          if (m.driver_column == m.target_column) {
            throw SpecError("driver_column", "must differ from target_column");
          }
          if (!(m.base_rate > 0.0 && m.base_rate < 1.0)) {
            throw SpecError("base_rate", "must lie in (0, 1)");
          }
          if (!std::isfinite(m.slope)) throw SpecError("slope", "must be finite");
        } else {
          if (m.target_column.empty()) throw SpecError("target_column", "must not be empty");
          if (!(m.quantile > 0.0 && m.quantile < 1.0)) {
            throw SpecError("quantile", "must lie in (0, 1)");
          }
          if (!is_probability(m.rate)) throw SpecError("rate", "must lie in [0, 1]");
        }
      },
      spec.mechanism);
}

std::vector<std::string> target_columns(const MissingnessSpec& spec) {
  return std::visit(
      [](const auto& m) -> std::vector<std::string> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Mcar>) {
          return m.target_columns;
        } else {
          return {m.target_column};
        }
      },
      spec.mechanism);
}

double quantile(std::vector<double> sample, double q) {
  if (sample.empty()) throw UndefinedStatisticError("quantile of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double pos = q * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sample[lo] + frac * (sample[hi] - sample[lo]);
}

InjectionResult inject(const Table& table, const MissingnessSpec& spec) {
  validate(spec);
  for (const auto& name : target_columns(spec)) {
    if (!table.has_column(name)) throw NameError("no column named '" + name + "'");
  }

  const std::size_t n = table.n_rows();
  Rng rng(spec.seed);
  InjectionResult result{table, {}};
  std::vector<Column> columns(table.columns().begin(), table.columns().end());

  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Mcar>) {
          std::set<std::string> done;
          for (const auto& name : m.target_columns) {
            if (!done.insert(name).second) continue;
            const std::size_t idx = *table.find(name);
            std::vector<std::uint8_t> marks(n, 0);
            for (std::size_t r = 0; r < n; ++r) marks[r] = rng.bernoulli(m.rate) ? 1 : 0;
            columns[idx] = mask_cells(columns[idx], marks, result.held_out);
          }
        } else if constexpr (std::is_same_v<T, Mar>) {
          const Column& driver = table.column(m.driver_column);
          if (!driver.is_numeric()) {
            throw PreconditionError("MAR driver column '" + m.driver_column + "' is not numeric");
          }
          if (driver.missing_count() != 0) {
            throw PreconditionError("MAR driver column '" + m.driver_column +
                                    "' has missing cells");
          }
          double mean = 0.0;
          for (double v : driver.values()) mean += v;
          mean = n ? mean / static_cast<double>(n) : 0.0;
          double var = 0.0;
          for (double v : driver.values()) var += (v - mean) * (v - mean);
          const double sd = n ? std::sqrt(var / static_cast<double>(n)) : 0.0;
          const double offset = std::log(m.base_rate / (1.0 - m.base_rate));
          const std::size_t idx = *table.find(m.target_column);
          std::vector<std::uint8_t> marks(n, 0);
          for (std::size_t r = 0; r < n; ++r) {
            const double z = sd > 0.0 ? (driver.value(r) - mean) / sd : 0.0;
            marks[r] = rng.bernoulli(sigmoid(offset + m.slope * z)) ? 1 : 0;
          }
          columns[idx] = mask_cells(columns[idx], marks, result.held_out);
        } else {
          const std::size_t idx = *table.find(m.target_column);
          const Column& target = table.column(idx);
          if (!target.is_numeric()) {
            throw PreconditionError("MNAR target column '" + m.target_column +
                                    "' is not numeric");
          }
          std::vector<std::uint8_t> marks(n, 0);
          if (target.observed_count() > 0) {
            const double cut = quantile(target.observed_values(), m.quantile);
            for (std::size_t r = 0; r < n; ++r) {
              const bool draw = rng.bernoulli(m.rate);
              if (target.is_observed(r) && target.value(r) > cut && draw) marks[r] = 1;
            }
          }
          columns[idx] = mask_cells(columns[idx], marks, result.held_out);
        }
      },
      spec.mechanism);

  result.table = Table(std::move(columns), n);
  return result;
}

double mask_value_dependence(const Table& original, const Table& injected,
                             const std::string& column) {
  const Column& before = original.column(column);
  const Column& after = injected.column(column);
  if (!before.is_numeric()) {
    throw PreconditionError("column '" + column + "' is not numeric");
  }
  if (before.size() != after.size()) {
    throw PreconditionError("tables differ in row count");
  }
  std::vector<double> x;
  std::vector<double> ind;
  for (std::size_t r = 0; r < before.size(); ++r) {
    if (before.is_missing(r)) continue;
    x.push_back(before.value(r));
    ind.push_back(after.is_missing(r) ? 1.0 : 0.0);
  }
  const auto n = static_cast<double>(x.size());
  if (x.empty()) throw UndefinedStatisticError("no observed values in '" + column + "'");
  double mx = 0.0;
  double mi = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    mi += ind[i];
  }
  mx /= n;
  mi /= n;
  double sxx = 0.0;
  double sii = 0.0;
  double sxi = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sii += (ind[i] - mi) * (ind[i] - mi);
    sxi += (x[i] - mx) * (ind[i] - mi);
  }
  if (sxx == 0.0) throw UndefinedStatisticError("column '" + column + "' has zero variance");
  if (sii == 0.0) {
    throw UndefinedStatisticError("missingness indicator of '" + column + "' is constant");
  }
  return sxi / std::sqrt(sxx * sii);
}

}  // namespace gapforge
