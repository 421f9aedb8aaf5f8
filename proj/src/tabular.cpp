#include "gapforge/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "gapforge/error.hpp"
#include "gapforge/random.hpp"

namespace gapforge {

namespace {

constexpr double kPlaceholder = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string_view to_string(ColumnKind kind) noexcept {
  return kind == ColumnKind::Numeric ? "numeric" : "categorical";
}

Column::Column(std::string name, ColumnKind kind, std::vector<double> values,
               std::vector<std::uint8_t> missing, std::vector<std::string> vocabulary)
    : name_(std::move(name)),
      kind_(kind),
      values_(std::move(values)),
      missing_(std::move(missing)),
      vocabulary_(std::move(vocabulary)) {
  if (missing_.empty()) missing_.assign(values_.size(), 0);
  if (missing_.size() != values_.size()) {
    throw SchemaError("column '" + name_ + "': mask length " + std::to_string(missing_.size()) +
                      " does not match value count " + std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (missing_[i] != 0) {
      missing_[i] = 1;
      values_[i] = kPlaceholder;
      continue;
    }
    const double v = values_[i];
    if (!std::isfinite(v)) {
      throw TypeMismatchError("column '" + name_ + "', row " + std::to_string(i) +
                              ": observed value is not finite");
    }
    if (kind_ == ColumnKind::Categorical &&
        (v < 0 || v != std::floor(v) || v >= static_cast<double>(vocabulary_.size()))) {
      throw TypeMismatchError("column '" + name_ + "', row " + std::to_string(i) +
                              ": category code out of range");
    }
  }
  if (kind_ == ColumnKind::Categorical) {
    std::unordered_set<std::string> seen;
    for (const auto& label : vocabulary_) {
      if (!seen.insert(label).second) {
        throw SchemaError("column '" + name_ + "': duplicate category label '" + label + "'");
      }
    }
  }
}

Column Column::numeric(std::string name, std::vector<double> values,
                       std::vector<std::uint8_t> missing) {
  return Column(std::move(name), ColumnKind::Numeric, std::move(values), std::move(missing), {});
}

Column Column::categorical(std::string name, std::vector<std::string> vocabulary,
                           std::vector<double> codes, std::vector<std::uint8_t> missing) {
  return Column(std::move(name), ColumnKind::Categorical, std::move(codes), std::move(missing),
                std::move(vocabulary));
}

Column Column::from_labels(std::string name,
                           const std::vector<std::optional<std::string>>& labels) {
  std::vector<std::string> vocabulary;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<double> codes(labels.size(), 0.0);
  std::vector<std::uint8_t> missing(labels.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i]) {
      missing[i] = 1;
      continue;
    }
    auto [it, inserted] = index.try_emplace(*labels[i], vocabulary.size());
    if (inserted) vocabulary.push_back(*labels[i]);
    codes[i] = static_cast<double>(it->second);
  }
  return categorical(std::move(name), std::move(vocabulary), std::move(codes), std::move(missing));
}

std::size_t Column::missing_count() const noexcept {
  return static_cast<std::size_t>(std::count(missing_.begin(), missing_.end(), std::uint8_t{1}));
}

std::vector<double> Column::observed_values() const {
  std::vector<double> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    if (is_observed(i)) out.push_back(values_[i]);
  }
  return out;
}

Column Column::select_rows(std::span<const std::size_t> rows) const {
  std::vector<double> values(rows.size());
  std::vector<std::uint8_t> missing(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    values[i] = values_.at(rows[i]);
    missing[i] = missing_[rows[i]];
  }
  return Column(name_, kind_, std::move(values), std::move(missing), vocabulary_);
}

Column Column::renamed(std::string name) const {
  Column copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

bool operator==(const Column& a, const Column& b) {
  if (a.name_ != b.name_ || a.kind_ != b.kind_ || a.missing_ != b.missing_ ||
      a.vocabulary_ != b.vocabulary_) {
    return false;
  }
  for (std::size_t i = 0; i < a.values_.size(); ++i) {
    if (a.missing_[i] == 0 && a.values_[i] != b.values_[i]) return false;
  }
  return true;
}

namespace {

std::size_t leading_size(const std::vector<Column>& columns) {
  return columns.empty() ? 0 : columns.front().size();
}

}  // namespace

Table::Table(std::vector<Column> columns) : n_rows_(leading_size(columns)) {
  *this = Table(std::move(columns), n_rows_);
}

Table::Table(std::vector<Column> columns, std::size_t n_rows)
    : columns_(std::move(columns)), n_rows_(n_rows) {
  std::unordered_set<std::string> names;
  for (const auto& c : columns_) {
    if (!names.insert(c.name()).second) {
      throw SchemaError("duplicate column name '" + c.name() + "'");
    }
    if (c.size() != n_rows_) {
      throw SchemaError("column '" + c.name() + "' has " + std::to_string(c.size()) +
                        " rows, expected " + std::to_string(n_rows_));
    }
  }
}

const Column& Table::column(std::string_view name) const {
  if (auto idx = find(name)) return columns_[*idx];
  throw NameError("no column named '" + std::string(name) + "'");
}

std::optional<std::size_t> Table::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name() == name) return i;
  }
  return std::nullopt;
}

std::vector<std::string> Table::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns_.size());
  for (const auto& c : columns_) names.push_back(c.name());
  return names;
}

std::size_t Table::missing_cells() const noexcept {
  std::size_t total = 0;
  for (const auto& c : columns_) total += c.missing_count();
  return total;
}

Table Table::select_rows(std::span<const std::size_t> rows) const {
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (const auto& c : columns_) cols.push_back(c.select_rows(rows));
  return Table(std::move(cols), rows.size());
}

Table Table::without_column(std::string_view name) const {
  const auto idx = find(name);
  if (!idx) throw NameError("no column named '" + std::string(name) + "'");
  std::vector<Column> cols = columns_;
  cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(*idx));
  return Table(std::move(cols), n_rows_);
}

Table Table::with_column(Column column) const {
  if (!columns_.empty() && column.size() != n_rows_) {
    throw SchemaError("column '" + column.name() + "' has " + std::to_string(column.size()) +
                      " rows, expected " + std::to_string(n_rows_));
  }
  std::vector<Column> cols = columns_;
  const std::size_t rows = columns_.empty() ? column.size() : n_rows_;
  if (auto idx = find(column.name())) {
    cols[*idx] = std::move(column);
  } else {
    cols.push_back(std::move(column));
  }
  return Table(std::move(cols), rows);
}

bool operator==(const Table& a, const Table& b) {
  return a.n_rows_ == b.n_rows_ && a.columns_ == b.columns_;
}

MissingnessProfile profile(const Table& table) {
  MissingnessProfile p;
  p.n_rows = table.n_rows();
  for (const auto& c : table.columns()) {
    const std::size_t count = c.missing_count();
    const double fraction =
        table.n_rows() == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(table.n_rows());
    p.columns.push_back({c.name(), count, fraction});
    p.total_missing_cells += count;
  }
  return p;
}

SplitIndices split_indices(std::size_t n_rows, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0) || train_fraction > 1.0) {
    throw DomainError("train_fraction must lie in (0, 1], got " + format_number(train_fraction));
  }
  if (train_fraction < 1.0 && n_rows < 2) {
    throw DomainError("a split with train_fraction < 1 needs at least 2 rows");
  }
  Rng rng(seed);
  std::vector<std::size_t> perm = rng.permutation(n_rows);
  std::size_t train_count = n_rows;
  if (train_fraction < 1.0) {
    const auto rounded =
        static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n_rows) + 0.5));
    train_count = std::clamp<std::size_t>(rounded, 1, n_rows - 1);
  }
  SplitIndices out;
  out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(train_count));
  out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(train_count), perm.end());
  return out;
}

std::pair<Table, Table> train_test_split(const Table& table, double train_fraction,
                                         std::uint64_t seed) {
  const SplitIndices idx = split_indices(table.n_rows(), train_fraction, seed);
  return {table.select_rows(idx.train), table.select_rows(idx.test)};
}

Table drop_rows_with_missing(const Table& table) {
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    const bool complete = std::all_of(table.columns().begin(), table.columns().end(),
                                      [r](const Column& c) { return c.is_observed(r); });
    if (complete) keep.push_back(r);
  }
  return table.select_rows(keep);
}

Table drop_columns_by_missing_fraction(const Table& table, double max_fraction) {
  if (!(max_fraction >= 0.0 && max_fraction <= 1.0)) {
    throw DomainError("max_fraction must lie in [0, 1]");
  }
  std::vector<Column> keep;
  for (const auto& c : table.columns()) {
    const double fraction = table.n_rows() == 0 ? 0.0
                                                : static_cast<double>(c.missing_count()) /
                                                      static_cast<double>(table.n_rows());
    if (!(fraction > max_fraction)) keep.push_back(c);
  }
  return Table(std::move(keep), table.n_rows());
}

}  // namespace gapforge
