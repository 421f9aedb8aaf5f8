#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gapforge {

enum class ColumnKind { Numeric, Categorical };

std::string_view to_string(ColumnKind kind) noexcept;

/// A named column with an explicit per-cell missingness mask.
///
/// Numeric columns hold finite reals; categorical columns hold integer codes
/// into `vocabulary()` (stored as doubles so both kinds share one layout).
/// Cells marked missing carry a NaN placeholder that no computation reads.
class Column {
 public:
  static Column numeric(std::string name, std::vector<double> values,
                        std::vector<std::uint8_t> missing = {});
  static Column categorical(std::string name, std::vector<std::string> vocabulary,
                            std::vector<double> codes, std::vector<std::uint8_t> missing = {});
  /// Build a categorical column from labels; `std::nullopt` marks a missing cell.
  /// The vocabulary is built in first-occurrence order.
  static Column from_labels(std::string name, const std::vector<std::optional<std::string>>& labels);

  const std::string& name() const noexcept { return name_; }
  ColumnKind kind() const noexcept { return kind_; }
  bool is_numeric() const noexcept { return kind_ == ColumnKind::Numeric; }
  bool is_categorical() const noexcept { return kind_ == ColumnKind::Categorical; }
  std::size_t size() const noexcept { return values_.size(); }

  bool is_missing(std::size_t row) const { return missing_[row] != 0; }
  bool is_observed(std::size_t row) const { return missing_[row] == 0; }
  std::size_t missing_count() const noexcept;
  std::size_t observed_count() const noexcept { return size() - missing_count(); }

  /// Raw storage: numeric value or category code; NaN at missing cells.
  double value(std::size_t row) const { return values_[row]; }
  std::size_t code(std::size_t row) const { return static_cast<std::size_t>(values_[row]); }
  const std::string& label(std::size_t row) const { return vocabulary_[code(row)]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<const std::uint8_t> missing_mask() const noexcept { return missing_; }
  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }

  /// Values at observed positions, in row order.
  std::vector<double> observed_values() const;

  Column select_rows(std::span<const std::size_t> rows) const;
  Column renamed(std::string name) const;

  friend bool operator==(const Column& a, const Column& b);

 private:
  Column(std::string name, ColumnKind kind, std::vector<double> values,
         std::vector<std::uint8_t> missing, std::vector<std::string> vocabulary);

  std::string name_;
  ColumnKind kind_ = ColumnKind::Numeric;
  std::vector<double> values_;
  std::vector<std::uint8_t> missing_;
  std::vector<std::string> vocabulary_;
};

/// Immutable column-major table. Column names are unique and all columns share
/// one row count.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<Column> columns);
  /// A table whose row count is fixed even when it has no columns.
  Table(std::vector<Column> columns, std::size_t n_rows);

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_cols() const noexcept { return columns_.size(); }
  std::span<const Column> columns() const noexcept { return columns_; }
  const Column& column(std::size_t index) const { return columns_.at(index); }
  /// Throws NameError when absent.
  const Column& column(std::string_view name) const;
  std::optional<std::size_t> find(std::string_view name) const;
  bool has_column(std::string_view name) const { return find(name).has_value(); }
  std::vector<std::string> column_names() const;
  std::size_t missing_cells() const noexcept;

  Table select_rows(std::span<const std::size_t> rows) const;
  Table without_column(std::string_view name) const;
  /// Replace the column of the same name, or append it.
  Table with_column(Column column) const;

  friend bool operator==(const Table& a, const Table& b);

 private:
  std::vector<Column> columns_;
  std::size_t n_rows_ = 0;
};

struct ColumnMissing {
  std::string name;
  std::size_t missing_count = 0;
  double missing_fraction = 0.0;
};

struct MissingnessProfile {
  std::vector<ColumnMissing> columns;
  std::size_t total_missing_cells = 0;
  std::size_t n_rows = 0;
};

/// Per-column missing counts, read from the mask alone.
MissingnessProfile profile(const Table& table);

// ---------------------------------------------------------------------------
// CSV

/// {"NaN", "", "null", "undefined", "NA", "na"}.
std::set<std::string> default_missing_tokens();

struct CsvOptions {
  std::set<std::string> missing_tokens = default_missing_tokens();
  std::map<std::string, ColumnKind> schema_hint;
};

/// Parse comma-delimited text with a header row. Fields may be quoted with `"`
/// (a doubled quote escapes). Unquoted fields are whitespace-trimmed.
Table load_csv(std::istream& in, const CsvOptions& options = {});
Table load_csv(std::string_view text, const CsvOptions& options = {});
Table load_csv_file(const std::string& path, const CsvOptions& options = {});

void write_csv(const Table& table, std::ostream& out, std::string_view missing_token = "NaN");
std::string write_csv(const Table& table, std::string_view missing_token = "NaN");

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

// ---------------------------------------------------------------------------
// Splitting and removal

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle then cut. train count = round-half-up(fraction * n), clamped so
/// both parts are nonempty when fraction < 1.
SplitIndices split_indices(std::size_t n_rows, double train_fraction, std::uint64_t seed);
std::pair<Table, Table> train_test_split(const Table& table, double train_fraction,
                                         std::uint64_t seed);

Table drop_rows_with_missing(const Table& table);
/// Removes columns whose missing fraction is strictly greater than `max_fraction`.
Table drop_columns_by_missing_fraction(const Table& table, double max_fraction);

}  // namespace gapforge
