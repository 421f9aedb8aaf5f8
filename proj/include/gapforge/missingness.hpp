#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "gapforge/tabular.hpp"

namespace gapforge {

/// Every observed target cell is masked independently with probability `rate`.
struct Mcar {
  std::vector<std::string> target_columns;
  double rate = 0.0;
};

/// Row i's target cell is masked with probability
/// sigmoid(logit(base_rate) + slope * z_i), z the standardized driver value.
struct Mar {
  std::string target_column;
  std::string driver_column;
  double base_rate = 0.5;
  double slope = 0.0;
};

/// Target cells strictly above the column's `quantile` are masked with
/// probability `rate`; cells at or below it are untouched.
struct Mnar {
  std::string target_column;
  double quantile = 0.5;
  double rate = 1.0;
};

struct MissingnessSpec {
  std::variant<Mcar, Mar, Mnar> mechanism;
  std::uint64_t seed = 0;
};

/// Throws SpecError naming the first invalid field.
void validate(const MissingnessSpec& spec);

/// Names of the columns a spec may mask.
std::vector<std::string> target_columns(const MissingnessSpec& spec);

/// Values hidden by an injection, kept apart from the table so that nothing
/// downstream of `inject` can read them by accident. Only test oracles and
/// diagnostics should consult it.
class HeldOutValues {
 public:
  struct Cell {
    std::size_t row;
    double value;
  };

  /// Newly masked cells of `column`, ascending by row. Empty when none.
  const std::vector<Cell>& cells(const std::string& column) const;
  std::size_t total() const noexcept;
  std::vector<std::string> columns() const;

 private:
  friend class HeldOutBuilder;
  std::map<std::string, std::vector<Cell>> cells_;
};

struct InjectionResult {
  Table table;
  HeldOutValues held_out;
};

/// OR new missing marks into the table's mask according to `spec`.
/// Never unmasks a cell and never changes an observed value.
InjectionResult inject(const Table& table, const MissingnessSpec& spec);

/// Point-biserial correlation between "observed in `original` but missing in
/// `injected`" and the original values of a numeric column, over the rows
/// observed in `original`.
double mask_value_dependence(const Table& original, const Table& injected,
                             const std::string& column);

/// q-quantile of a sample with linear interpolation between order statistics.
double quantile(std::vector<double> sample, double q);

}  // namespace gapforge
