#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gapforge/learners.hpp"

namespace gapforge::detail {

/// A training sample (row indices into a feature matrix, duplicates allowed)
/// with each feature's sample positions presorted by value. Growing a tree
/// only partitions these orders, so one presort serves every tree grown on the
/// same sample.
class PresortedSample {
 public:
  PresortedSample(const Matrix& features, std::span<const std::size_t> rows);

  std::size_t size() const noexcept { return rows_.size(); }
  std::size_t n_features() const noexcept { return values_.size(); }
  std::size_t row(std::size_t pos) const { return rows_[pos]; }
  double value(std::size_t feature, std::size_t pos) const { return values_[feature][pos]; }
  const std::vector<std::uint32_t>& order(std::size_t feature) const { return order_[feature]; }

 private:
  std::vector<std::size_t> rows_;
  std::vector<std::vector<double>> values_;        // [feature][pos]
  std::vector<std::vector<std::uint32_t>> order_;  // [feature] positions sorted by value
};

struct TreeParams {
  int max_depth = 6;
  int min_leaf = 2;
  Task task = Task::Regression;
  std::size_t n_classes = 0;
};

/// Greedy CART growth. `target` is indexed by matrix row.
TreeModel grow_tree(const PresortedSample& sample, std::span<const double> target,
                    const TreeParams& params);

}  // namespace gapforge::detail
