#include "tree_builder.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace gapforge::detail {

PresortedSample::PresortedSample(const Matrix& features, std::span<const std::size_t> rows)
    : rows_(rows.begin(), rows.end()) {
  const auto p = static_cast<std::size_t>(features.cols());
  const std::size_t m = rows_.size();
  values_.assign(p, std::vector<double>(m));
  order_.assign(p, std::vector<std::uint32_t>(m));
  for (std::size_t f = 0; f < p; ++f) {
    auto& vals = values_[f];
    for (std::size_t pos = 0; pos < m; ++pos) {
      vals[pos] = features(static_cast<Eigen::Index>(rows_[pos]), static_cast<Eigen::Index>(f));
    }
    auto& ord = order_[f];
    std::iota(ord.begin(), ord.end(), std::uint32_t{0});
    std::sort(ord.begin(), ord.end(), [&vals](std::uint32_t a, std::uint32_t b) {
      return vals[a] < vals[b] || (vals[a] == vals[b] && a < b);
    });
  }
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = -std::numeric_limits<double>::infinity();
};

double midpoint(double a, double b) {
  const double mid = a + (b - a) / 2.0;
  return mid < b ? mid : a;
}

class Grower {
 public:
  Grower(const PresortedSample& sample, std::span<const double> target, const TreeParams& params)
      : sample_(sample), params_(params), m_(sample.size()), p_(sample.n_features()) {
    y_.resize(m_);
    for (std::size_t pos = 0; pos < m_; ++pos) y_[pos] = target[sample.row(pos)];
    order_.reserve(p_);
    for (std::size_t f = 0; f < p_; ++f) order_.push_back(sample.order(f));
    goes_left_.assign(m_, 0);
    scratch_.resize(m_);
    if (params_.task == Task::Classification) {
      counts_.assign(params_.n_classes, 0);
      left_counts_.assign(params_.n_classes, 0);
      right_counts_.assign(params_.n_classes, 0);
    }
  }

  TreeModel grow() {
    TreeModel tree;
    tree.nodes.push_back({});
    if (m_ == 0) return tree;
    if (p_ == 0) {
      std::vector<std::uint32_t> all(m_);
      std::iota(all.begin(), all.end(), std::uint32_t{0});
      tree.nodes[0].value = leaf_value(all, 0, m_).first;
      return tree;
    }

    struct Work {
      int node;
      std::size_t begin;
      std::size_t end;
      int depth;
    };
    std::vector<Work> stack{{0, 0, m_, 0}};
    while (!stack.empty()) {
      const Work w = stack.back();
      stack.pop_back();
      const auto [value, pure] = leaf_value(order_[0], w.begin, w.end);
      tree.nodes[static_cast<std::size_t>(w.node)].value = value;
      const std::size_t n = w.end - w.begin;
      const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
      if (pure || w.depth >= params_.max_depth || n < 2 * min_leaf) continue;

      const Split split = params_.task == Task::Regression ? best_regression_split(w.begin, w.end)
                                                           : best_gini_split(w.begin, w.end);
      if (split.feature < 0) continue;

      const std::size_t n_left = partition(split, w.begin, w.end);
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back({});
      tree.nodes.push_back({});
      TreeNode& node = tree.nodes[static_cast<std::size_t>(w.node)];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, w.begin + n_left, w.end, w.depth + 1});
      stack.push_back({left, w.begin, w.begin + n_left, w.depth + 1});
    }
    return tree;
  }

 private:
  // (value, is_pure) over positions ord[b, e).
  std::pair<double, bool> leaf_value(const std::vector<std::uint32_t>& ord, std::size_t b,
                                     std::size_t e) {
    if (params_.task == Task::Regression) {
      double sum = 0.0;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t i = b; i < e; ++i) {
        const double v = y_[ord[i]];
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      return {sum / static_cast<double>(e - b), lo == hi};
    }
    std::fill(counts_.begin(), counts_.end(), 0);
    for (std::size_t i = b; i < e; ++i) ++counts_[static_cast<std::size_t>(y_[ord[i]])];
    std::size_t best = 0;
    std::size_t classes_present = 0;
    for (std::size_t k = 0; k < counts_.size(); ++k) {
      if (counts_[k] > 0) ++classes_present;
      if (counts_[k] > counts_[best]) best = k;
    }
    return {static_cast<double>(best), classes_present <= 1};
  }

  // Maximizes S_L^2/n_L + S_R^2/n_R over node-centered targets, which is
  // equivalent to minimizing the children's summed squared error.
  Split best_regression_split(std::size_t b, std::size_t e) {
    const std::size_t n = e - b;
    const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
    double mean = 0.0;
    for (std::size_t i = b; i < e; ++i) mean += y_[order_[0][i]];
    mean /= static_cast<double>(n);
    double total = 0.0;
    for (std::size_t i = b; i < e; ++i) total += y_[order_[0][i]] - mean;

    Split best;
    for (std::size_t f = 0; f < p_; ++f) {
      const auto& ord = order_[f];
      double left_sum = 0.0;
      for (std::size_t i = b; i + 1 < e; ++i) {
        left_sum += y_[ord[i]] - mean;
        const std::size_t n_left = i - b + 1;
        const std::size_t n_right = n - n_left;
        if (n_right < min_leaf) break;
        if (n_left < min_leaf) continue;
        const double v = sample_.value(f, ord[i]);
        const double next = sample_.value(f, ord[i + 1]);
        if (!(v < next)) continue;
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(n_left) +
                             right_sum * right_sum / static_cast<double>(n_right);
        if (score > best.score) best = {static_cast<int>(f), midpoint(v, next), score};
      }
    }
    return best;
  }

  // Maximizes sum_k cL_k^2/n_L + sum_k cR_k^2/n_R, i.e. minimizes weighted Gini.
  Split best_gini_split(std::size_t b, std::size_t e) {
    const std::size_t n = e - b;
    const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
    std::fill(counts_.begin(), counts_.end(), 0);
    for (std::size_t i = b; i < e; ++i) ++counts_[static_cast<std::size_t>(y_[order_[0][i]])];
    double node_sumsq = 0.0;
    for (auto c : counts_) node_sumsq += static_cast<double>(c) * static_cast<double>(c);

    Split best;
    for (std::size_t f = 0; f < p_; ++f) {
      const auto& ord = order_[f];
      std::fill(left_counts_.begin(), left_counts_.end(), 0);
      right_counts_ = counts_;
      double left_sumsq = 0.0;
      double right_sumsq = node_sumsq;
      for (std::size_t i = b; i + 1 < e; ++i) {
        const auto k = static_cast<std::size_t>(y_[ord[i]]);
        left_sumsq += 2.0 * static_cast<double>(left_counts_[k]) + 1.0;
        right_sumsq -= 2.0 * static_cast<double>(right_counts_[k]) - 1.0;
        ++left_counts_[k];
        --right_counts_[k];
        const std::size_t n_left = i - b + 1;
        const std::size_t n_right = n - n_left;
        if (n_right < min_leaf) break;
        if (n_left < min_leaf) continue;
        const double v = sample_.value(f, ord[i]);
        const double next = sample_.value(f, ord[i + 1]);
        if (!(v < next)) continue;
        const double score = left_sumsq / static_cast<double>(n_left) +
                             right_sumsq / static_cast<double>(n_right);
        if (score > best.score) best = {static_cast<int>(f), midpoint(v, next), score};
      }
    }
    return best;
  }

  // Stable-partitions every feature order on [b, e); returns the left count.
  std::size_t partition(const Split& split, std::size_t b, std::size_t e) {
    const auto f = static_cast<std::size_t>(split.feature);
    std::size_t n_left = 0;
    for (std::size_t i = b; i < e; ++i) {
      const std::uint32_t pos = order_[f][i];
      const bool left = sample_.value(f, pos) <= split.threshold;
      goes_left_[pos] = left ? 1 : 0;
      n_left += left ? 1 : 0;
    }
    for (auto& ord : order_) {
      std::size_t l = b;
      std::size_t r = 0;
      for (std::size_t i = b; i < e; ++i) {
        const std::uint32_t pos = ord[i];
        if (goes_left_[pos]) {
          ord[l++] = pos;
        } else {
          scratch_[r++] = pos;
        }
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r),
                ord.begin() + static_cast<std::ptrdiff_t>(l));
    }
    return n_left;
  }

  const PresortedSample& sample_;
  TreeParams params_;
  std::size_t m_;
  std::size_t p_;
  std::vector<double> y_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> scratch_;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> left_counts_;
  std::vector<std::size_t> right_counts_;
};

}  // namespace

TreeModel grow_tree(const PresortedSample& sample, std::span<const double> target,
                    const TreeParams& params) {
  return Grower(sample, target, params).grow();
}

}  // namespace gapforge::detail
