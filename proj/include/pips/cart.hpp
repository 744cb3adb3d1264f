#pragma once

// Greedy binary regression tree. Splits maximise the total reduction of the
// squared error summed over every output column. Candidate thresholds are
// midpoints between consecutive distinct feature values (best splitter) or
// one uniform draw inside the node's value range (random splitter, used by
// extremely randomized trees).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "pips/model.hpp"
#include "pips/random.hpp"

namespace pips {

enum class Splitter { Best, Random };

struct TreeOptions {
  int max_depth = -1;  ///< negative: unlimited
  int min_samples_leaf = 1;
  int max_features = 0;  ///< 0: every feature; otherwise a fresh random subset per node
  Splitter splitter = Splitter::Best;
  bool record_splits = false;
  std::uint64_t seed = 0;
};

/// One accepted split, for inspection.
struct SplitRecord {
  int depth = 0;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  std::vector<int> candidates;
  /// Range of the chosen feature inside the node.
  double node_min = 0.0;
  double node_max = 0.0;
};

/// Row order of every feature column, sorted by (value, row). Lets
/// depth-limited trees refit on the same features without re-sorting.
struct PresortedColumns {
  std::vector<std::vector<std::uint32_t>> order;

  static PresortedColumns build(const Matrix& x) {
    PresortedColumns p;
    p.order.resize(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
      auto& o = p.order[static_cast<std::size_t>(f)];
      o.resize(static_cast<std::size_t>(x.rows()));
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = static_cast<std::uint32_t>(i);
      std::sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) {
        const double va = x(a, f), vb = x(b, f);
        return va < vb || (va == vb && a < b);
      });
    }
    return p;
  }
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(TreeOptions options) : options_(options) {}

  /// `presorted`, when given, must come from PresortedColumns::build(x).
  void fit(const Matrix& x, const Matrix& y, const PresortedColumns* presorted = nullptr) {
    if (x.rows() == 0) throw InvalidArgument("tree: empty training set");
    if (options_.min_samples_leaf < 1) throw InvalidArgument("tree: min_samples_leaf must be >= 1");
    if (options_.max_features < 0 || options_.max_features > x.cols()) {
      throw InvalidArgument("tree: max_features must lie in [1, m]");
    }
    nodes_.clear();
    values_.clear();
    splits_.clear();
    n_outputs_ = y.cols();
    rng_.emplace(options_.seed);
    std::vector<std::uint32_t> rows(static_cast<std::size_t>(x.rows()));
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<std::uint32_t>(i);
    sort_buffer_.resize(rows.size());
    presorted_ = presorted;
    if (presorted_ != nullptr) in_node_.assign(rows.size(), 0);
    grow(x, y, rows, 0, rows.size(), 0);
    presorted_ = nullptr;
    rng_.reset();
  }

  /// Leaf value for one query row.
  const double* leaf_value(const double* row) const {
    std::size_t id = 0;
    while (nodes_[id].feature >= 0) {
      id = row[nodes_[id].feature] <= nodes_[id].threshold ? nodes_[id].left : nodes_[id].right;
    }
    return values_.data() + nodes_[id].value * static_cast<std::size_t>(n_outputs_);
  }

  Matrix predict(const Matrix& x) const {
    Matrix out(x.rows(), n_outputs_);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double* v = leaf_value(x.row(i).data());
      for (Eigen::Index o = 0; o < n_outputs_; ++o) out(i, o) = v[o];
    }
    return out;
  }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
  }
  const std::vector<SplitRecord>& splits() const noexcept { return splits_; }
  const TreeOptions& options() const noexcept { return options_; }

  /// Root split as (feature, threshold); nullopt for a single-leaf tree.
  std::optional<std::pair<int, double>> root_split() const {
    if (nodes_.empty() || nodes_[0].feature < 0) return std::nullopt;
    return std::make_pair(nodes_[0].feature, nodes_[0].threshold);
  }

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::size_t left = 0, right = 0;
    std::size_t value = 0;  // leaf value slot
  };

  struct Candidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    double node_min = 0.0, node_max = 0.0;
  };

  // Sum of squares of per-output sums divided by count; the split gain is
  // score(left) + score(right) - score(parent).
  static double score(const std::vector<double>& sums, double count) {
    double s = 0.0;
    for (double v : sums) s += v * v;
    return s / count;
  }

  std::size_t make_leaf(const Matrix& y, const std::vector<std::uint32_t>& rows, std::size_t begin, std::size_t end) {
    Node leaf;
    leaf.value = values_.size() / static_cast<std::size_t>(n_outputs_);
    const double count = static_cast<double>(end - begin);
    for (Eigen::Index o = 0; o < n_outputs_; ++o) {
      double s = 0.0;
      for (std::size_t i = begin; i < end; ++i) s += y(rows[i], o);
      values_.push_back(s / count);
    }
    nodes_.push_back(leaf);
    return nodes_.size() - 1;
  }

  void best_threshold(const Matrix& x, const Matrix& y, const std::vector<std::uint32_t>& rows, std::size_t begin,
                      std::size_t end, int f, const std::vector<double>& total, double parent_score,
                      Candidate& best) {
    const std::size_t n = end - begin;
    auto& buf = sort_buffer_;
    if (presorted_ != nullptr) {
      std::size_t k = 0;
      for (std::uint32_t r : presorted_->order[static_cast<std::size_t>(f)]) {
        if (in_node_[r]) buf[k++] = {x(r, f), r};
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) buf[i] = {x(rows[begin + i], f), rows[begin + i]};
      std::sort(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(n));
    }
    if (buf[0].first == buf[n - 1].first) return;
    const auto min_leaf = static_cast<std::size_t>(options_.min_samples_leaf);
    std::vector<double> left(total.size(), 0.0), right(total.size());
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (Eigen::Index o = 0; o < n_outputs_; ++o) left[static_cast<std::size_t>(o)] += y(buf[i].second, o);
      if (buf[i].first == buf[i + 1].first) continue;
      const std::size_t n_left = i + 1, n_right = n - n_left;
      if (n_left < min_leaf || n_right < min_leaf) continue;
      for (std::size_t o = 0; o < total.size(); ++o) right[o] = total[o] - left[o];
      const double gain = score(left, static_cast<double>(n_left)) + score(right, static_cast<double>(n_right)) -
                          parent_score;
      if (gain > best.gain + tie_tolerance_) {
        double threshold = 0.5 * (buf[i].first + buf[i + 1].first);
        if (threshold >= buf[i + 1].first) threshold = buf[i].first;
        best = {f, threshold, gain, buf[0].first, buf[n - 1].first};
      }
    }
  }

  void random_threshold(const Matrix& x, const Matrix& y, const std::vector<std::uint32_t>& rows, std::size_t begin,
                        std::size_t end, int f, const std::vector<double>& total, double parent_score,
                        Candidate& best) {
    double lo = x(rows[begin], f), hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      lo = std::min(lo, x(rows[i], f));
      hi = std::max(hi, x(rows[i], f));
    }
    // Adjacent doubles leave no threshold strictly inside the range.
    if (std::nextafter(lo, hi) >= hi) return;
    double threshold;
    do {
      threshold = lo + rng_->uniform_open() * (hi - lo);
    } while (!(threshold > lo && threshold < hi));
    std::vector<double> left(total.size(), 0.0), right(total.size());
    std::size_t n_left = 0;
    for (std::size_t i = begin; i < end; ++i) {
      if (x(rows[i], f) <= threshold) {
        ++n_left;
        for (Eigen::Index o = 0; o < n_outputs_; ++o) left[static_cast<std::size_t>(o)] += y(rows[i], o);
      }
    }
    const std::size_t n_right = (end - begin) - n_left;
    const auto min_leaf = static_cast<std::size_t>(options_.min_samples_leaf);
    if (n_left < min_leaf || n_right < min_leaf) return;
    for (std::size_t o = 0; o < total.size(); ++o) right[o] = total[o] - left[o];
    const double gain =
        score(left, static_cast<double>(n_left)) + score(right, static_cast<double>(n_right)) - parent_score;
    if (gain > best.gain + tie_tolerance_) best = {f, threshold, gain, lo, hi};
  }

  std::size_t grow(const Matrix& x, const Matrix& y, std::vector<std::uint32_t>& rows, std::size_t begin,
                   std::size_t end, int depth) {
    const std::size_t n = end - begin;
    const auto min_leaf = static_cast<std::size_t>(options_.min_samples_leaf);
    if ((options_.max_depth >= 0 && depth >= options_.max_depth) || n < 2 * min_leaf) {
      return make_leaf(y, rows, begin, end);
    }

    std::vector<double> total(static_cast<std::size_t>(n_outputs_), 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      for (Eigen::Index o = 0; o < n_outputs_; ++o) total[static_cast<std::size_t>(o)] += y(rows[i], o);
    }
    double sse = 0.0, squares = 0.0;
    for (Eigen::Index o = 0; o < n_outputs_; ++o) {
      const double mean = total[static_cast<std::size_t>(o)] / static_cast<double>(n);
      for (std::size_t i = begin; i < end; ++i) {
        sse += (y(rows[i], o) - mean) * (y(rows[i], o) - mean);
        squares += y(rows[i], o) * y(rows[i], o);
      }
    }
    if (sse <= 0.0) return make_leaf(y, rows, begin, end);

    std::vector<int> candidates;
    const int m = static_cast<int>(x.cols());
    if (options_.max_features == 0 || options_.max_features == m) {
      candidates.resize(static_cast<std::size_t>(m));
      for (int f = 0; f < m; ++f) candidates[static_cast<std::size_t>(f)] = f;
    } else {
      for (std::size_t f : rng_->sample_without_replacement(static_cast<std::size_t>(m),
                                                            static_cast<std::size_t>(options_.max_features))) {
        candidates.push_back(static_cast<int>(f));
      }
      std::sort(candidates.begin(), candidates.end());
    }

    const double parent_score = score(total, static_cast<double>(n));
    // Gains below this are rounding noise of the prefix-sum formula, and gains
    // closer than tie_tolerance_ count as equal so the earlier candidate wins.
    Candidate best;
    best.gain = 1e-12 * sse;
    tie_tolerance_ = 1e-12 * squares;
    if (presorted_ != nullptr) {
      for (std::size_t i = begin; i < end; ++i) in_node_[rows[i]] = 1;
    }
    for (int f : candidates) {
      if (options_.splitter == Splitter::Best) {
        best_threshold(x, y, rows, begin, end, f, total, parent_score, best);
      } else {
        random_threshold(x, y, rows, begin, end, f, total, parent_score, best);
      }
    }
    if (presorted_ != nullptr) {
      for (std::size_t i = begin; i < end; ++i) in_node_[rows[i]] = 0;
    }
    if (best.feature < 0) return make_leaf(y, rows, begin, end);

    if (options_.record_splits) {
      splits_.push_back({depth, best.feature, best.threshold, best.gain, candidates, best.node_min, best.node_max});
    }
    auto mid_it = std::stable_partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                        rows.begin() + static_cast<std::ptrdiff_t>(end),
                                        [&](std::uint32_t r) { return x(r, best.feature) <= best.threshold; });
    const auto mid = static_cast<std::size_t>(mid_it - rows.begin());

    const std::size_t id = nodes_.size();
    nodes_.push_back({best.feature, best.threshold, 0, 0, 0});
    const std::size_t left = grow(x, y, rows, begin, mid, depth + 1);
    const std::size_t right = grow(x, y, rows, mid, end, depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  TreeOptions options_;
  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<SplitRecord> splits_;
  Eigen::Index n_outputs_ = 0;
  std::optional<Rng> rng_;
  std::vector<std::pair<double, std::uint32_t>> sort_buffer_;
  const PresortedColumns* presorted_ = nullptr;
  std::vector<char> in_node_;
  double tie_tolerance_ = 0.0;
};

/// Decision tree regressor (DTR). Defaults: unlimited depth, one sample per leaf.
class CartRegressor final : public Regressor {
 public:
  explicit CartRegressor(TreeOptions options = {}) : tree_(options) {}
  CartRegressor(int max_depth, int min_samples_leaf) : CartRegressor(TreeOptions{max_depth, min_samples_leaf}) {}

  std::unique_ptr<Regressor> clone() const override { return std::make_unique<CartRegressor>(tree_.options()); }
  std::string kind() const override { return "dtr"; }
  void set_seed(std::uint64_t seed) override {
    auto opts = tree_.options();
    opts.seed = seed;
    tree_ = RegressionTree(opts);
  }

  const RegressionTree& tree() const noexcept { return tree_; }

 protected:
  void do_fit(const Matrix& x, const Matrix& y) override {
    const auto [xs, ys] = canonical_rows(x, y);
    tree_.fit(xs, ys);
  }
  Matrix do_predict(const Matrix& x) const override { return tree_.predict(x); }

 private:
  RegressionTree tree_;
};

}  // namespace pips
