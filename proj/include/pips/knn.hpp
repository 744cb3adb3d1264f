#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <queue>
#include <utility>
#include <vector>

#include "pips/model.hpp"

namespace pips {

enum class KnnWeighting { Uniform, InverseDistance };

/// (squared distance, training row); ordered so that ties go to the lower row.
using Neighbor = std::pair<double, std::size_t>;

inline double squared_distance(const double* a, const double* b, Eigen::Index m) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return acc;
}

/// Exact k-nearest-neighbour search over the rows of a matrix.
class KdTree {
 public:
  static constexpr std::size_t kLeafSize = 16;

  KdTree() = default;

  explicit KdTree(const Matrix& points) : points_(&points) {
    index_.resize(static_cast<std::size_t>(points.rows()));
    std::iota(index_.begin(), index_.end(), std::size_t{0});
    if (!index_.empty()) root_ = build(0, index_.size());
  }

  /// The k nearest rows to `query`, sorted by (distance, row).
  std::vector<Neighbor> query(const double* query, std::size_t k) const {
    std::priority_queue<Neighbor> heap;  // max-heap: worst candidate on top
    if (root_ >= 0) search(root_, query, k, heap);
    std::vector<Neighbor> out;
    out.reserve(heap.size());
    while (!heap.empty()) {
      out.push_back(heap.top());
      heap.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  struct Node {
    std::size_t begin = 0, end = 0;
    int dim = -1;  // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
  };

  int build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= kLeafSize) return id;

    const Matrix& p = *points_;
    Eigen::Index best_dim = 0;
    double best_spread = -1.0;
    for (Eigen::Index d = 0; d < p.cols(); ++d) {
      double lo = p(static_cast<Eigen::Index>(index_[begin]), d), hi = lo;
      for (std::size_t i = begin; i < end; ++i) {
        const double v = p(static_cast<Eigen::Index>(index_[i]), d);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_dim = d;
      }
    }
    if (best_spread <= 0.0) return id;  // all points coincide

    const std::size_t mid = begin + (end - begin) / 2;
    auto less = [&](std::size_t a, std::size_t b) {
      const double va = p(static_cast<Eigen::Index>(a), best_dim), vb = p(static_cast<Eigen::Index>(b), best_dim);
      return va < vb || (va == vb && a < b);
    };
    std::nth_element(index_.begin() + static_cast<std::ptrdiff_t>(begin),
                     index_.begin() + static_cast<std::ptrdiff_t>(mid),
                     index_.begin() + static_cast<std::ptrdiff_t>(end), less);
    const double split = p(static_cast<Eigen::Index>(index_[mid]), best_dim);
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[static_cast<std::size_t>(id)].dim = static_cast<int>(best_dim);
    nodes_[static_cast<std::size_t>(id)].split = split;
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  static void offer(std::priority_queue<Neighbor>& heap, std::size_t k, Neighbor candidate) {
    if (heap.size() < k) {
      heap.push(candidate);
    } else if (candidate < heap.top()) {
      heap.pop();
      heap.push(candidate);
    }
  }

  void search(int id, const double* q, std::size_t k, std::priority_queue<Neighbor>& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    const Matrix& p = *points_;
    if (node.dim < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t row = index_[i];
        offer(heap, k, {squared_distance(q, p.row(static_cast<Eigen::Index>(row)).data(), p.cols()), row});
      }
      return;
    }
    const double diff = q[node.dim] - node.split;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    search(near, q, k, heap);
    // Equal bound must still be visited: a farther-side point at the same
    // distance may carry a lower row index.
    if (heap.size() < k || diff * diff <= heap.top().first) search(far, q, k, heap);
  }

  const Matrix* points_ = nullptr;
  std::vector<std::size_t> index_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

/// k-nearest-neighbour regression under Euclidean feature distance.
class KnnRegressor final : public Regressor {
 public:
  explicit KnnRegressor(int k = 5, KnnWeighting weighting = KnnWeighting::Uniform) : k_(k), weighting_(weighting) {
    if (k < 1) throw InvalidArgument("knn: k must be >= 1");
  }

  std::unique_ptr<Regressor> clone() const override { return std::make_unique<KnnRegressor>(k_, weighting_); }
  std::string kind() const override { return "knr"; }

  int k() const noexcept { return k_; }

  /// Neighbours of one query row, as used by predict.
  std::vector<Neighbor> neighbors(const double* query) const {
    return tree_.query(query, static_cast<std::size_t>(k_));
  }

 protected:
  void do_fit(const Matrix& x, const Matrix& y) override {
    if (static_cast<Eigen::Index>(k_) > x.rows()) {
      throw InvalidArgument("knn: k = " + std::to_string(k_) + " exceeds training size " +
                            std::to_string(x.rows()));
    }
    x_ = std::make_unique<Matrix>(x);
    y_ = y;
    tree_ = KdTree(*x_);
  }

  Matrix do_predict(const Matrix& x) const override {
    Matrix out = Matrix::Zero(x.rows(), y_.cols());
    for (Eigen::Index q = 0; q < x.rows(); ++q) {
      out.row(q) = combine(neighbors(x.row(q).data()));
    }
    return out;
  }

 private:
  Eigen::RowVectorXd combine(const std::vector<Neighbor>& nbrs) const {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(y_.cols());
    if (weighting_ == KnnWeighting::InverseDistance) {
      std::size_t exact = 0;
      for (const auto& [d2, row] : nbrs) {
        if (d2 == 0.0) {
          acc += y_.row(static_cast<Eigen::Index>(row));
          ++exact;
        }
      }
      if (exact > 0) return acc / static_cast<double>(exact);
      double total = 0.0;
      for (const auto& [d2, row] : nbrs) {
        const double w = 1.0 / std::sqrt(d2);
        acc += w * y_.row(static_cast<Eigen::Index>(row));
        total += w;
      }
      return acc / total;
    }
    for (const auto& [d2, row] : nbrs) acc += y_.row(static_cast<Eigen::Index>(row));
    return acc / static_cast<double>(nbrs.size());
  }

  int k_;
  KnnWeighting weighting_;
  std::unique_ptr<Matrix> x_;  // heap-held so the tree's pointer survives moves
  Matrix y_;
  KdTree tree_;
};

}  // namespace pips
