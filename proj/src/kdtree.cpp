#include "nbnlkit/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace nbnlkit {

KdTree::KdTree(const Matrix& points) : points_(&points) {
  if (points.rows() == 0) {
    throw InvalidInput("KdTree: empty point set");
  }
  order_.resize(points.rows());
  std::iota(order_.begin(), order_.end(), Eigen::Index{0});
  nodes_.reserve(static_cast<std::size_t>(2 * points.rows() / kLeafSize + 8));
  root_ = build(0, static_cast<std::int32_t>(points.rows()));
}

std::int32_t KdTree::build(std::int32_t begin, std::int32_t end) {
  Node node;
  if (end - begin <= kLeafSize) {
    node.begin = begin;
    node.end = end;
    nodes_.push_back(node);
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  // Split on the axis with the widest extent over this range.
  const Eigen::Index dim = points_->cols();
  int axis = 0;
  double best_extent = -1.0;
  for (Eigen::Index a = 0; a < dim; ++a) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::int32_t i = begin; i < end; ++i) {
      const double v = (*points_)(order_[i], a);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_extent) {
      best_extent = hi - lo;
      axis = static_cast<int>(a);
    }
  }

  const std::int32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end,
                   [&](Eigen::Index a, Eigen::Index b) {
                     return (*points_)(a, axis) < (*points_)(b, axis);
                   });

  node.axis = axis;
  node.left_max = -std::numeric_limits<double>::infinity();
  node.right_min = std::numeric_limits<double>::infinity();
  for (std::int32_t i = begin; i < mid; ++i) {
    node.left_max = std::max(node.left_max, (*points_)(order_[i], axis));
  }
  for (std::int32_t i = mid; i < end; ++i) {
    node.right_min = std::min(node.right_min, (*points_)(order_[i], axis));
  }

  const std::int32_t self = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree::search(std::int32_t index, const Vector& query,
                    Eigen::Index& best, double& best_d2) const {
  const Node& node = nodes_[static_cast<std::size_t>(index)];
  if (node.axis < 0) {
    for (std::int32_t i = node.begin; i < node.end; ++i) {
      const Eigen::Index row = order_[i];
      const double d2 = (points_->row(row).transpose() - query).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && row < best)) {
        best_d2 = d2;
        best = row;
      }
    }
    return;
  }

  const double v = query[node.axis];
  const double to_right = v < node.right_min ? node.right_min - v : 0.0;
  const double to_left = v > node.left_max ? v - node.left_max : 0.0;
  if (to_left <= to_right) {
    search(node.left, query, best, best_d2);
    if (to_right * to_right <= best_d2) {
      search(node.right, query, best, best_d2);
    }
  } else {
    search(node.right, query, best, best_d2);
    if (to_left * to_left <= best_d2) {
      search(node.left, query, best, best_d2);
    }
  }
}

std::pair<Eigen::Index, double> KdTree::nearest(const Vector& query) const {
  if (query.size() != points_->cols()) {
    throw InvalidInput("KdTree: query dimension mismatch");
  }
  Eigen::Index best = std::numeric_limits<Eigen::Index>::max();
  double best_d2 = std::numeric_limits<double>::infinity();
  search(root_, query, best, best_d2);
  return {best, best_d2};
}

}  // namespace nbnlkit
