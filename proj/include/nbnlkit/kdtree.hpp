#pragma once

#include <utility>
#include <vector>

#include "nbnlkit/core.hpp"

namespace nbnlkit {

/// Exact nearest-neighbor k-d tree over the rows of a point matrix.
///
/// Queries return exactly what the exhaustive scan returns, including the
/// lowest-row-index tie-break: per-point distances use the same expression
/// as the scan, and subtree bounds are taken from the actual child extents
/// with non-strict pruning so equal-distance candidates are never skipped.
class KdTree {
 public:
  /// Builds over `points` (one point per row). The matrix must outlive the
  /// tree; the tree stores only indices and split metadata.
  explicit KdTree(const Matrix& points);

  std::pair<Eigen::Index, double> nearest(const Vector& query) const;

  Eigen::Index size() const { return points_->rows(); }

 private:
  struct Node {
    int axis = -1;             // -1 marks a leaf
    double left_max = 0.0;     // max coordinate on the axis in the left child
    double right_min = 0.0;    // min coordinate on the axis in the right child
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t begin = 0;    // leaf range into order_
    std::int32_t end = 0;
  };

  std::int32_t build(std::int32_t begin, std::int32_t end);
  void search(std::int32_t node, const Vector& query, Eigen::Index& best,
              double& best_d2) const;

  const Matrix* points_;
  std::vector<Eigen::Index> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;

  static constexpr std::int32_t kLeafSize = 8;
};

}  // namespace nbnlkit
