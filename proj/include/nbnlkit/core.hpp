#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nbnlkit/error.hpp"

namespace nbnlkit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One image's bag of local patch descriptors.
///
/// `patches` holds one descriptor per row. `label` is the 0-based class
/// index; files and the CLI speak 1-based labels, the conversion happens in
/// the I/O layer. `positions` optionally holds normalized patch centers
/// (cx, cy) in [0,1]^2, one row per patch.
struct FeatureBag {
  std::string image_id;
  std::optional<int> label;
  Matrix patches;
  std::optional<Matrix> positions;

  Eigen::Index size() const { return patches.rows(); }
  Eigen::Index dim() const { return patches.cols(); }
};

/// An ordered collection of feature bags sharing one descriptor dimension.
struct Dataset {
  std::vector<FeatureBag> bags;
  int dim = 0;
  int classes = 0;  // 0 = unknown

  std::size_t bag_count() const { return bags.size(); }
  std::size_t total_patches() const;

  /// Checks the shared-dimension and label-range invariants.
  void validate() const;
};

/// Learned prototypes, one d x k matrix per class, plus the training
/// hyperparameters they were fit with.
struct PrototypeTensor {
  std::vector<Matrix> class_weights;
  double q = 2.0;
  double lambda = 0.0;

  int classes() const { return static_cast<int>(class_weights.size()); }
  int dim() const {
    return class_weights.empty() ? 0
                                 : static_cast<int>(class_weights[0].rows());
  }
  int prototypes() const {
    return class_weights.empty() ? 0
                                 : static_cast<int>(class_weights[0].cols());
  }
  bool all_finite() const;

  static PrototypeTensor zeros(int dim, int prototypes, int classes);
};

/// Per-dimension mean and standard deviation of a training set's patches.
struct StandardizationStats {
  Vector mean;
  Vector stddev;  // floored at kStdFloor

  static constexpr double kStdFloor = 1e-8;

  Eigen::Index dim() const { return mean.size(); }
};

/// Scales x into the unit ball: x / max(1, |x|_2). Vectors already inside
/// are returned unchanged; direction is always preserved.
Vector cap_norm(const Vector& x);

/// Forces |x|_2 = 1 (used by the --unit-norm experiment option). The zero
/// vector is returned unchanged.
Vector unit_norm(const Vector& x);

/// Fits per-dimension mean and standard deviation over every patch of every
/// bag. Uses the (n-1) sample convention; constant dimensions are floored
/// at StandardizationStats::kStdFloor.
StandardizationStats fit_standardizer(const Dataset& train);

/// Replaces each patch row by (x - mean) / std elementwise.
FeatureBag apply_standardizer(const StandardizationStats& stats,
                              const FeatureBag& bag);

/// Exact nearest neighbor of x among the rows of Z: returns the row index
/// minimizing |x - z|^2 and the minimal squared distance. Ties break to the
/// lowest row index.
std::pair<Eigen::Index, double> nearest_neighbor(const Vector& x,
                                                 const Matrix& Z);

}  // namespace nbnlkit
