#include "nbnlkit/core.hpp"

#include <cmath>

namespace nbnlkit {

std::size_t Dataset::total_patches() const {
  std::size_t n = 0;
  for (const auto& bag : bags) n += static_cast<std::size_t>(bag.size());
  return n;
}

void Dataset::validate() const {
  for (std::size_t i = 0; i < bags.size(); ++i) {
    const auto& bag = bags[i];
    if (bag.size() < 1) {
      throw InvalidInput("bag '" + bag.image_id + "' (index " +
                         std::to_string(i) + ") has no patches");
    }
    if (bag.dim() != dim) {
      throw InvalidInput("bag '" + bag.image_id + "' has dimension " +
                         std::to_string(bag.dim()) + ", dataset declares " +
                         std::to_string(dim));
    }
    if (bag.label && (*bag.label < 0 || (classes > 0 && *bag.label >= classes))) {
      throw InvalidInput("bag '" + bag.image_id + "' has label " +
                         std::to_string(*bag.label + 1) + " outside 1.." +
                         std::to_string(classes));
    }
    if (bag.positions && bag.positions->rows() != bag.size()) {
      throw InvalidInput("bag '" + bag.image_id +
                         "' has a position row count mismatch");
    }
  }
}

bool PrototypeTensor::all_finite() const {
  for (const auto& w : class_weights) {
    if (!w.allFinite()) return false;
  }
  return true;
}

PrototypeTensor PrototypeTensor::zeros(int dim, int prototypes, int classes) {
  PrototypeTensor w;
  w.class_weights.assign(classes, Matrix::Zero(dim, prototypes));
  return w;
}

Vector cap_norm(const Vector& x) {
  if (!x.allFinite()) {
    throw InvalidInput("cap_norm: descriptor has non-finite entries");
  }
  const double norm = x.norm();
  if (norm <= 1.0) return x;
  return x / norm;
}

Vector unit_norm(const Vector& x) {
  if (!x.allFinite()) {
    throw InvalidInput("unit_norm: descriptor has non-finite entries");
  }
  const double norm = x.norm();
  if (norm == 0.0) return x;
  return x / norm;
}

StandardizationStats fit_standardizer(const Dataset& train) {
  if (train.total_patches() == 0) {
    throw InvalidInput("fit_standardizer: dataset has no patches");
  }
  const Eigen::Index d = train.dim;
  Vector mean = Vector::Zero(d);
  std::size_t n = 0;
  for (const auto& bag : train.bags) {
    if (bag.dim() != d) {
      throw InvalidInput("fit_standardizer: bag '" + bag.image_id +
                         "' dimension mismatch");
    }
    mean += bag.patches.colwise().sum().transpose();
    n += static_cast<std::size_t>(bag.size());
  }
  mean /= static_cast<double>(n);

  Vector sq = Vector::Zero(d);
  for (const auto& bag : train.bags) {
    sq += (bag.patches.rowwise() - mean.transpose())
              .array()
              .square()
              .colwise()
              .sum()
              .matrix()
              .transpose();
  }
  Vector stddev(d);
  if (n < 2) {
    stddev.setConstant(StandardizationStats::kStdFloor);
  } else {
    stddev = (sq / static_cast<double>(n - 1)).cwiseSqrt();
    stddev = stddev.cwiseMax(StandardizationStats::kStdFloor);
  }
  return {std::move(mean), std::move(stddev)};
}

FeatureBag apply_standardizer(const StandardizationStats& stats,
                              const FeatureBag& bag) {
  if (bag.dim() != stats.dim()) {
    throw InvalidInput("apply_standardizer: bag '" + bag.image_id +
                       "' has dimension " + std::to_string(bag.dim()) +
                       ", stats have " + std::to_string(stats.dim()));
  }
  FeatureBag out = bag;
  out.patches = (bag.patches.rowwise() - stats.mean.transpose()).array().rowwise() /
                stats.stddev.transpose().array();
  return out;
}

std::pair<Eigen::Index, double> nearest_neighbor(const Vector& x,
                                                 const Matrix& Z) {
  if (Z.rows() == 0) {
    throw InvalidInput("nearest_neighbor: empty support matrix");
  }
  if (Z.cols() != x.size()) {
    throw InvalidInput("nearest_neighbor: dimension mismatch");
  }
  Eigen::Index best = 0;
  double best_d2 = (Z.row(0).transpose() - x).squaredNorm();
  for (Eigen::Index i = 1; i < Z.rows(); ++i) {
    const double d2 = (Z.row(i).transpose() - x).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return {best, best_d2};
}

}  // namespace nbnlkit
