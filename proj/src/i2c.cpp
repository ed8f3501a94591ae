#include "nbnlkit/i2c.hpp"

#include <cmath>

namespace nbnlkit {

namespace {

void check_bag_dim(const FeatureBag& bag, int dim, const char* where) {
  if (bag.dim() != dim) {
    throw InvalidInput(std::string(where) + ": bag '" + bag.image_id +
                       "' has dimension " + std::to_string(bag.dim()) +
                       ", model has " + std::to_string(dim));
  }
}

void check_label(int label, int classes, const char* where) {
  if (label < 0 || label >= classes) {
    throw InvalidInput(std::string(where) + ": label " +
                       std::to_string(label + 1) + " outside 1.." +
                       std::to_string(classes));
  }
}

}  // namespace

NbnnModel::NbnnModel(std::vector<Matrix> supports, int dim)
    : supports_(std::move(supports)), dim_(dim) {
  for (std::size_t y = 0; y < supports_.size(); ++y) {
    if (supports_[y].rows() == 0) {
      throw InvalidInput("NbnnModel: class " + std::to_string(y + 1) +
                         " has an empty support");
    }
    if (supports_[y].cols() != dim_) {
      throw InvalidInput("NbnnModel: class " + std::to_string(y + 1) +
                         " support dimension mismatch");
    }
  }
}

void NbnnModel::build_index() {
  index_.clear();
  index_.reserve(supports_.size());
  for (const auto& support : supports_) {
    index_.push_back(std::make_unique<KdTree>(support));
  }
}

std::pair<Eigen::Index, double> NbnnModel::nearest_in_class(const Vector& x,
                                                            int label) const {
  check_label(label, classes(), "nearest_in_class");
  if (has_index()) {
    return index_[static_cast<std::size_t>(label)]->nearest(x);
  }
  return nearest_neighbor(x, supports_[static_cast<std::size_t>(label)]);
}

NbnnModel build_support(const Dataset& train) {
  int classes = train.classes;
  if (classes <= 0) {
    for (const auto& bag : train.bags) {
      if (bag.label) classes = std::max(classes, *bag.label + 1);
    }
  }
  if (classes <= 0) {
    throw InvalidInput("build_support: dataset has no labels");
  }
  std::vector<Eigen::Index> rows(classes, 0);
  for (const auto& bag : train.bags) {
    if (!bag.label) {
      throw InvalidInput("build_support: bag '" + bag.image_id +
                         "' is unlabeled");
    }
    check_label(*bag.label, classes, "build_support");
    rows[static_cast<std::size_t>(*bag.label)] += bag.size();
  }
  for (int y = 0; y < classes; ++y) {
    if (rows[static_cast<std::size_t>(y)] == 0) {
      throw InvalidInput("build_support: class " + std::to_string(y + 1) +
                         " has no training bags");
    }
  }
  std::vector<Matrix> supports;
  supports.reserve(classes);
  for (int y = 0; y < classes; ++y) {
    supports.emplace_back(rows[static_cast<std::size_t>(y)], train.dim);
  }
  std::vector<Eigen::Index> cursor(classes, 0);
  for (const auto& bag : train.bags) {
    const auto y = static_cast<std::size_t>(*bag.label);
    supports[y].middleRows(cursor[y], bag.size()) = bag.patches;
    cursor[y] += bag.size();
  }
  return NbnnModel(std::move(supports), train.dim);
}

double i2c_distance(const NbnnModel& model, const FeatureBag& bag, int label) {
  check_label(label, model.classes(), "i2c_distance");
  check_bag_dim(bag, model.dim(), "i2c_distance");
  double total = 0.0;
  for (Eigen::Index i = 0; i < bag.size(); ++i) {
    total += model.nearest_in_class(bag.patches.row(i).transpose(), label)
                 .second;
  }
  return total;
}

int nbnn_predict(const NbnnModel& model, const FeatureBag& bag) {
  int best = 0;
  double best_distance = i2c_distance(model, bag, 0);
  for (int y = 1; y < model.classes(); ++y) {
    const double d = i2c_distance(model, bag, y);
    if (d < best_distance) {
      best_distance = d;
      best = y;
    }
  }
  return best;
}

Vector nbnl_scores(const PrototypeTensor& weights, const FeatureBag& bag,
                   SmoothnessQ q) {
  check_bag_dim(bag, weights.dim(), "nbnl_scores");
  const int c = weights.classes();
  Vector scores = Vector::Zero(c);
  for (Eigen::Index i = 0; i < bag.size(); ++i) {
    const Vector x = bag.patches.row(i).transpose();
    for (int y = 0; y < c; ++y) {
      scores[y] += phi(weights.class_weights[y].transpose() * x, q);
    }
  }
  return scores / static_cast<double>(bag.size());
}

int nbnl_predict(const PrototypeTensor& weights, const FeatureBag& bag,
                 SmoothnessQ q) {
  const Vector scores = nbnl_scores(weights, bag, q);
  int best = 0;
  for (int y = 1; y < weights.classes(); ++y) {
    if (scores[y] > scores[best]) best = y;
  }
  return best;
}

BoundCheck check_nbnl_bound(const PrototypeTensor& weights,
                            const FeatureBag& bag, int label, double tau) {
  check_label(label, weights.classes(), "check_nbnl_bound");
  check_bag_dim(bag, weights.dim(), "check_nbnl_bound");
  const Matrix& w = weights.class_weights[static_cast<std::size_t>(label)];
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    const double sq = w.col(j).squaredNorm();
    if (sq > tau + 1e-12) {
      throw InvalidInput("check_nbnl_bound: prototype column " +
                         std::to_string(j) + " of class " +
                         std::to_string(label + 1) + " has |w|^2 = " +
                         std::to_string(sq) + " > tau = " +
                         std::to_string(tau));
    }
  }
  for (Eigen::Index i = 0; i < bag.size(); ++i) {
    const double norm = bag.patches.row(i).norm();
    if (norm > 1.0 + 1e-12) {
      throw InvalidInput("check_nbnl_bound: patch " + std::to_string(i) +
                         " has |x| = " + std::to_string(norm) + " > 1");
    }
  }

  const double n = static_cast<double>(bag.size());
  BoundCheck result;
  for (Eigen::Index i = 0; i < bag.size(); ++i) {
    const Vector x = bag.patches.row(i).transpose();
    double min_d2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      min_d2 = std::min(min_d2, (x - w.col(j)).squaredNorm());
    }
    result.lhs += min_d2;
    result.rhs += -2.0 * (w.transpose() * x).maxCoeff();
  }
  result.rhs += n * (1.0 + tau);
  result.holds = result.lhs <= result.rhs + 1e-9;
  return result;
}

}  // namespace nbnlkit
