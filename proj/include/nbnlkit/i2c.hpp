#pragma once

#include <memory>
#include <vector>

#include "nbnlkit/core.hpp"
#include "nbnlkit/kdtree.hpp"
#include "nbnlkit/ml3_score.hpp"

namespace nbnlkit {

/// Per-class support sets of the NBNN classifier: class y's support is the
/// union (row concatenation) of all training descriptors labeled y.
class NbnnModel {
 public:
  NbnnModel(std::vector<Matrix> supports, int dim);

  int classes() const { return static_cast<int>(supports_.size()); }
  int dim() const { return dim_; }
  const std::vector<Matrix>& supports() const { return supports_; }

  /// Builds an exact k-d tree per class. Optional accelerator: results are
  /// identical to the exhaustive scan on every query.
  void build_index();
  bool has_index() const { return !index_.empty(); }

  /// Nearest support row of class `label` (index within that class's
  /// support, squared distance).
  std::pair<Eigen::Index, double> nearest_in_class(const Vector& x,
                                                   int label) const;

 private:
  std::vector<Matrix> supports_;
  int dim_;
  std::vector<std::unique_ptr<KdTree>> index_;
};

/// Collects every class's support from a labeled dataset. Every class in
/// 1..c must appear in at least one bag.
NbnnModel build_support(const Dataset& train);

/// Image-to-class distance: sum over the bag's patches of squared distance
/// to each patch's exact nearest neighbor in the class support.
double i2c_distance(const NbnnModel& model, const FeatureBag& bag, int label);

/// NBNN prediction: class minimizing the image-to-class distance, lowest
/// index on ties. Returns a 0-based label.
int nbnn_predict(const NbnnModel& model, const FeatureBag& bag);

/// Per-class NBNL scores: entry y = (1/n) sum over patches of
/// phi(W_y^T x, q). With q = inf this is the average of per-patch maxima
/// over non-negatively truncated prototype responses.
Vector nbnl_scores(const PrototypeTensor& weights, const FeatureBag& bag,
                   SmoothnessQ q);

/// NBNL prediction: argmax of nbnl_scores, lowest index on ties. Returns a
/// 0-based label.
int nbnl_predict(const PrototypeTensor& weights, const FeatureBag& bag,
                 SmoothnessQ q);

struct BoundCheck {
  double lhs = 0.0;  // sum of nearest-prototype squared distances
  double rhs = 0.0;  // n(1 + tau) - 2 * sum of per-patch max responses
  bool holds = false;
};

/// Checks the inequality linking the NBNN objective over class `label`'s
/// prototypes to the NBNL score: lhs <= rhs + 1e-9. Requires every
/// prototype column of the class to satisfy |w|^2 <= tau and every patch
/// |x| <= 1. The right-hand side uses the untruncated maximum over the k
/// prototype responses, mirroring the bound's algebra.
BoundCheck check_nbnl_bound(const PrototypeTensor& weights,
                            const FeatureBag& bag, int label, double tau);

}  // namespace nbnlkit
