#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nbnlkit/core.hpp"
#include "nbnlkit/ml3_score.hpp"

namespace nbnlkit {

/// Running state of the streaming stochastic majorization-minimization
/// trainer. All four tensor sequences are weighted averages with decay
/// gamma_t = 1 - 1/sqrt(t) and fresh weight 1/sqrt(t):
///
///   score_grad_avg  - softmax-weighted score-gradient outer products
///   label_grad_avg  - true-label score-gradient outer products
///   iterate_avg     - past prototype iterates
///
/// After every update the prototypes are the closed-form surrogate
/// minimizer (iterate_avg - score_grad_avg + label_grad_avg) / (1 + lambda).
struct TrainerState {
  std::vector<Matrix> score_grad_avg;
  std::vector<Matrix> label_grad_avg;
  std::vector<Matrix> iterate_avg;
  PrototypeTensor weights;
  std::int64_t step_count = 0;
  double lambda = 0.0;
  SmoothnessQ q = SmoothnessQ(2.0);
  std::uint64_t seed = 0;
  bool norm_warning_issued = false;
};

/// Random-access source of labeled descriptors. Implementations must be
/// safe for concurrent fetches; fetch(i) must always produce the same
/// example so that seeded shuffling stays reproducible.
class PatchSource {
 public:
  virtual ~PatchSource() = default;
  virtual std::size_t size() const = 0;
  virtual int dim() const = 0;
  /// Writes example i's descriptor into x (pre-sized to dim()) and its
  /// 0-based label into label.
  virtual void fetch(std::size_t index, Eigen::Ref<Vector> x,
                     int& label) const = 0;
};

/// Flattens a labeled dataset into one (descriptor, bag label) example per
/// patch, in dataset order.
class DatasetPatchSource final : public PatchSource {
 public:
  explicit DatasetPatchSource(const Dataset& dataset);
  std::size_t size() const override { return index_.size(); }
  int dim() const override { return dataset_->dim; }
  void fetch(std::size_t index, Eigen::Ref<Vector> x,
             int& label) const override;

 private:
  const Dataset* dataset_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> index_;  // (bag, row)
};

struct TrainOptions {
  int epochs = 1;
  int batch_size = 1;
  std::uint64_t shuffle_seed = 1;
  std::ostream* diagnostics = nullptr;
};

struct TrainReport {
  std::int64_t updates = 0;
  std::vector<double> epoch_avg_loss;
  double seconds_per_update = 0.0;
  PrototypeTensor weights;
};

/// Fresh trainer: averages zeroed, t = 0, prototypes drawn i.i.d. uniform
/// in [-init_scale, init_scale] from the seeded generator.
TrainerState init_trainer(int dim, int prototypes, int classes, double lambda,
                          SmoothnessQ q, double init_scale,
                          std::uint64_t seed);

/// One stochastic update from a single labeled descriptor. Returns the
/// softmax loss of the example at the pre-update prototypes.
double step(TrainerState& state, const Vector& x, int label);

/// One stochastic update from a minibatch: fresh terms are averaged over
/// the batch at the frozen prototypes, then applied as a single update
/// (one increment of t). Examples are the columns of xs. Returns the batch
/// mean loss at the pre-update prototypes.
double step_minibatch(TrainerState& state, const Matrix& xs,
                      const std::vector<int>& labels);

/// Epoch-driven training: shuffles [0, source.size()) with a seeded
/// Fisher-Yates permutation each epoch and consumes the source in batches.
/// Memory stays at the state plus one batch plus the index permutation.
TrainReport train(const PatchSource& source, const TrainOptions& options,
                  TrainerState& state);

/// Value of the strongly convex first-order surrogate anchored at V,
/// evaluated at W, for the single example (x, label):
///
///   h(W) = loss(V) + <grad loss(V), W - V> + (L/2) |W - V|^2
///          + lambda * sum_l |W_l|_F^2
///
/// Used by the test suite to certify the majorization property.
double surrogate_value(const TrainerState& state, const PrototypeTensor& V,
                       const PrototypeTensor& W, const Vector& x, int label,
                       double lipschitz);

}  // namespace nbnlkit
