#include "nbnlkit/stoml3.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <ostream>

#include "nbnlkit/rng.hpp"

namespace nbnlkit {

namespace {

// Fresh per-batch statistics, summed over examples before averaging.
struct FreshTerms {
  std::vector<Matrix> score_grad;
  std::vector<Matrix> label_grad;
  double loss_sum = 0.0;

  void add(FreshTerms&& other) {
    for (std::size_t k = 0; k < score_grad.size(); ++k) {
      score_grad[k] += other.score_grad[k];
      label_grad[k] += other.label_grad[k];
    }
    loss_sum += other.loss_sum;
  }
};

FreshTerms single_example_terms(const TrainerState& state,
                                const Eigen::Ref<const Vector>& x,
                                int label) {
  const int c = state.weights.classes();
  FreshTerms terms;
  terms.score_grad.reserve(c);
  terms.label_grad.reserve(c);

  Vector scores(c);
  std::vector<Vector> responses(c);
  for (int k = 0; k < c; ++k) {
    responses[k] = state.weights.class_weights[k].transpose() * x;
    scores[k] = phi(responses[k], state.q);
  }
  const Vector sigma = softmax_from_scores(scores);
  const double top = scores.maxCoeff();
  terms.loss_sum =
      std::log((scores.array() - top).exp().sum()) - (scores[label] - top);

  const Vector label_dir = grad_phi(responses[label], state.q);
  for (int k = 0; k < c; ++k) {
    terms.score_grad.push_back(sigma[k] * x *
                               grad_phi(responses[k], state.q).transpose());
    if (k == label) {
      terms.label_grad.push_back(x * label_dir.transpose());
    } else {
      terms.label_grad.push_back(
          Matrix::Zero(state.weights.dim(), state.weights.prototypes()));
    }
  }
  return terms;
}

// Pairwise (recursive-halving) summation: groups of identical examples sum
// exactly when their count is a power of two, which pins the duplicate
// invariance of step_minibatch down to the bit.
FreshTerms sum_terms(const TrainerState& state, const Matrix& xs,
                     const std::vector<int>& labels, std::size_t lo,
                     std::size_t hi) {
  if (hi - lo == 1) {
    return single_example_terms(state, xs.col(static_cast<Eigen::Index>(lo)),
                                labels[lo]);
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  FreshTerms left = sum_terms(state, xs, labels, lo, mid);
  left.add(sum_terms(state, xs, labels, mid, hi));
  return left;
}

void check_example(const TrainerState& state,
                   const Eigen::Ref<const Vector>& x, int label) {
  if (x.size() != state.weights.dim()) {
    throw InvalidInput("step: descriptor dimension " +
                       std::to_string(x.size()) + " does not match trainer " +
                       std::to_string(state.weights.dim()));
  }
  if (!x.allFinite()) {
    throw InvalidInput("step: non-finite descriptor");
  }
  if (label < 0 || label >= state.weights.classes()) {
    throw InvalidInput("step: label " + std::to_string(label + 1) +
                       " outside 1.." + std::to_string(state.weights.classes()));
  }
}

}  // namespace

DatasetPatchSource::DatasetPatchSource(const Dataset& dataset)
    : dataset_(&dataset) {
  index_.reserve(dataset.total_patches());
  for (std::size_t b = 0; b < dataset.bags.size(); ++b) {
    const auto& bag = dataset.bags[b];
    if (!bag.label) {
      throw InvalidInput("training bag '" + bag.image_id + "' is unlabeled");
    }
    for (Eigen::Index r = 0; r < bag.size(); ++r) {
      index_.emplace_back(static_cast<std::uint32_t>(b),
                          static_cast<std::uint32_t>(r));
    }
  }
}

void DatasetPatchSource::fetch(std::size_t index, Eigen::Ref<Vector> x,
                               int& label) const {
  const auto [b, r] = index_[index];
  const auto& bag = dataset_->bags[b];
  x = bag.patches.row(r).transpose();
  label = *bag.label;
}

TrainerState init_trainer(int dim, int prototypes, int classes, double lambda,
                          SmoothnessQ q, double init_scale,
                          std::uint64_t seed) {
  if (dim < 1 || prototypes < 1 || classes < 1) {
    throw InvalidParameter("init_trainer: dimensions must be >= 1");
  }
  if (lambda < 0.0) {
    throw InvalidParameter("init_trainer: lambda must be >= 0");
  }
  if (!(init_scale > 0.0)) {
    throw InvalidParameter("init_trainer: init_scale must be > 0");
  }
  TrainerState state;
  state.lambda = lambda;
  state.q = q;
  state.seed = seed;
  state.score_grad_avg.assign(classes, Matrix::Zero(dim, prototypes));
  state.label_grad_avg.assign(classes, Matrix::Zero(dim, prototypes));
  state.iterate_avg.assign(classes, Matrix::Zero(dim, prototypes));

  state.weights.q = q.value();
  state.weights.lambda = lambda;
  state.weights.class_weights.reserve(classes);
  Rng rng(seed);
  for (int k = 0; k < classes; ++k) {
    Matrix w(dim, prototypes);
    for (Eigen::Index j = 0; j < prototypes; ++j) {
      for (Eigen::Index i = 0; i < dim; ++i) {
        w(i, j) = init_scale * (2.0 * rng.uniform() - 1.0);
      }
    }
    state.weights.class_weights.push_back(std::move(w));
  }
  return state;
}

double step(TrainerState& state, const Vector& x, int label) {
  Matrix xs = x;
  return step_minibatch(state, xs, {label});
}

double step_minibatch(TrainerState& state, const Matrix& xs,
                      const std::vector<int>& labels) {
  const std::size_t n = labels.size();
  if (n == 0) {
    throw InvalidInput("step_minibatch: empty batch");
  }
  if (xs.cols() != static_cast<Eigen::Index>(n)) {
    throw InvalidInput("step_minibatch: batch size mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    check_example(state, xs.col(static_cast<Eigen::Index>(i)), labels[i]);
    if (!state.norm_warning_issued &&
        xs.col(static_cast<Eigen::Index>(i)).norm() > 1.0 + 1e-9) {
      state.norm_warning_issued = true;
      std::cerr << "nbnlkit warning: training descriptor with |x| > 1 seen; "
                   "the trainer assumes inputs inside the unit ball\n";
    }
  }

  FreshTerms sums = sum_terms(state, xs, labels, 0, n);

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double fresh_weight = 1.0 / std::sqrt(t);
  const double gamma = 1.0 - fresh_weight;
  const double scale = fresh_weight / static_cast<double>(n);

  const int c = state.weights.classes();
  for (int k = 0; k < c; ++k) {
    state.score_grad_avg[k] =
        gamma * state.score_grad_avg[k] + scale * sums.score_grad[k];
    state.label_grad_avg[k] =
        gamma * state.label_grad_avg[k] + scale * sums.label_grad[k];
    state.iterate_avg[k] = gamma * state.iterate_avg[k] +
                           fresh_weight * state.weights.class_weights[k];
  }
  const double shrink = 1.0 / (1.0 + state.lambda);
  for (int k = 0; k < c; ++k) {
    state.weights.class_weights[k] =
        shrink * (state.iterate_avg[k] - state.score_grad_avg[k] +
                  state.label_grad_avg[k]);
  }
  if (!state.weights.all_finite()) {
    throw NumericalFailure("step_minibatch: prototypes became non-finite at t=" +
                           std::to_string(state.step_count));
  }
  return sums.loss_sum / static_cast<double>(n);
}

TrainReport train(const PatchSource& source, const TrainOptions& options,
                  TrainerState& state) {
  if (options.epochs < 1) {
    throw InvalidParameter("train: epochs must be >= 1");
  }
  if (options.batch_size < 1) {
    throw InvalidParameter("train: batch_size must be >= 1");
  }
  if (source.dim() != state.weights.dim()) {
    throw InvalidInput("train: source dimension " +
                       std::to_string(source.dim()) +
                       " does not match trainer " +
                       std::to_string(state.weights.dim()));
  }
  const std::size_t n = source.size();
  if (n == 0) {
    throw InvalidInput("train: empty source");
  }

  TrainReport report;
  Rng rng(options.shuffle_seed);
  std::vector<std::size_t> order(n);
  const int d = source.dim();
  Matrix batch(d, options.batch_size);
  std::vector<int> batch_labels;

  const auto start = std::chrono::steady_clock::now();
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);

    const auto epoch_start = std::chrono::steady_clock::now();
    double loss_weighted = 0.0;
    std::size_t consumed = 0;
    std::int64_t epoch_updates = 0;
    while (consumed < n) {
      const std::size_t take =
          std::min<std::size_t>(options.batch_size, n - consumed);
      batch_labels.resize(take);
      for (std::size_t j = 0; j < take; ++j) {
        int label = -1;
        source.fetch(order[consumed + j],
                     batch.col(static_cast<Eigen::Index>(j)), label);
        batch_labels[j] = label;
      }
      const double loss = step_minibatch(
          state, batch.leftCols(static_cast<Eigen::Index>(take)),
          batch_labels);
      loss_weighted += loss * static_cast<double>(take);
      consumed += take;
      ++epoch_updates;
    }
    report.updates += epoch_updates;
    report.epoch_avg_loss.push_back(loss_weighted / static_cast<double>(n));
    if (options.diagnostics) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        epoch_start)
              .count();
      (*options.diagnostics) << "epoch=" << epoch
                             << " avg_loss=" << report.epoch_avg_loss.back()
                             << " updates=" << report.updates
                             << " ups=" << (secs > 0.0 ? epoch_updates / secs
                                                       : 0.0)
                             << "\n";
    }
  }
  const double total_secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  report.seconds_per_update =
      report.updates > 0 ? total_secs / static_cast<double>(report.updates)
                         : 0.0;
  report.weights = state.weights;
  return report;
}

double surrogate_value(const TrainerState& state, const PrototypeTensor& V,
                       const PrototypeTensor& W, const Vector& x, int label,
                       double lipschitz) {
  if (V.classes() != W.classes() || V.dim() != W.dim() ||
      V.prototypes() != W.prototypes()) {
    throw InvalidInput("surrogate_value: V and W shapes differ");
  }
  if (!(lipschitz > 0.0)) {
    throw InvalidParameter("surrogate_value: L must be > 0");
  }
  const double anchor_loss = softmax_loss(V, x, label, state.q);
  const LossGradient grad = loss_gradient(V, x, label, state.q);
  double linear = 0.0;
  double quad = 0.0;
  double reg = 0.0;
  for (int k = 0; k < V.classes(); ++k) {
    const Matrix delta = W.class_weights[k] - V.class_weights[k];
    linear += grad.per_class[k].cwiseProduct(delta).sum();
    quad += delta.squaredNorm();
    reg += W.class_weights[k].squaredNorm();
  }
  return anchor_loss + linear + 0.5 * lipschitz * quad + state.lambda * reg;
}

}  // namespace nbnlkit
