#pragma once

#include <limits>
#include <vector>

#include "nbnlkit/core.hpp"

namespace nbnlkit {

/// Boundary-smoothness exponent q >= 1. Larger q combines per-prototype
/// scores more sharply; infinity recovers the hard max.
class SmoothnessQ {
 public:
  explicit SmoothnessQ(double value) : value_(value) {
    if (!(value >= 1.0)) {  // also rejects NaN
      throw InvalidParameter("smoothness q must be >= 1, got " +
                             std::to_string(value));
    }
  }

  static SmoothnessQ infinite() {
    return SmoothnessQ(std::numeric_limits<double>::infinity());
  }

  double value() const { return value_; }

  /// True when the max branch applies: q = inf, or q so large that the
  /// power computation would overflow (> 1e6).
  bool treat_as_max() const { return value_ > 1e6; }

 private:
  double value_;
};

/// Per-class loss gradient matrices, same d x k shape as the prototypes.
struct LossGradient {
  std::vector<Matrix> per_class;
};

/// The ML3 score of a prototype-response vector: phi(z) = |[z]_+|_q, the
/// q-norm of the non-negative part. q = inf gives max{0, max(z)}.
double phi(const Vector& z, SmoothnessQ q);

/// Gradient of phi. Component i is ([z_i]_+ / phi(z))^(q-1) when phi > 0;
/// the zero vector when phi(z) = 0 (subgradient choice); for q = inf, a
/// one-hot at the argmax of [z]_+ (lowest index on ties); for q = 1, the
/// indicator of z_i > 0.
Vector grad_phi(const Vector& z, SmoothnessQ q);

/// Scores [phi(W_1^T x), ..., phi(W_c^T x)].
Vector class_scores(const PrototypeTensor& weights, const Vector& x,
                    SmoothnessQ q);

/// Stable softmax of a score vector (max-subtracted).
Vector softmax_from_scores(const Vector& scores);

/// Multiclass logistic loss log(1 + sum_{r != y} exp(phi_r - phi_y)),
/// computed max-subtracted. Always >= 0; equals log(c) when all class
/// scores coincide.
double softmax_loss(const PrototypeTensor& weights, const Vector& x,
                    int label, SmoothnessQ q);

/// Exact gradient of softmax_loss with respect to each class's prototype
/// matrix: G_k = (sigma_k - 1{k=y}) * x * grad_phi(W_k^T x)^T.
LossGradient loss_gradient(const PrototypeTensor& weights, const Vector& x,
                           int label, SmoothnessQ q);

}  // namespace nbnlkit
