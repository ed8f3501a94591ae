#include "nbnlkit/ml3_score.hpp"

#include <cmath>

namespace nbnlkit {

namespace {

void check_instance(const PrototypeTensor& weights, const Vector& x,
                    int label) {
  if (weights.dim() != x.size()) {
    throw InvalidInput("descriptor dimension " + std::to_string(x.size()) +
                       " does not match prototype dimension " +
                       std::to_string(weights.dim()));
  }
  if (label < 0 || label >= weights.classes()) {
    throw InvalidInput("label " + std::to_string(label + 1) +
                       " outside 1.." + std::to_string(weights.classes()));
  }
}

}  // namespace

double phi(const Vector& z, SmoothnessQ q) {
  if (!z.allFinite()) {
    throw InvalidInput("phi: non-finite score vector");
  }
  const Eigen::ArrayXd zp = z.array().max(0.0);
  const double top = zp.maxCoeff();
  if (top <= 0.0) return 0.0;
  if (q.treat_as_max()) return top;
  // Rescale by the max so the powers stay in [0, 1].
  return top * std::pow((zp / top).pow(q.value()).sum(), 1.0 / q.value());
}

Vector grad_phi(const Vector& z, SmoothnessQ q) {
  if (!z.allFinite()) {
    throw InvalidInput("grad_phi: non-finite score vector");
  }
  Vector g = Vector::Zero(z.size());
  const double p = phi(z, q);
  if (p <= 0.0) return g;
  if (q.treat_as_max()) {
    Eigen::Index argmax = 0;
    for (Eigen::Index i = 1; i < z.size(); ++i) {
      if (z[i] > z[argmax]) argmax = i;  // ties keep the lowest index
    }
    g[argmax] = 1.0;
    return g;
  }
  const double qm1 = q.value() - 1.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] > 0.0) g[i] = std::pow(z[i] / p, qm1);
  }
  return g;
}

Vector class_scores(const PrototypeTensor& weights, const Vector& x,
                    SmoothnessQ q) {
  if (weights.dim() != x.size()) {
    throw InvalidInput("class_scores: descriptor dimension " +
                       std::to_string(x.size()) +
                       " does not match prototype dimension " +
                       std::to_string(weights.dim()));
  }
  Vector scores(weights.classes());
  for (int k = 0; k < weights.classes(); ++k) {
    scores[k] = phi(weights.class_weights[k].transpose() * x, q);
  }
  return scores;
}

Vector softmax_from_scores(const Vector& scores) {
  const double top = scores.maxCoeff();
  Vector e = (scores.array() - top).exp();
  return e / e.sum();
}

double softmax_loss(const PrototypeTensor& weights, const Vector& x,
                    int label, SmoothnessQ q) {
  check_instance(weights, x, label);
  const Vector scores = class_scores(weights, x, q);
  const double top = scores.maxCoeff();
  const double lse = std::log((scores.array() - top).exp().sum());
  return lse - (scores[label] - top);
}

LossGradient loss_gradient(const PrototypeTensor& weights, const Vector& x,
                           int label, SmoothnessQ q) {
  check_instance(weights, x, label);
  const int c = weights.classes();
  Vector scores(c);
  std::vector<Vector> responses(c);
  for (int k = 0; k < c; ++k) {
    responses[k] = weights.class_weights[k].transpose() * x;
    scores[k] = phi(responses[k], q);
  }
  const Vector sigma = softmax_from_scores(scores);
  LossGradient grad;
  grad.per_class.reserve(c);
  for (int k = 0; k < c; ++k) {
    const double coeff = sigma[k] - (k == label ? 1.0 : 0.0);
    grad.per_class.push_back(coeff * x * grad_phi(responses[k], q).transpose());
  }
  return grad;
}

}  // namespace nbnlkit
