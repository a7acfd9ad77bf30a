#pragma once

#include <cstdint>
#include <utility>

#include "adello/math.hpp"

namespace adello {

struct OptimizerConfig {
  double learning_rate = 0.03;
  double momentum = 0.9;       // Nesterov
  double weight_decay = 5e-4;  // additive L2 term, weights only
  double ema_decay = 0.999;
};

/// Per-sample loss description consumed by loss_gradients: a weighted
/// cross-entropy of softmax((logits + offset) / temperature) against a
/// target distribution. All loss variants reduce to this shape.
struct BatchTargets {
  Matrix targets;      // B x K, each row a probability vector
  Matrix offsets;      // B x K logit offsets
  Vec weights;         // B, nonnegative
  double temperature = 1.0;
};

/// Parameter block of one layer set; also reused for gradients, momentum
/// buffers, and the EMA shadow copy.
struct LayerParams {
  Matrix w1;  // H x D
  Vec b1;     // H
  Matrix w2;  // K x H
  Vec b2;     // K

  static LayerParams zeros(int in_dim, int hidden_dim, int out_dim);
  void axpy(double a, const LayerParams& other);  // this += a * other
};

/// One-hidden-layer tanh MLP with momentum buffers and an EMA shadow.
struct Classifier {
  int in_dim = 0;
  int hidden_dim = 0;
  int out_dim = 0;
  LayerParams params;
  LayerParams momentum;
  LayerParams shadow;
  std::int64_t step = 0;

  /// Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] weights, zero biases;
  /// shadow initialized to the live parameters.
  static Classifier init(int in_dim, int hidden_dim, int out_dim, std::uint64_t seed);

  Matrix forward(const Matrix& features) const;       // live params
  Matrix forward_ema(const Matrix& features) const;   // shadow params
};

/// Loss and exact analytic gradients of
///   (1/B) sum_b w_b * H(target_b, softmax((f(x_b) + offset_b) / T)).
/// The gradient w.r.t. the adjusted logits is w_b * (p_b - target_b) / (T*B).
std::pair<double, LayerParams> loss_gradients(const Classifier& state, const Matrix& features,
                                              const BatchTargets& bt);

/// Nesterov-momentum SGD step with additive L2 weight decay (weights only).
/// Increments the step counter.
void sgd_step(Classifier& state, const LayerParams& grads, const OptimizerConfig& cfg);

/// shadow <- decay * shadow + (1 - decay) * live, elementwise.
void ema_update(Classifier& state, double decay);

}  // namespace adello
