#include "adello/mlp.hpp"

#include <cmath>
#include <random>

namespace adello {

namespace {

Matrix forward_with(const LayerParams& p, int hidden_dim, int out_dim, const Matrix& x) {
  const std::size_t B = x.rows;
  Matrix logits(B, static_cast<std::size_t>(out_dim));
  Vec hidden(static_cast<std::size_t>(hidden_dim));
  for (std::size_t b = 0; b < B; ++b) {
    for (int h = 0; h < hidden_dim; ++h) {
      double z = p.b1[h];
      for (std::size_t d = 0; d < x.cols; ++d) z += p.w1(h, d) * x(b, d);
      hidden[h] = std::tanh(z);
    }
    for (int k = 0; k < out_dim; ++k) {
      double z = p.b2[k];
      for (int h = 0; h < hidden_dim; ++h) z += p.w2(k, h) * hidden[h];
      logits(b, k) = z;
    }
  }
  return logits;
}

}  // namespace

LayerParams LayerParams::zeros(int in_dim, int hidden_dim, int out_dim) {
  LayerParams p;
  p.w1 = Matrix(hidden_dim, in_dim);
  p.b1 = Vec(hidden_dim, 0.0);
  p.w2 = Matrix(out_dim, hidden_dim);
  p.b2 = Vec(out_dim, 0.0);
  return p;
}

void LayerParams::axpy(double a, const LayerParams& other) {
  for (std::size_t i = 0; i < w1.data.size(); ++i) w1.data[i] += a * other.w1.data[i];
  for (std::size_t i = 0; i < b1.size(); ++i) b1[i] += a * other.b1[i];
  for (std::size_t i = 0; i < w2.data.size(); ++i) w2.data[i] += a * other.w2.data[i];
  for (std::size_t i = 0; i < b2.size(); ++i) b2[i] += a * other.b2[i];
}

Classifier Classifier::init(int in_dim, int hidden_dim, int out_dim, std::uint64_t seed) {
  Classifier c;
  c.in_dim = in_dim;
  c.hidden_dim = hidden_dim;
  c.out_dim = out_dim;
  c.params = LayerParams::zeros(in_dim, hidden_dim, out_dim);
  std::mt19937_64 rng(seed);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(in_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  std::uniform_real_distribution<double> u1(-s1, s1);
  std::uniform_real_distribution<double> u2(-s2, s2);
  for (double& w : c.params.w1.data) w = u1(rng);
  for (double& w : c.params.w2.data) w = u2(rng);
  c.momentum = LayerParams::zeros(in_dim, hidden_dim, out_dim);
  c.shadow = c.params;
  c.step = 0;
  return c;
}

Matrix Classifier::forward(const Matrix& features) const {
  if (features.cols != static_cast<std::size_t>(in_dim))
    throw std::invalid_argument("forward: feature dimension mismatch");
  return forward_with(params, hidden_dim, out_dim, features);
}

Matrix Classifier::forward_ema(const Matrix& features) const {
  if (features.cols != static_cast<std::size_t>(in_dim))
    throw std::invalid_argument("forward: feature dimension mismatch");
  return forward_with(shadow, hidden_dim, out_dim, features);
}

std::pair<double, LayerParams> loss_gradients(const Classifier& state, const Matrix& features,
                                              const BatchTargets& bt) {
  const std::size_t B = features.rows;
  const int H = state.hidden_dim;
  const int K = state.out_dim;
  if (bt.targets.rows != B || bt.offsets.rows != B || bt.weights.size() != B)
    throw std::invalid_argument("loss_gradients: batch shape mismatch");
  if (bt.temperature <= 0.0) throw std::invalid_argument("invalid temperature");

  LayerParams grads = LayerParams::zeros(state.in_dim, H, K);
  double loss = 0.0;
  Vec hidden(static_cast<std::size_t>(H));
  Vec adjusted(static_cast<std::size_t>(K));
  Vec dz2(static_cast<std::size_t>(K));
  const double inv_b = 1.0 / static_cast<double>(B);
  const double inv_t = 1.0 / bt.temperature;
  const LayerParams& p = state.params;

  for (std::size_t b = 0; b < B; ++b) {
    const double w = bt.weights[b];
    if (w == 0.0) continue;  // masked-out sample, no forward needed
    for (int h = 0; h < H; ++h) {
      double z = p.b1[h];
      for (std::size_t d = 0; d < features.cols; ++d) z += p.w1(h, d) * features(b, d);
      hidden[h] = std::tanh(z);
    }
    for (int k = 0; k < K; ++k) {
      double z = p.b2[k];
      for (int h = 0; h < H; ++h) z += p.w2(k, h) * hidden[h];
      adjusted[k] = (z + bt.offsets(b, k)) * inv_t;
    }
    if (!all_finite(adjusted)) throw std::runtime_error("numerical overflow");

    const Vec target = bt.targets.row(b);
    loss += w * cross_entropy(target, adjusted) * inv_b;

    // d loss / d adjusted-logit = w * (p - target) / (T * B)
    const Vec prob = softmax(adjusted);
    for (int k = 0; k < K; ++k) dz2[k] = w * (prob[k] - target[k]) * inv_t * inv_b;

    for (int k = 0; k < K; ++k) {
      grads.b2[k] += dz2[k];
      for (int h = 0; h < H; ++h) grads.w2(k, h) += dz2[k] * hidden[h];
    }
    for (int h = 0; h < H; ++h) {
      double dh = 0.0;
      for (int k = 0; k < K; ++k) dh += p.w2(k, h) * dz2[k];
      const double dz1 = dh * (1.0 - hidden[h] * hidden[h]);
      grads.b1[h] += dz1;
      for (std::size_t d = 0; d < features.cols; ++d) grads.w1(h, d) += dz1 * features(b, d);
    }
  }
  if (!std::isfinite(loss)) throw std::runtime_error("numerical overflow");
  return {loss, grads};
}

namespace {

void nesterov_update(Vec& param, Vec& buf, const Vec& grad, double lr, double mu, double wd) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i] + wd * param[i];
    buf[i] = mu * buf[i] + g;
    param[i] -= lr * (g + mu * buf[i]);
  }
}

}  // namespace

void sgd_step(Classifier& state, const LayerParams& grads, const OptimizerConfig& cfg) {
  const double lr = cfg.learning_rate;
  const double mu = cfg.momentum;
  // weight decay applies to weights only, not biases
  nesterov_update(state.params.w1.data, state.momentum.w1.data, grads.w1.data, lr, mu,
                  cfg.weight_decay);
  nesterov_update(state.params.b1, state.momentum.b1, grads.b1, lr, mu, 0.0);
  nesterov_update(state.params.w2.data, state.momentum.w2.data, grads.w2.data, lr, mu,
                  cfg.weight_decay);
  nesterov_update(state.params.b2, state.momentum.b2, grads.b2, lr, mu, 0.0);
  ++state.step;
}

void ema_update(Classifier& state, double decay) {
  auto blend = [decay](Vec& shadow, const Vec& live) {
    for (std::size_t i = 0; i < shadow.size(); ++i)
      shadow[i] = decay * shadow[i] + (1.0 - decay) * live[i];
  };
  blend(state.shadow.w1.data, state.params.w1.data);
  blend(state.shadow.b1, state.params.b1);
  blend(state.shadow.w2.data, state.params.w2.data);
  blend(state.shadow.b2, state.params.b2);
}

}  // namespace adello
