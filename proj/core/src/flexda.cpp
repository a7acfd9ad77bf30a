#include "adello/flexda.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adello {

double schedule_alpha(std::int64_t t, const DebiasSchedule& sched) {
  if (t < 0 || t > sched.t_total) throw std::invalid_argument("schedule_alpha: t out of range");
  const double frac = static_cast<double>(t) / static_cast<double>(sched.t_total);
  return 1.0 - (1.0 - sched.alpha_min) * std::pow(frac, sched.speed);
}

Vec smooth_prior(const Vec& q, double alpha) {
  Vec out(q.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    out[k] = std::pow(std::max(q[k], kPriorEpsilon), alpha);
    sum += out[k];
  }
  for (double& x : out) x /= sum;
  return out;
}

void PriorTracker::update(const Vec& batch_mean_weak_probs) {
  double sum = 0.0;
  for (std::size_t k = 0; k < estimate.size(); ++k) {
    estimate[k] = beta * estimate[k] + (1.0 - beta) * batch_mean_weak_probs[k];
    sum += estimate[k];
  }
  for (double& x : estimate) x /= sum;  // kill accumulated drift
}

double infer_temperature(const Vec& q) {
  return std::exp(kl_divergence(uniform_prior(q.size()), q));
}

MaskResult confidence_mask(const Matrix& weak_probs, double tau) {
  MaskResult res;
  res.mask.resize(weak_probs.rows);
  res.hard_label.resize(weak_probs.rows);
  for (std::size_t r = 0; r < weak_probs.rows; ++r) {
    int best = 0;
    double best_p = weak_probs(r, 0);
    for (std::size_t k = 1; k < weak_probs.cols; ++k) {
      if (weak_probs(r, k) > best_p) {  // strict: ties keep the lowest index
        best_p = weak_probs(r, k);
        best = static_cast<int>(k);
      }
    }
    res.mask[r] = best_p >= tau ? 1.0 : 0.0;
    res.hard_label[r] = best;
  }
  return res;
}

namespace {

Vec log_ratio(const Vec& num, const Vec& den) {
  Vec out(num.size());
  for (std::size_t k = 0; k < num.size(); ++k)
    out[k] = std::log(std::max(num[k], kPriorEpsilon)) - std::log(std::max(den[k], kPriorEpsilon));
  return out;
}

Matrix tile_rows(const Vec& v, std::size_t rows) {
  Matrix out(rows, v.size());
  for (std::size_t r = 0; r < rows; ++r) out.set_row(r, v);
  return out;
}

Matrix one_hot_rows(const std::vector<int>& labels, int num_classes) {
  Matrix out(labels.size(), static_cast<std::size_t>(num_classes));
  for (std::size_t r = 0; r < labels.size(); ++r) out(r, labels[r]) = 1.0;
  return out;
}

}  // namespace

BatchTargets supervised_targets(const std::vector<int>& labels, const Vec& labeled_prior,
                                const Vec& target_prior, int num_classes) {
  BatchTargets bt;
  bt.targets = one_hot_rows(labels, num_classes);
  bt.offsets = tile_rows(log_ratio(labeled_prior, target_prior), labels.size());
  bt.weights = Vec(labels.size(), 1.0);
  bt.temperature = 1.0;
  return bt;
}

BatchTargets consistency_targets(const std::vector<int>& hard_labels,
                                 const std::vector<double>& mask, const Vec& q_hat,
                                 const Vec& target_prior, int num_classes) {
  BatchTargets bt;
  bt.targets = one_hot_rows(hard_labels, num_classes);
  bt.offsets = tile_rows(log_ratio(q_hat, target_prior), hard_labels.size());
  bt.weights = mask;
  bt.temperature = 1.0;
  return bt;
}

BatchTargets ccr_targets(const Matrix& weak_logits, const std::vector<double>& mask,
                         double temperature, const Vec& q_hat, const Vec& target_prior) {
  if (temperature <= 0.0) throw std::invalid_argument("invalid temperature");
  BatchTargets bt;
  // soft targets are the unadjusted temperature-scaled weak-view predictions
  bt.targets = softmax_rows(weak_logits, temperature);
  bt.offsets = tile_rows(log_ratio(q_hat, target_prior), weak_logits.rows);
  bt.weights.resize(mask.size());
  for (std::size_t r = 0; r < mask.size(); ++r) bt.weights[r] = 1.0 - mask[r];
  bt.temperature = temperature;
  return bt;
}

BatchTargets kd_targets(const Matrix& weak_logits, const std::vector<double>& mask,
                        double temperature, const Vec& q_hat, const Vec& target_prior) {
  BatchTargets bt = ccr_targets(weak_logits, mask, temperature, q_hat, target_prior);
  std::fill(bt.weights.begin(), bt.weights.end(), 1.0);
  return bt;
}

}  // namespace adello
