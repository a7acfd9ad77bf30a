#pragma once

#include <cstdint>
#include <vector>

#include "adello/math.hpp"
#include "adello/mlp.hpp"

namespace adello {

/// Debiasing schedule alpha_t = 1 - (1 - alpha_min) * (t / t_total)^d.
struct DebiasSchedule {
  double speed = 2.0;      // d
  double alpha_min = 0.1;
  std::int64_t t_total = 20000;
};

/// Exact schedule value; throws if t is outside [0, t_total].
double schedule_alpha(std::int64_t t, const DebiasSchedule& sched);

/// Normalized elementwise power q^alpha; alpha=1 is the identity, alpha=0
/// the uniform prior. Entries are clamped at epsilon before exponentiation.
Vec smooth_prior(const Vec& q, double alpha);

/// EMA tracker of the model's pseudo-label marginal on weak views.
struct PriorTracker {
  Vec estimate;          // Q-hat, starts uniform
  double beta = 0.999;   // EMA momentum
  double epsilon = kPriorEpsilon;

  explicit PriorTracker(std::size_t num_classes, double beta_ = 0.999)
      : estimate(uniform_prior(num_classes)), beta(beta_) {}

  /// estimate <- beta * estimate + (1 - beta) * batch_mean, renormalized.
  void update(const Vec& batch_mean_weak_probs);
};

/// T = exp(KL(uniform || q)); 1 for a uniform prior, grows with imbalance.
double infer_temperature(const Vec& q);

struct MaskResult {
  std::vector<double> mask;   // 1 if max weak prob >= tau
  std::vector<int> hard_label;  // argmax, ties to the lowest class index
};

MaskResult confidence_mask(const Matrix& weak_probs, double tau);

/// Logit-adjusted supervised loss: one-hot targets, offset log(P_L / Q_alpha).
BatchTargets supervised_targets(const std::vector<int>& labels, const Vec& labeled_prior,
                                const Vec& target_prior, int num_classes);

/// Masked hard-pseudo-label consistency loss on strong views, offset
/// log(Q-hat / Q_alpha). At alpha=1 the offset vanishes and this is the
/// plain thresholded consistency loss.
BatchTargets consistency_targets(const std::vector<int>& hard_labels,
                                 const std::vector<double>& mask, const Vec& q_hat,
                                 const Vec& target_prior, int num_classes);

/// Complementary consistency: soft temperature-scaled weak-view targets on
/// the below-threshold samples, prior adjustment on the strong view only.
BatchTargets ccr_targets(const Matrix& weak_logits, const std::vector<double>& mask,
                         double temperature, const Vec& q_hat, const Vec& target_prior);

/// Indiscriminate-distillation ablation: ccr_targets with all weights 1.
BatchTargets kd_targets(const Matrix& weak_logits, const std::vector<double>& mask,
                        double temperature, const Vec& q_hat, const Vec& target_prior);

}  // namespace adello
