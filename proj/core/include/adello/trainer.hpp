#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "adello/data.hpp"
#include "adello/eval.hpp"
#include "adello/flexda.hpp"
#include "adello/mlp.hpp"

namespace adello {

enum class Variant { supervised, fixmatch, flexda, ccr, adello, flexda_kd };

Variant variant_from_string(const std::string& name);
std::string variant_name(Variant v);

struct TrainConfig {
  Variant variant = Variant::adello;
  int batch_size = 64;       // B
  int unlabeled_ratio = 2;   // mu; unlabeled batch is mu * B
  double tau = 0.95;
  DebiasSchedule schedule;
  std::int64_t t_warmup = 2000;
  double lambda_u = 1.0;
  double lambda_uc = 1.0;
  OptimizerConfig opt;
  std::int64_t t_total = 20000;
  std::int64_t eval_interval = 500;
  int final_window = 10;  // evals averaged into the final score
  int hidden_dim = 32;
  AugmentConfig augment;
  double prior_beta = 0.999;
  int reliability_bins = 15;
  std::uint64_t seed = 1;
  bool diagnostics = false;  // enables hidden-label diagnostics in reports
};

struct EvalRecord {
  std::int64_t step = 0;
  double loss_s = 0.0;
  double loss_u = 0.0;
  double loss_uc = 0.0;
  double loss_total = 0.0;
  double mask_rate = 0.0;
  double comp_mask_rate = 0.0;
  double alpha = 1.0;
  double temperature = 1.0;
  double kl_q_true = 0.0;     // KL(Q-hat || Q)
  double kl_q_uniform = 0.0;  // KL(Q-hat || uniform)
  double balanced_acc = 0.0;
  double ece = 0.0;
  double mce = 0.0;
};

struct RunReport {
  std::vector<EvalRecord> records;
  double final_balanced_accuracy = 0.0;  // mean over the last final_window evals
  double final_ece = 0.0;
  double final_mce = 0.0;
  // final-eval test-set predictions under the EMA network, for reliability export
  Vec final_max_probs;
  std::vector<int> final_correct;
  std::vector<int> final_predictions;
  Vec q_hat_final;
  Classifier final_model;
  bool aborted = false;
  std::string abort_reason;
};

/// Per-step loss terms as (label, targets) pairs plus the feature batch each
/// applies to. Exposed separately from run() so tests can exercise variant
/// dispatch directly.
struct LossTerm {
  std::string label;        // "s", "u", "uC"
  const Matrix* features;   // batch the targets apply to
  BatchTargets targets;
  double weight;            // lambda multiplier
};

struct StepBatch {
  Matrix labeled_weak;          // B x D, weak-augmented labeled features
  std::vector<int> labels;      // B
  Matrix unlabeled_strong;      // mu*B x D
  Matrix unlabeled_weak_logits; // mu*B x K, live-model logits on weak views
  MaskResult mask;
};

std::vector<LossTerm> variant_losses(Variant variant, std::int64_t t, const TrainConfig& cfg,
                                     const StepBatch& batch, const Vec& labeled_prior,
                                     const Vec& q_hat, const Vec& q_alpha, double temperature);

/// Full seeded training loop: per step, sample batches, build pseudo-labels
/// and masks, assemble the variant's loss terms, take one analytic-gradient
/// SGD step, update the EMA shadow and the prior tracker. Evaluation uses
/// the EMA network. Deterministic given the config seed.
RunReport run(const TrainConfig& cfg, const DataSplit& split, const SyntheticTask& task,
              const std::function<void(const EvalRecord&)>& sink = {});

}  // namespace adello
