#include "adello/trainer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace adello {

Variant variant_from_string(const std::string& name) {
  if (name == "supervised") return Variant::supervised;
  if (name == "fixmatch") return Variant::fixmatch;
  if (name == "flexda") return Variant::flexda;
  if (name == "ccr") return Variant::ccr;
  if (name == "adello") return Variant::adello;
  if (name == "flexda_kd") return Variant::flexda_kd;
  throw std::invalid_argument("unknown variant: " + name);
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::supervised: return "supervised";
    case Variant::fixmatch: return "fixmatch";
    case Variant::flexda: return "flexda";
    case Variant::ccr: return "ccr";
    case Variant::adello: return "adello";
    case Variant::flexda_kd: return "flexda_kd";
  }
  throw std::invalid_argument("unknown variant");
}

std::vector<LossTerm> variant_losses(Variant variant, std::int64_t t, const TrainConfig& cfg,
                                     const StepBatch& batch, const Vec& labeled_prior,
                                     const Vec& q_hat, const Vec& q_alpha, double temperature) {
  const int K = static_cast<int>(labeled_prior.size());
  const Vec uniform = uniform_prior(K);
  const bool flex = variant == Variant::flexda || variant == Variant::adello ||
                    variant == Variant::flexda_kd;

  std::vector<LossTerm> terms;
  // supervised term: plain CE for the baselines, logit-adjusted for FlexDA
  if (flex) {
    terms.push_back({"s", &batch.labeled_weak,
                     supervised_targets(batch.labels, labeled_prior, q_alpha, K), 1.0});
  } else {
    terms.push_back({"s", &batch.labeled_weak,
                     supervised_targets(batch.labels, uniform, uniform, K), 1.0});
  }
  if (variant == Variant::supervised) return terms;

  // hard-pseudo-label consistency on strong views
  if (flex) {
    terms.push_back({"u", &batch.unlabeled_strong,
                     consistency_targets(batch.mask.hard_label, batch.mask.mask, q_hat, q_alpha, K),
                     cfg.lambda_u});
  } else {
    terms.push_back({"u", &batch.unlabeled_strong,
                     consistency_targets(batch.mask.hard_label, batch.mask.mask, uniform, uniform, K),
                     cfg.lambda_u});
  }

  // complementary consistency / indiscriminate distillation, gated by warm-up
  if (t < cfg.t_warmup) return terms;
  switch (variant) {
    case Variant::ccr:
      terms.push_back({"uC", &batch.unlabeled_strong,
                       ccr_targets(batch.unlabeled_weak_logits, batch.mask.mask, temperature,
                                   uniform, uniform),
                       cfg.lambda_uc});
      break;
    case Variant::adello:
      terms.push_back({"uC", &batch.unlabeled_strong,
                       ccr_targets(batch.unlabeled_weak_logits, batch.mask.mask, temperature,
                                   q_hat, q_alpha),
                       cfg.lambda_uc});
      break;
    case Variant::flexda_kd:
      terms.push_back({"uC", &batch.unlabeled_strong,
                       kd_targets(batch.unlabeled_weak_logits, batch.mask.mask, temperature,
                                  q_hat, q_alpha),
                       cfg.lambda_uc});
      break;
    default:
      break;
  }
  return terms;
}

namespace {

struct TestEval {
  double balanced_acc;
  double ece_val;
  double mce_val;
  Vec max_probs;
  std::vector<int> correct;
  std::vector<int> predictions;
};

TestEval evaluate_ema(const Classifier& model, const DataSplit& split, int num_classes,
                      int num_bins) {
  const Matrix logits = model.forward_ema(split.test_x);
  const std::size_t n = logits.rows;
  TestEval ev;
  ev.max_probs.resize(n);
  ev.correct.resize(n);
  ev.predictions.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const Vec p = softmax(logits.row(r));
    int best = 0;
    for (std::size_t k = 1; k < p.size(); ++k)
      if (p[k] > p[best]) best = static_cast<int>(k);
    ev.predictions[r] = best;
    ev.max_probs[r] = p[best];
    ev.correct[r] = best == split.test_y[r] ? 1 : 0;
  }
  ev.balanced_acc = balanced_accuracy(ev.predictions, split.test_y, num_classes);
  const ReliabilityBins bins = bin_predictions(ev.max_probs, ev.correct, num_bins);
  ev.ece_val = ece(bins, static_cast<int>(n));
  ev.mce_val = mce(bins);
  return ev;
}

Matrix gather_rows(const Matrix& src, const std::vector<std::size_t>& idx) {
  Matrix out(idx.size(), src.cols);
  for (std::size_t r = 0; r < idx.size(); ++r) out.set_row(r, src.row(idx[r]));
  return out;
}

}  // namespace

RunReport run(const TrainConfig& cfg, const DataSplit& split, const SyntheticTask& task,
              const std::function<void(const EvalRecord&)>& sink) {
  const int K = task.num_classes;
  if (cfg.t_warmup > cfg.t_total)
    throw std::invalid_argument("run: t_warmup exceeds t_total");
  if (split.labeled_x.cols != static_cast<std::size_t>(task.dim))
    throw std::invalid_argument("run: split does not match task dimensionality");

  std::mt19937_64 rng(cfg.seed);
  Classifier model = Classifier::init(task.dim, cfg.hidden_dim, K, cfg.seed ^ 0x9e3779b97f4a7c15ull);
  PriorTracker tracker(K, cfg.prior_beta);
  double temperature = 1.0;

  DebiasSchedule sched = cfg.schedule;
  sched.t_total = cfg.t_total;

  std::uniform_int_distribution<std::size_t> pick_l(0, split.labeled_x.rows - 1);
  const bool uses_unlabeled = cfg.variant != Variant::supervised;
  std::uniform_int_distribution<std::size_t> pick_u(
      0, uses_unlabeled ? split.unlabeled_x.rows - 1 : 0);
  const std::size_t ub = static_cast<std::size_t>(cfg.unlabeled_ratio) * cfg.batch_size;

  RunReport report;
  double last_s = 0.0, last_u = 0.0, last_uc = 0.0, last_total = 0.0;
  double last_mask_rate = 0.0;

  for (std::int64_t t = 1; t <= cfg.t_total; ++t) {
    const double alpha = schedule_alpha(t, sched);
    const Vec q_alpha = smooth_prior(tracker.estimate, alpha);
    if (t == cfg.t_warmup || (cfg.t_warmup == 0 && t == 1))
      temperature = infer_temperature(tracker.estimate);

    StepBatch batch;
    std::vector<std::size_t> li(cfg.batch_size);
    for (auto& i : li) i = pick_l(rng);
    batch.labels.resize(cfg.batch_size);
    for (int b = 0; b < cfg.batch_size; ++b) batch.labels[b] = split.labeled_y[li[b]];
    batch.labeled_weak = weak_augment_rows(gather_rows(split.labeled_x, li), cfg.augment, rng);

    Vec batch_mean_probs;
    bool bad = false;
    if (uses_unlabeled) {
      std::vector<std::size_t> ui(ub);
      for (auto& i : ui) i = pick_u(rng);
      const Matrix raw = gather_rows(split.unlabeled_x, ui);
      const Matrix weak = weak_augment_rows(raw, cfg.augment, rng);
      batch.unlabeled_strong = strong_augment_rows(raw, cfg.augment, rng);
      batch.unlabeled_weak_logits = model.forward(weak);
      bad = !all_finite(batch.unlabeled_weak_logits.data);
      if (bad) batch.unlabeled_weak_logits = Matrix(ub, K);
      const Matrix weak_probs = softmax_rows(batch.unlabeled_weak_logits);
      batch.mask = confidence_mask(weak_probs, cfg.tau);
      batch_mean_probs.assign(K, 0.0);
      for (std::size_t r = 0; r < weak_probs.rows; ++r)
        for (int k = 0; k < K; ++k) batch_mean_probs[k] += weak_probs(r, k) / weak_probs.rows;
      double mr = 0.0;
      for (double m : batch.mask.mask) mr += m;
      last_mask_rate = mr / static_cast<double>(ub);
    }

    const auto terms = variant_losses(cfg.variant, t, cfg, batch, split.labeled_prior,
                                      tracker.estimate, q_alpha, temperature);
    LayerParams total_grad = LayerParams::zeros(task.dim, cfg.hidden_dim, K);
    last_s = last_u = last_uc = last_total = 0.0;
    for (const auto& term : terms) {
      if (bad) break;
      double loss = 0.0;
      try {
        auto [l, g] = loss_gradients(model, *term.features, term.targets);
        loss = l;
        total_grad.axpy(term.weight, g);
      } catch (const std::runtime_error&) {
        bad = true;
        break;
      }
      const double weighted = term.weight * loss;
      if (term.label == "s") last_s = weighted;
      else if (term.label == "u") last_u = weighted;
      else last_uc = weighted;
      last_total += weighted;
    }
    if (bad || !std::isfinite(last_total)) {
      report.aborted = true;
      report.abort_reason = "non-finite loss at step " + std::to_string(t);
      EvalRecord rec;
      rec.step = t;
      rec.loss_total = std::numeric_limits<double>::quiet_NaN();
      report.records.push_back(rec);
      if (sink) sink(rec);
      break;
    }

    sgd_step(model, total_grad, cfg.opt);
    ema_update(model, cfg.opt.ema_decay);
    if (uses_unlabeled) tracker.update(batch_mean_probs);

    if (t % cfg.eval_interval == 0 || t == cfg.t_total) {
      const TestEval ev = evaluate_ema(model, split, K, cfg.reliability_bins);
      EvalRecord rec;
      rec.step = t;
      rec.loss_s = last_s;
      rec.loss_u = last_u;
      rec.loss_uc = last_uc;
      rec.loss_total = last_total;
      rec.mask_rate = last_mask_rate;
      rec.comp_mask_rate = uses_unlabeled ? 1.0 - last_mask_rate : 0.0;
      rec.alpha = alpha;
      rec.temperature = temperature;
      rec.kl_q_true = kl_divergence(tracker.estimate, split.unlabeled_prior);
      rec.kl_q_uniform = kl_divergence(tracker.estimate, uniform_prior(K));
      rec.balanced_acc = ev.balanced_acc;
      rec.ece = ev.ece_val;
      rec.mce = ev.mce_val;
      report.records.push_back(rec);
      if (sink) sink(rec);
      if (t == cfg.t_total) {
        report.final_max_probs = ev.max_probs;
        report.final_correct = ev.correct;
        report.final_predictions = ev.predictions;
      }
    }
  }

  report.q_hat_final = tracker.estimate;
  report.final_model = model;
  if (!report.aborted && !report.records.empty()) {
    const int w = std::min<int>(cfg.final_window, static_cast<int>(report.records.size()));
    double acc = 0.0, e = 0.0, m = 0.0;
    for (int i = 0; i < w; ++i) {
      const auto& rec = report.records[report.records.size() - 1 - i];
      acc += rec.balanced_acc;
      e += rec.ece;
      m += rec.mce;
    }
    report.final_balanced_accuracy = acc / w;
    report.final_ece = e / w;
    report.final_mce = m / w;
  }
  return report;
}

}  // namespace adello
