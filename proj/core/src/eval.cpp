#include "adello/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace adello {

double balanced_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels,
                         int num_classes) {
  if (labels.empty() || predictions.size() != labels.size())
    throw std::invalid_argument("balanced_accuracy: empty or mismatched input");
  std::vector<int> total(num_classes, 0), hit(num_classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++total[labels[i]];
    if (predictions[i] == labels[i]) ++hit[labels[i]];
  }
  double sum = 0.0;
  int present = 0;
  for (int k = 0; k < num_classes; ++k) {
    if (total[k] == 0) continue;
    sum += static_cast<double>(hit[k]) / total[k];
    ++present;
  }
  return sum / present;
}

ReliabilityBins bin_predictions(const Vec& max_probs, const std::vector<int>& correct,
                                int num_bins) {
  if (num_bins < 1) throw std::invalid_argument("bin_predictions: need M >= 1");
  ReliabilityBins bins;
  bins.num_bins = num_bins;
  bins.counts.assign(num_bins, 0);
  bins.mean_confidence.assign(num_bins, 0.0);
  bins.accuracy.assign(num_bins, 0.0);
  for (std::size_t i = 0; i < max_probs.size(); ++i) {
    const double c = max_probs[i];
    // bin m covers ((m-1)/M, m/M]; confidence 0 goes to the first bin
    int m = static_cast<int>(std::ceil(c * num_bins)) - 1;
    m = std::clamp(m, 0, num_bins - 1);
    ++bins.counts[m];
    bins.mean_confidence[m] += c;
    bins.accuracy[m] += correct[i] ? 1.0 : 0.0;
  }
  for (int m = 0; m < num_bins; ++m) {
    if (bins.counts[m] > 0) {
      bins.mean_confidence[m] /= bins.counts[m];
      bins.accuracy[m] /= bins.counts[m];
    }
  }
  return bins;
}

double ece(const ReliabilityBins& bins, int total) {
  if (total <= 0) throw std::invalid_argument("ece: empty evaluation set");
  double sum = 0.0;
  for (int m = 0; m < bins.num_bins; ++m) {
    if (bins.counts[m] == 0) continue;
    sum += (static_cast<double>(bins.counts[m]) / total) *
           std::abs(bins.accuracy[m] - bins.mean_confidence[m]);
  }
  return sum;
}

double mce(const ReliabilityBins& bins) {
  double best = -1.0;
  for (int m = 0; m < bins.num_bins; ++m) {
    if (bins.counts[m] == 0) continue;
    best = std::max(best, std::abs(bins.accuracy[m] - bins.mean_confidence[m]));
  }
  if (best < 0.0) throw std::invalid_argument("mce: all bins empty");
  return best;
}

FriedmanResult friedman_rank(const ScoreTable& table, bool higher_is_better) {
  const std::size_t n_methods = table.methods.size();
  const std::size_t n_settings = table.settings.size();
  if (n_methods < 2 || n_settings < 1)
    throw std::invalid_argument("friedman_rank: need >= 2 methods and >= 1 setting");

  FriedmanResult res;
  res.mean_ranks.assign(n_methods, 0.0);
  for (std::size_t s = 0; s < n_settings; ++s) {
    std::vector<std::size_t> order(n_methods);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return higher_is_better ? table.scores(a, s) > table.scores(b, s)
                              : table.scores(a, s) < table.scores(b, s);
    });
    // average the rank positions across each tied group
    std::size_t i = 0;
    while (i < n_methods) {
      std::size_t j = i;
      while (j + 1 < n_methods &&
             table.scores(order[j + 1], s) == table.scores(order[i], s))
        ++j;
      const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
      for (std::size_t t = i; t <= j; ++t) res.mean_ranks[order[t]] += avg_rank;
      i = j + 1;
    }
  }
  for (double& r : res.mean_ranks) r /= static_cast<double>(n_settings);

  res.final_order.resize(n_methods);
  std::iota(res.final_order.begin(), res.final_order.end(), 0);
  std::stable_sort(res.final_order.begin(), res.final_order.end(),
                   [&](int a, int b) { return res.mean_ranks[a] < res.mean_ranks[b]; });
  return res;
}

std::vector<PriorKlPoint> prior_kl_trace(const std::vector<std::pair<std::int64_t, Vec>>& snapshots,
                                         const Vec& true_prior) {
  std::vector<PriorKlPoint> trace;
  trace.reserve(snapshots.size());
  const Vec balanced = uniform_prior(true_prior.size());
  for (const auto& [step, q_hat] : snapshots)
    trace.push_back({step, kl_divergence(q_hat, true_prior), kl_divergence(q_hat, balanced)});
  return trace;
}

void write_reliability_csv(const ReliabilityBins& bins, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_reliability_csv: cannot open " + path);
  out << "bin_low,bin_high,count,conf,acc\n";
  char buf[128];
  for (int m = 0; m < bins.num_bins; ++m) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%d,%.9g,%.9g\n",
                  static_cast<double>(m) / bins.num_bins,
                  static_cast<double>(m + 1) / bins.num_bins, bins.counts[m],
                  bins.mean_confidence[m], bins.accuracy[m]);
    out << buf;
  }
}

}  // namespace adello
