#pragma once

#include <string>
#include <utility>
#include <vector>

#include "adello/math.hpp"

namespace adello {

struct ReliabilityBins {
  int num_bins = 15;
  std::vector<int> counts;
  Vec mean_confidence;
  Vec accuracy;
};

/// Mean per-class recall; classes absent from the eval set are skipped.
double balanced_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels,
                         int num_classes);

/// Equal-width bins ((m-1)/M, m/M], first bin closed at 0; a confidence of
/// exactly m/M lands in bin m.
ReliabilityBins bin_predictions(const Vec& max_probs, const std::vector<int>& correct,
                                int num_bins);

/// Sum over bins of (|B_m| / n) * |acc - conf|; empty bins contribute 0.
double ece(const ReliabilityBins& bins, int total);

/// Max over non-empty bins of |acc - conf|.
double mce(const ReliabilityBins& bins);

struct ScoreTable {
  std::vector<std::string> methods;   // rows
  std::vector<std::string> settings;  // columns
  Matrix scores;                      // methods x settings
};

struct FriedmanResult {
  Vec mean_ranks;                 // per method
  std::vector<int> final_order;   // method indices, best first
};

/// Within each column rank methods (best rank 1, ties averaged), then order
/// methods by ascending mean rank. Ties in the mean break by method order.
FriedmanResult friedman_rank(const ScoreTable& table, bool higher_is_better);

struct PriorKlPoint {
  std::int64_t step;
  double kl_vs_true;     // KL(Q-hat || Q)
  double kl_vs_uniform;  // KL(Q-hat || uniform)
};

std::vector<PriorKlPoint> prior_kl_trace(const std::vector<std::pair<std::int64_t, Vec>>& snapshots,
                                         const Vec& true_prior);

/// bin_low, bin_high, count, conf, acc — one row per bin.
void write_reliability_csv(const ReliabilityBins& bins, const std::string& path);

}  // namespace adello
