#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "adello/math.hpp"

namespace adello {

/// Long-tailed sampling spec: per-class counts decay geometrically from the
/// head class, count_k = round(base * gamma^{-(k-1)/(K-1)}). gamma < 1 gives
/// a reversed (increasing) tail.
struct LongTailSpec {
  int num_classes = 5;
  int labeled_head = 60;      // N1
  double gamma_labeled = 50;  // gamma_l
  double gamma_unlabeled = 50;
  int unlabeled_head = 600;   // M1
  double ood_fraction = 0.0;  // fraction of unlabeled samples drawn from an extra class
};

std::vector<int> lt_class_counts(int base, double gamma, int num_classes);

/// Gaussian-mixture task: K class means sharing one isotropic covariance
/// sigma_g^2 * I, so class posteriors are available in closed form.
struct SyntheticTask {
  int dim = 2;
  int num_classes = 5;
  std::vector<Vec> means;  // K entries
  Vec ood_mean;            // extra component for OOD unlabeled injection
  double sigma_g = 1.0;
  std::uint64_t seed = 0;
};

/// Deterministically places class means with pairwise distance
/// >= separation * sigma_g. Throws after bounded retries.
SyntheticTask make_task(int dim, int num_classes, double separation, double sigma_g,
                        std::uint64_t seed);

struct DataSplit {
  Matrix labeled_x;
  std::vector<int> labeled_y;
  Matrix unlabeled_x;
  std::vector<int> unlabeled_y_hidden;  // diagnostics only; -1 marks OOD samples
  Matrix test_x;
  std::vector<int> test_y;  // class-balanced
  Vec labeled_prior;        // realized P_L from labeled counts
  Vec unlabeled_prior;      // realized Q from unlabeled counts (in-distribution part)
};

DataSplit sample_split(const SyntheticTask& task, const LongTailSpec& spec, int test_per_class,
                       std::uint64_t seed);

struct AugmentConfig {
  double weak_sigma = 0.1;
  double strong_sigma = 0.5;
  double strong_dropout = 0.2;
};

Vec weak_augment(const Vec& x, const AugmentConfig& cfg, std::mt19937_64& rng);
Vec strong_augment(const Vec& x, const AugmentConfig& cfg, std::mt19937_64& rng);
Matrix weak_augment_rows(const Matrix& x, const AugmentConfig& cfg, std::mt19937_64& rng);
Matrix strong_augment_rows(const Matrix& x, const AugmentConfig& cfg, std::mt19937_64& rng);

/// Closed-form class posterior under the given prior:
/// posterior_k ∝ N(x; mu_k, sigma_g^2 I) * prior_k.
/// The labeled prior yields the labeled-optimal scorer, the unlabeled prior
/// its reweighting, and the uniform prior the balanced scorer.
Vec bayes_posterior(const SyntheticTask& task, const Vec& x, const Vec& prior);

/// One row per sample: feature_0..feature_{D-1}, label, split tag.
void write_split_csv(const DataSplit& split, const std::string& path);

}  // namespace adello
