#include "adello/data.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace adello {

std::vector<int> lt_class_counts(int base, double gamma, int num_classes) {
  if (num_classes < 2) throw std::invalid_argument("lt_class_counts: need K >= 2");
  std::vector<int> counts(num_classes);
  for (int k = 0; k < num_classes; ++k) {
    const double kappa = static_cast<double>(k) / static_cast<double>(num_classes - 1);
    const double v = base * std::pow(gamma, -kappa);
    counts[k] = std::max(1, static_cast<int>(std::floor(v + 0.5)));  // round half up, floor 1
  }
  return counts;
}

SyntheticTask make_task(int dim, int num_classes, double separation, double sigma_g,
                        std::uint64_t seed) {
  if (dim < 2) throw std::invalid_argument("make_task: need dim >= 2");
  SyntheticTask task;
  task.dim = dim;
  task.num_classes = num_classes;
  task.sigma_g = sigma_g;
  task.seed = seed;

  std::mt19937_64 rng(seed);
  const double min_dist = separation * sigma_g;
  // cube sized so that K+1 points at the required spacing fit comfortably
  const double half = 0.75 * std::max(1.0, min_dist) *
                      std::pow(static_cast<double>(num_classes + 1), 1.0 / dim);
  std::uniform_real_distribution<double> u(-half, half);

  std::vector<Vec> placed;
  const int max_tries = 10000;
  for (int k = 0; k < num_classes + 1; ++k) {  // last point is the OOD component
    bool ok = false;
    for (int attempt = 0; attempt < max_tries && !ok; ++attempt) {
      Vec cand(dim);
      for (double& c : cand) c = u(rng);
      ok = true;
      for (const Vec& m : placed) {
        double d2 = 0.0;
        for (int i = 0; i < dim; ++i) d2 += (cand[i] - m[i]) * (cand[i] - m[i]);
        if (d2 < min_dist * min_dist) {
          ok = false;
          break;
        }
      }
      if (ok) placed.push_back(std::move(cand));
    }
    if (!ok) throw std::runtime_error("make_task: cannot satisfy separation constraint");
  }
  task.ood_mean = placed.back();
  placed.pop_back();
  task.means = std::move(placed);
  return task;
}

namespace {

void sample_class(const SyntheticTask& task, const Vec& mean, int count, int label, Matrix& x,
                  std::vector<int>& y, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, task.sigma_g);
  for (int i = 0; i < count; ++i) {
    const std::size_t r = y.size();
    for (int d = 0; d < task.dim; ++d) x(r, d) = mean[d] + n(rng);
    y.push_back(label);
  }
}

Vec normalize_counts(const std::vector<int>& counts) {
  double total = 0.0;
  for (int c : counts) total += c;
  Vec p(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) p[k] = counts[k] / total;
  return p;
}

}  // namespace

DataSplit sample_split(const SyntheticTask& task, const LongTailSpec& spec, int test_per_class,
                       std::uint64_t seed) {
  const int K = spec.num_classes;
  if (K != task.num_classes) throw std::invalid_argument("sample_split: class count mismatch");
  const auto labeled_counts = lt_class_counts(spec.labeled_head, spec.gamma_labeled, K);
  const auto unlabeled_counts = lt_class_counts(spec.unlabeled_head, spec.gamma_unlabeled, K);

  int n_l = 0, n_u = 0;
  for (int c : labeled_counts) n_l += c;
  for (int c : unlabeled_counts) n_u += c;
  const int n_ood = static_cast<int>(std::floor(spec.ood_fraction * n_u + 0.5));

  DataSplit split;
  split.labeled_x = Matrix(n_l, task.dim);
  split.unlabeled_x = Matrix(n_u + n_ood, task.dim);
  split.test_x = Matrix(static_cast<std::size_t>(test_per_class) * K, task.dim);
  split.labeled_prior = normalize_counts(labeled_counts);
  split.unlabeled_prior = normalize_counts(unlabeled_counts);

  std::mt19937_64 rng(seed);
  for (int k = 0; k < K; ++k)
    sample_class(task, task.means[k], labeled_counts[k], k, split.labeled_x, split.labeled_y, rng);
  for (int k = 0; k < K; ++k)
    sample_class(task, task.means[k], unlabeled_counts[k], k, split.unlabeled_x,
                 split.unlabeled_y_hidden, rng);
  if (n_ood > 0)
    sample_class(task, task.ood_mean, n_ood, -1, split.unlabeled_x, split.unlabeled_y_hidden, rng);
  for (int k = 0; k < K; ++k)
    sample_class(task, task.means[k], test_per_class, k, split.test_x, split.test_y, rng);
  return split;
}

Vec weak_augment(const Vec& x, const AugmentConfig& cfg, std::mt19937_64& rng) {
  Vec out = x;
  if (cfg.weak_sigma > 0.0) {
    std::normal_distribution<double> n(0.0, cfg.weak_sigma);
    for (double& v : out) v += n(rng);
  }
  return out;
}

Vec strong_augment(const Vec& x, const AugmentConfig& cfg, std::mt19937_64& rng) {
  Vec out = x;
  if (cfg.strong_sigma > 0.0) {
    std::normal_distribution<double> n(0.0, cfg.strong_sigma);
    for (double& v : out) v += n(rng);
  }
  if (cfg.strong_dropout > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : out) {
      if (u(rng) < cfg.strong_dropout) v = 0.0;
    }
  }
  return out;
}

Matrix weak_augment_rows(const Matrix& x, const AugmentConfig& cfg, std::mt19937_64& rng) {
  Matrix out(x.rows, x.cols);
  for (std::size_t r = 0; r < x.rows; ++r) out.set_row(r, weak_augment(x.row(r), cfg, rng));
  return out;
}

Matrix strong_augment_rows(const Matrix& x, const AugmentConfig& cfg, std::mt19937_64& rng) {
  Matrix out(x.rows, x.cols);
  for (std::size_t r = 0; r < x.rows; ++r) out.set_row(r, strong_augment(x.row(r), cfg, rng));
  return out;
}

Vec bayes_posterior(const SyntheticTask& task, const Vec& x, const Vec& prior) {
  const double inv_2s2 = 1.0 / (2.0 * task.sigma_g * task.sigma_g);
  Vec log_post(task.num_classes);
  for (int k = 0; k < task.num_classes; ++k) {
    double d2 = 0.0;
    for (int i = 0; i < task.dim; ++i)
      d2 += (x[i] - task.means[k][i]) * (x[i] - task.means[k][i]);
    log_post[k] = std::log(std::max(prior[k], kPriorEpsilon)) - d2 * inv_2s2;
  }
  return softmax(log_post);
}

void write_split_csv(const DataSplit& split, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_split_csv: cannot open " + path);
  const std::size_t dim = split.labeled_x.cols;
  for (std::size_t d = 0; d < dim; ++d) out << "feature_" << d << ",";
  out << "label,split\n";
  auto dump = [&](const Matrix& x, const std::vector<int>& y, const char* tag) {
    char buf[32];
    for (std::size_t r = 0; r < x.rows; ++r) {
      for (std::size_t d = 0; d < dim; ++d) {
        std::snprintf(buf, sizeof(buf), "%.9g", x(r, d));
        out << buf << ",";
      }
      out << y[r] << "," << tag << "\n";
    }
  };
  dump(split.labeled_x, split.labeled_y, "labeled");
  dump(split.unlabeled_x, split.unlabeled_y_hidden, "unlabeled");
  dump(split.test_x, split.test_y, "test");
  out.close();
}

}  // namespace adello
