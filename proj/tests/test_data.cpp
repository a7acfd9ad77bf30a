#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "adello/data.hpp"

using namespace adello;

TEST_CASE("lt_class_counts: Table-1-style forward tail") {
  const auto counts = lt_class_counts(1500, 100.0, 10);
  CHECK(counts.front() == 1500);
  CHECK(counts.back() == 15);
  for (std::size_t k = 1; k < counts.size(); ++k) CHECK(counts[k] <= counts[k - 1]);
}

TEST_CASE("lt_class_counts: gamma 1 is flat") {
  for (int c : lt_class_counts(300, 1.0, 7)) CHECK(c == 300);
}

TEST_CASE("lt_class_counts: reversed tail is nondecreasing") {
  const auto counts = lt_class_counts(300, 0.02, 100);
  CHECK(counts.front() == 300);
  CHECK(counts.back() == 15000);
  for (std::size_t k = 1; k < counts.size(); ++k) CHECK(counts[k] >= counts[k - 1]);
}

TEST_CASE("lt_class_counts: floor of one, K >= 2 required") {
  const auto counts = lt_class_counts(2, 1000.0, 5);
  for (int c : counts) CHECK(c >= 1);
  CHECK_THROWS(lt_class_counts(10, 2.0, 1));
}

TEST_CASE("make_task: deterministic and separated") {
  const auto a = make_task(2, 5, 2.0, 1.0, 42);
  const auto b = make_task(2, 5, 2.0, 1.0, 42);
  for (int k = 0; k < 5; ++k) CHECK(a.means[k] == b.means[k]);
  CHECK(a.ood_mean == b.ood_mean);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) {
      double d2 = 0.0;
      for (int d = 0; d < 2; ++d) d2 += (a.means[i][d] - a.means[j][d]) * (a.means[i][d] - a.means[j][d]);
      CHECK(std::sqrt(d2) >= 2.0);
    }
}

TEST_CASE("make_task: rejects dim < 2") {
  CHECK_THROWS(make_task(1, 3, 1.0, 1.0, 1));
}

TEST_CASE("make_task: well-separated two-class task has near-zero Bayes error") {
  const auto task = make_task(2, 2, 20.0, 0.1, 3);
  LongTailSpec spec;
  spec.num_classes = 2;
  spec.labeled_head = 200;
  spec.gamma_labeled = 1.0;
  spec.gamma_unlabeled = 1.0;
  spec.unlabeled_head = 10;
  const auto split = sample_split(task, spec, 100, 9);
  int errors = 0;
  const Vec uniform = uniform_prior(2);
  for (std::size_t i = 0; i < split.labeled_x.rows; ++i) {
    const Vec post = bayes_posterior(task, split.labeled_x.row(i), uniform);
    const int pred = post[0] >= post[1] ? 0 : 1;
    if (pred != split.labeled_y[i]) ++errors;
  }
  CHECK(errors == 0);
}

TEST_CASE("bayes accuracy: Monte-Carlo matches closed form") {
  // empirical accuracy of the posterior-argmax rule should match the
  // expected posterior mass it assigns to its own argmax
  const auto task = make_task(2, 5, 0.5, 1.0, 17);
  LongTailSpec spec;
  spec.gamma_labeled = 1.0;
  spec.gamma_unlabeled = 1.0;
  spec.labeled_head = 2000;
  spec.unlabeled_head = 10;
  const auto split = sample_split(task, spec, 10, 23);
  const Vec uniform = uniform_prior(5);
  double correct = 0.0, expected = 0.0;
  for (std::size_t i = 0; i < split.labeled_x.rows; ++i) {
    const Vec post = bayes_posterior(task, split.labeled_x.row(i), uniform);
    int arg = 0;
    for (int k = 1; k < 5; ++k)
      if (post[k] > post[arg]) arg = k;
    if (arg == split.labeled_y[i]) correct += 1.0;
    expected += post[arg];
  }
  const double n = static_cast<double>(split.labeled_x.rows);
  CHECK(std::abs(correct / n - expected / n) <= 0.02);
}

TEST_CASE("sample_split: counts, balance, determinism") {
  const auto task = make_task(3, 5, 2.0, 1.0, 7);
  LongTailSpec spec;
  spec.num_classes = 5;
  spec.labeled_head = 50;
  spec.gamma_labeled = 50.0;
  spec.unlabeled_head = 100;
  spec.gamma_unlabeled = 0.02;
  const auto split = sample_split(task, spec, 20, 5);

  const auto lc = lt_class_counts(50, 50.0, 5);
  const auto uc = lt_class_counts(100, 0.02, 5);
  std::vector<int> lhist(5, 0), uhist(5, 0);
  for (int y : split.labeled_y) ++lhist[y];
  for (int y : split.unlabeled_y_hidden) ++uhist[y];
  CHECK(lhist == lc);
  CHECK(uhist == uc);
  // reversed unlabeled tail: head class is the smallest
  CHECK(uhist.front() < uhist.back());
  CHECK(lhist.front() > lhist.back());

  std::vector<int> thist(5, 0);
  for (int y : split.test_y) ++thist[y];
  for (int c : thist) CHECK(c == 20);

  const auto again = sample_split(task, spec, 20, 5);
  CHECK(split.labeled_x.data == again.labeled_x.data);
  CHECK(split.unlabeled_x.data == again.unlabeled_x.data);
  CHECK(split.test_x.data == again.test_x.data);
}

TEST_CASE("sample_split: balanced gammas give balanced splits") {
  const auto task = make_task(2, 4, 2.0, 1.0, 7);
  LongTailSpec spec;
  spec.num_classes = 4;
  spec.labeled_head = 30;
  spec.gamma_labeled = 1.0;
  spec.unlabeled_head = 60;
  spec.gamma_unlabeled = 1.0;
  const auto split = sample_split(task, spec, 5, 5);
  std::vector<int> lhist(4, 0);
  for (int y : split.labeled_y) ++lhist[y];
  for (int c : lhist) CHECK(c == 30);
  for (double p : split.labeled_prior) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("sample_split: OOD injection appends hidden label -1") {
  const auto task = make_task(2, 3, 2.0, 1.0, 7);
  LongTailSpec spec;
  spec.num_classes = 3;
  spec.labeled_head = 10;
  spec.gamma_labeled = 1.0;
  spec.unlabeled_head = 100;
  spec.gamma_unlabeled = 1.0;
  spec.ood_fraction = 0.1;
  const auto split = sample_split(task, spec, 5, 5);
  int ood = 0;
  for (int y : split.unlabeled_y_hidden)
    if (y == -1) ++ood;
  CHECK(ood == 30);  // 10% of 300 in-distribution samples
  CHECK(split.unlabeled_x.rows == 330);
}

TEST_CASE("weak_augment: identity at zero scale, reproducible, centered") {
  AugmentConfig cfg;
  cfg.weak_sigma = 0.0;
  std::mt19937_64 rng(1);
  const Vec x{1.0, -2.0, 3.0};
  CHECK(weak_augment(x, cfg, rng) == x);

  cfg.weak_sigma = 0.1;
  std::mt19937_64 r1(9), r2(9);
  CHECK(weak_augment(x, cfg, r1) == weak_augment(x, cfg, r2));

  std::mt19937_64 r3(33);
  Vec mean(3, 0.0);
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const Vec y = weak_augment(x, cfg, r3);
    for (int d = 0; d < 3; ++d) mean[d] += (y[d] - x[d]) / n;
  }
  // mean displacement ~ N(0, sigma/sqrt(n)); 5 sigma bound
  for (int d = 0; d < 3; ++d) CHECK(std::abs(mean[d]) <= 5.0 * 0.1 / std::sqrt(n));
}

TEST_CASE("strong_augment: degenerate cases and dropout rate") {
  AugmentConfig cfg;
  cfg.strong_sigma = 0.0;
  cfg.strong_dropout = 0.0;
  std::mt19937_64 rng(1);
  const Vec x{1.0, -2.0, 3.0};
  CHECK(strong_augment(x, cfg, rng) == x);

  cfg.strong_dropout = 1.0 - 1e-12;
  const Vec zeroed = strong_augment(x, cfg, rng);
  for (double v : zeroed) CHECK(v == 0.0);

  cfg.strong_sigma = 0.5;
  cfg.strong_dropout = 0.2;
  std::mt19937_64 r(77);
  long zeros = 0;
  const long draws = 10000;
  const Vec big{5.0, 5.0, 5.0, 5.0};  // noise cannot plausibly hit exact zero
  for (long i = 0; i < draws; ++i)
    for (double v : strong_augment(big, cfg, r))
      if (v == 0.0) ++zeros;
  const double total = 4.0 * draws;
  const double sd = std::sqrt(total * 0.2 * 0.8);
  CHECK(std::abs(zeros - 0.2 * total) <= 3.0 * sd);
}

TEST_CASE("bayes_posterior: symmetry and dominant likelihood") {
  // two means mirrored about the origin: the midpoint is equidistant
  SyntheticTask task;
  task.dim = 2;
  task.num_classes = 2;
  task.sigma_g = 1.0;
  task.means = {{1.0, 0.0}, {-1.0, 0.0}};
  const Vec mid{0.0, 0.0};
  const Vec post = bayes_posterior(task, mid, uniform_prior(2));
  CHECK(post[0] == doctest::Approx(0.5).epsilon(1e-12));

  const auto sep = make_task(2, 4, 10.0, 0.5, 5);
  for (int k = 0; k < 4; ++k) {
    const Vec at_mean = bayes_posterior(sep, sep.means[k], uniform_prior(4));
    CHECK(at_mean[k] > 0.99);
  }
}

TEST_CASE("bayes_posterior: prior-reweighting identity") {
  const auto task = make_task(2, 5, 1.0, 1.0, 31);
  const Vec p_l{0.5, 0.25, 0.12, 0.08, 0.05};
  const Vec q{0.05, 0.08, 0.12, 0.25, 0.5};
  std::mt19937_64 rng(41);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vec x(2);
    for (double& v : x) v = n(rng);
    const Vec with_q = bayes_posterior(task, x, q);
    Vec reweighted = bayes_posterior(task, x, p_l);
    double sum = 0.0;
    for (int k = 0; k < 5; ++k) {
      reweighted[k] *= q[k] / p_l[k];
      sum += reweighted[k];
    }
    for (int k = 0; k < 5; ++k) CHECK(std::abs(with_q[k] - reweighted[k] / sum) <= 1e-10);
  }
}

TEST_CASE("write_split_csv round trip shape") {
  const auto task = make_task(2, 3, 2.0, 1.0, 7);
  LongTailSpec spec;
  spec.num_classes = 3;
  spec.labeled_head = 4;
  spec.gamma_labeled = 2.0;
  spec.unlabeled_head = 6;
  spec.gamma_unlabeled = 2.0;
  const auto split = sample_split(task, spec, 2, 5);
  const std::string path = "split_test.csv";
  write_split_csv(split, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "feature_0,feature_1,label,split");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == static_cast<int>(split.labeled_x.rows + split.unlabeled_x.rows + split.test_x.rows));
  std::remove(path.c_str());
}
