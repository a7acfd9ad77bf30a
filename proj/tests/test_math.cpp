#include <doctest.h>

#include <cmath>
#include <random>

#include "adello/math.hpp"

using namespace adello;

namespace {

Vec random_simplex(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Vec p(k);
  double s = 0.0;
  for (double& x : p) {
    x = u(rng);
    s += x;
  }
  for (double& x : p) x /= s;
  return p;
}

}  // namespace

TEST_CASE("softmax basics") {
  auto p = softmax({0.0, 0.0, 0.0});
  CHECK(p[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  p = softmax({std::log(2.0), 0.0});
  CHECK(p[0] == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  p = softmax({10.0, 0.0}, 1e6);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("softmax errors") {
  CHECK_THROWS_WITH(softmax({1.0, 0.0}, 0.0), doctest::Contains("invalid temperature"));
  CHECK_THROWS_WITH(softmax({1.0, 0.0}, -1.0), doctest::Contains("invalid temperature"));
  CHECK_THROWS_WITH(softmax({std::nan(""), 0.0}), doctest::Contains("non-finite logits"));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS(softmax({inf, 0.0}));
}

TEST_CASE("softmax: simplex output and shift invariance") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vec logits(5);
    for (double& z : logits) z = u(rng);
    const Vec p = softmax(logits);
    double sum = 0.0;
    for (double x : p) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    Vec shifted = logits;
    for (double& z : shifted) z += 7.5;
    const Vec q = softmax(shifted);
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(std::abs(p[k] - q[k]) <= 1e-9);
  }
}

TEST_CASE("cross_entropy hand values") {
  CHECK(cross_entropy({1.0, 0.0, 0.0}, {1e9, 0.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(cross_entropy({0.5, 0.5}, {0.0, 0.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(cross_entropy({0.0, 1.0}, {0.0, 0.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS(cross_entropy({1.0, 0.0, 0.0}, {0.0, 0.0}));
}

TEST_CASE("cross_entropy >= entropy (Gibbs)") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec target = random_simplex(rng, 4);
    Vec logits(4);
    for (double& z : logits) z = u(rng);
    CHECK(cross_entropy(target, logits) >= entropy(target) - 1e-9);
  }
}

TEST_CASE("kl_divergence hand values and nonnegativity") {
  const Vec u4 = uniform_prior(4);
  CHECK(kl_divergence(u4, u4) == doctest::Approx(0.0).epsilon(1e-12));

  const double expected = 0.5 * std::log(0.5 / 0.8) + 0.5 * std::log(0.5 / 0.2);
  CHECK(kl_divergence({0.5, 0.5}, {0.8, 0.2}) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(kl_divergence({0.5, 0.5}, {0.8, 0.2}) == doctest::Approx(0.22314).epsilon(1e-4));

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec p = random_simplex(rng, 6);
    const Vec q = random_simplex(rng, 6);
    CHECK(kl_divergence(p, q) >= 0.0);
  }
}

TEST_CASE("kl_divergence zero convention") {
  CHECK(kl_divergence({0.0, 1.0}, {0.5, 0.5}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("is_prob_vector") {
  CHECK(is_prob_vector({0.25, 0.75}));
  CHECK_FALSE(is_prob_vector({0.5, 0.6}));
  CHECK_FALSE(is_prob_vector({-0.1, 1.1}));
}
