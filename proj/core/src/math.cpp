#include "adello/math.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adello {

bool all_finite(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Vec softmax(const Vec& logits, double temperature) {
  if (temperature <= 0.0) throw std::invalid_argument("invalid temperature");
  if (!all_finite(logits)) throw std::invalid_argument("non-finite logits");
  const double m = *std::max_element(logits.begin(), logits.end());
  Vec out(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp((logits[k] - m) / temperature);
    sum += out[k];
  }
  for (double& x : out) x /= sum;
  return out;
}

Matrix softmax_rows(const Matrix& logits, double temperature) {
  Matrix out(logits.rows, logits.cols);
  for (std::size_t r = 0; r < logits.rows; ++r) out.set_row(r, softmax(logits.row(r), temperature));
  return out;
}

Vec log_softmax(const Vec& logits) {
  if (!all_finite(logits)) throw std::invalid_argument("non-finite logits");
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  const double lse = m + std::log(sum);
  Vec out(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) out[k] = logits[k] - lse;
  return out;
}

double cross_entropy(const Vec& target, const Vec& logits) {
  if (target.size() != logits.size()) throw std::invalid_argument("cross_entropy: shape mismatch");
  const Vec ls = log_softmax(logits);
  double h = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    if (target[k] != 0.0) h -= target[k] * ls[k];
  }
  return h;
}

double entropy(const Vec& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

double kl_divergence(const Vec& p, const Vec& q, double epsilon) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: shape mismatch");
  double kl = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) kl += p[k] * std::log(p[k] / std::max(q[k], epsilon));
  }
  return kl;
}

Vec uniform_prior(std::size_t k) { return Vec(k, 1.0 / static_cast<double>(k)); }

bool is_prob_vector(const Vec& v, double tol) {
  double sum = 0.0;
  for (double x : v) {
    if (x < 0.0 || !std::isfinite(x)) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= tol;
}

}  // namespace adello
