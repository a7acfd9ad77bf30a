#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace adello {

using Vec = std::vector<double>;

/// Dense row-major matrix. Just enough linear algebra for a small MLP.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  Vec row(std::size_t r) const {
    return Vec(data.begin() + static_cast<long>(r * cols),
               data.begin() + static_cast<long>((r + 1) * cols));
  }
  void set_row(std::size_t r, const Vec& v) {
    for (std::size_t c = 0; c < cols; ++c) (*this)(r, c) = v[c];
  }
};

inline constexpr double kPriorEpsilon = 1e-8;

bool all_finite(const Vec& v);

/// Temperature-scaled softmax, stable via max subtraction.
/// Throws on non-finite logits or temperature <= 0.
Vec softmax(const Vec& logits, double temperature = 1.0);

/// Row-wise softmax of a logit matrix.
Matrix softmax_rows(const Matrix& logits, double temperature = 1.0);

/// log(softmax(logits)) via log-sum-exp; never exponentiates then logs.
Vec log_softmax(const Vec& logits);

/// H(target, softmax(logits)) = -sum_k target_k * log_softmax(logits)_k.
double cross_entropy(const Vec& target, const Vec& logits);

/// Shannon entropy of a probability vector, with 0 log 0 = 0.
double entropy(const Vec& p);

/// KL(p || q) with q clamped at epsilon and the 0 log 0 = 0 convention.
double kl_divergence(const Vec& p, const Vec& q, double epsilon = kPriorEpsilon);

/// Uniform distribution over k classes.
Vec uniform_prior(std::size_t k);

/// True iff v is on the simplex (nonnegative, sums to 1 within tol).
bool is_prob_vector(const Vec& v, double tol = 1e-9);

}  // namespace adello
