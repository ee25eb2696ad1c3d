#pragma once

// Column-vectorized forms of the activation, neuron pooling and softmax used
// by the forward and gradient passes. Layouts: pre-activations are n x (K*m)
// with neuron (j, l) in column j*m + l; logits are n x K.

#include <algorithm>

#include <Eigen/Dense>

#include "modcomp/activation.hpp"

namespace modcomp::batch {

namespace detail {

/// Same arithmetic as the scalar smooth_relu / smooth_relu_deriv, arranged so
/// the compiler can vectorize it: the branches become selects.
template <int Q>
void activate_column(double* col, double* logits, Eigen::Index n, const ActParams& p,
                     bool keep_deriv) {
  const double beta = p.beta;
  const double inv = beta_scale(p);
  const double scale = inv / Q;
  const double beta_q = beta / Q;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = col[i];
    const double c = std::min(std::max(x, 0.0), beta);
    double pw = c;
    for (int k = 2; k < Q; ++k) pw *= c;  // c^(Q-1)
    logits[i] += x >= beta ? x - beta + beta_q : pw * c * scale;
    if (keep_deriv) col[i] = x >= beta ? 1.0 : pw * inv;
  }
}

inline void activate_column(double* col, double* logits, Eigen::Index n, const ActParams& p,
                            bool keep_deriv) {
  switch (p.q) {
    case 3: return activate_column<3>(col, logits, n, p, keep_deriv);
    case 4: return activate_column<4>(col, logits, n, p, keep_deriv);
    default: break;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = col[i];
    logits[i] += smooth_relu(x, p);
    if (keep_deriv) col[i] = smooth_relu_deriv(x, p);
  }
}

}  // namespace detail

/// Pools the smoothed ReLU of every neuron into n x K logits, using
/// sigma(x) = min(x+, beta)^q / (q beta^(q-1)) + (x - beta)+. With
/// `keep_deriv`, `pre` is overwritten by sigma'(pre) = (min(x+, beta) / beta)^(q-1).
inline Eigen::MatrixXd activate_and_pool(Eigen::MatrixXd& pre, int K, int m, const ActParams& p,
                                         bool keep_deriv) {
  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(pre.rows(), K);
  for (int j = 0; j < K; ++j) {
    for (int l = 0; l < m; ++l) {
      detail::activate_column(pre.col(j * m + l).data(), logits.col(j).data(), pre.rows(), p,
                              keep_deriv);
    }
  }
  return logits;
}

/// Row-wise log-sum-exp of an n x K logit matrix.
inline Eigen::VectorXd log_sum_exp(const Eigen::MatrixXd& logits) {
  const Eigen::VectorXd top = logits.rowwise().maxCoeff();
  const Eigen::VectorXd sums = (logits.colwise() - top).array().exp().rowwise().sum();
  return top.array() + sums.array().log();
}

/// Row-wise softmax.
inline Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  const Eigen::VectorXd top = logits.rowwise().maxCoeff();
  Eigen::ArrayXXd e = (logits.colwise() - top).array().exp();
  const Eigen::ArrayXd sums = e.rowwise().sum();
  e.colwise() /= sums;
  return e.matrix();
}

}  // namespace modcomp::batch
