#pragma once

#include <cmath>

#include "modcomp/errors.hpp"

namespace modcomp {

/// Smoothed ReLU: zero for x <= 0, x^q / (q beta^(q-1)) on [0, beta],
/// x - beta (1 - 1/q) above beta. C^1 everywhere. The batch kernels in the
/// library evaluate the same expressions, so results agree bit for bit.
struct ActParams {
  int q = 3;
  double beta = 0.1;

  void validate() const {
    if (q < 3) throw ConfigError("activation: q must be an integer >= 3");
    if (!(beta > 0.0)) throw ConfigError("activation: beta must be positive");
  }

  bool operator==(const ActParams&) const = default;
};

namespace detail {
inline double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}
}  // namespace detail

/// 1 / beta^(q-1).
inline double beta_scale(const ActParams& p) { return 1.0 / detail::ipow(p.beta, p.q - 1); }

inline double smooth_relu(double x, const ActParams& p) {
  if (x <= 0.0) return 0.0;
  if (x >= p.beta) return x - p.beta + p.beta / p.q;
  return detail::ipow(x, p.q - 1) * x * (beta_scale(p) / p.q);
}

inline double smooth_relu_deriv(double x, const ActParams& p) {
  if (x <= 0.0) return 0.0;
  if (x >= p.beta) return 1.0;
  return detail::ipow(x, p.q - 1) * beta_scale(p);
}

}  // namespace modcomp
