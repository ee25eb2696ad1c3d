#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "modcomp/activation.hpp"
#include "modcomp/errors.hpp"
#include "oracles.hpp"

namespace {

using modcomp::ActParams;
using modcomp::smooth_relu;
using modcomp::smooth_relu_deriv;

TEST(SmoothRelu, PointValues) {
  const ActParams p{3, 0.1};
  EXPECT_EQ(smooth_relu(-1.0, p), 0.0);
  EXPECT_NEAR(smooth_relu(0.05, p), 0.05 * 0.05 * 0.05 / (0.01 * 3), 1e-15);
  EXPECT_NEAR(smooth_relu(0.2, p), 0.2 - 0.1 * (2.0 / 3.0), 1e-15);
  EXPECT_EQ(smooth_relu_deriv(-0.3, p), 0.0);
  EXPECT_NEAR(smooth_relu_deriv(0.05, p), 0.25, 1e-15);
  EXPECT_EQ(smooth_relu_deriv(0.1, p), 1.0);
}

TEST(SmoothRelu, ValueAtBetaIsExact) {
  for (int q : {3, 4, 5, 7}) {
    for (double beta : {0.1, 0.25, 1.0, 0.3, 1e-3}) {
      const ActParams p{q, beta};
      EXPECT_EQ(smooth_relu(beta, p), beta / q) << "q=" << q << " beta=" << beta;
    }
  }
}

// A jump at a kink is what remains of f(k + h) - f(k - h) after the
// first-order change from each side is removed.
TEST(SmoothRelu, ContinuousAtKinks) {
  const double h = 1e-9;
  for (int q : {3, 4, 6}) {
    const ActParams p{q, 0.1};
    const double b = p.beta;
    EXPECT_LE(std::abs(smooth_relu(b + h, p) - smooth_relu(b - h, p) - 2 * h), 1e-12);
    EXPECT_LE(std::abs(smooth_relu(h, p) - smooth_relu(-h, p)), 1e-12);
    const double left_slope = (q - 1) / b;  // sigma'' just below beta
    EXPECT_LE(std::abs(smooth_relu_deriv(b + h, p) - smooth_relu_deriv(b - h, p) - h * left_slope),
              1e-12);
    EXPECT_LE(std::abs(smooth_relu_deriv(h, p) - smooth_relu_deriv(-h, p)), 1e-12);
  }
}

TEST(SmoothRelu, MatchesPiecewiseOracle) {
  for (int q : {3, 4, 5}) {
    const ActParams p{q, 0.1};
    for (int i = 0; i <= 4000; ++i) {
      const double x = -1.0 + 3.0 * i / 4000.0;
      EXPECT_NEAR(smooth_relu(x, p), oracle::relu_q(x, q, p.beta), 1e-14) << x;
      EXPECT_NEAR(smooth_relu_deriv(x, p), oracle::relu_q_deriv(x, q, p.beta), 1e-13) << x;
    }
  }
}

TEST(SmoothRelu, MonotoneOnDenseGrid) {
  const ActParams p{3, 0.1};
  double prev = smooth_relu(-1.0, p);
  for (int i = 1; i <= 10000; ++i) {
    const double x = -1.0 + 3.0 * i / 10000.0;
    const double v = smooth_relu(x, p);
    EXPECT_GE(v, prev) << x;
    EXPECT_GE(smooth_relu_deriv(x, p), 0.0) << x;
    prev = v;
  }
}

TEST(SmoothRelu, DerivativeMatchesCentralDifference) {
  // Error of a central difference is O(h^2) away from the kinks.
  const ActParams p{4, 0.1};
  const double h = 1e-5;
  for (int i = 0; i <= 3000; ++i) {
    const double x = -0.5 + 1.0 * i / 3000.0;
    if (std::abs(x) <= 2 * h || std::abs(x - p.beta) <= 2 * h) continue;
    const double fd = (smooth_relu(x + h, p) - smooth_relu(x - h, p)) / (2 * h);
    EXPECT_LE(std::abs(fd - smooth_relu_deriv(x, p)), 50.0 * h * h / (p.beta * p.beta)) << x;
  }
}

TEST(ActParams, Validate) {
  EXPECT_NO_THROW((ActParams{3, 0.1}.validate()));
  EXPECT_THROW((ActParams{2, 0.1}.validate()), modcomp::ConfigError);
  EXPECT_THROW((ActParams{3, 0.0}.validate()), modcomp::ConfigError);
  EXPECT_THROW((ActParams{3, std::numeric_limits<double>::quiet_NaN()}.validate()),
               modcomp::ConfigError);
}

}  // namespace
