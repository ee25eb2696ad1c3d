#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "modcomp/errors.hpp"
#include "modcomp/network.hpp"
#include "modcomp/text_io.hpp"
#include "oracles.hpp"

namespace {

using namespace modcomp;

Eigen::VectorXd random_input(int d, Rng& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x(i) = g(rng);
  return x;
}

std::vector<double> as_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

TEST(Init, SameSeedSameWeights) {
  Rng a = make_stream(1, "init");
  Rng b = make_stream(1, "init");
  EXPECT_EQ(init_weights(5, 3, {16, 12}, 0.1, a), init_weights(5, 3, {16, 12}, 0.1, b));
}

TEST(Init, ZeroScaleGivesZeros) {
  Rng rng = make_stream(2, "init");
  const Weights W = init_weights(4, 2, {8, 8}, 0.0, rng);
  EXPECT_TRUE(W.w[0].isZero(0.0));
  EXPECT_TRUE(W.w[1].isZero(0.0));
}

TEST(Init, GaussianMomentsMatchScale) {
  const double sigma0 = 1.0 / std::sqrt(20.0);
  Rng rng = make_stream(3, "init");
  const Weights W = init_weights(20, 6, {64, 64}, sigma0, rng);
  const Eigen::MatrixXd& w = W.w[0];
  const double n = static_cast<double>(w.size());  // 7680 entries
  EXPECT_NEAR(w.mean(), 0.0, 4 * sigma0 / std::sqrt(n));
  const double var = (w.array() - w.mean()).square().sum() / (n - 1);
  EXPECT_NEAR(std::sqrt(var), sigma0, 0.05 * sigma0);
  double mean_norm = 0.0;
  for (Eigen::Index i = 0; i < w.rows(); ++i) mean_norm += w.row(i).norm();
  mean_norm /= static_cast<double>(w.rows());
  EXPECT_NEAR(mean_norm, sigma0 * std::sqrt(64.0), 0.05 * sigma0 * 8.0);
}

TEST(Forward, ZeroWeightsGiveZeroLogits) {
  const Weights W{3, 2, {Eigen::MatrixXd::Zero(6, 5), Eigen::MatrixXd::Zero(6, 4)}};
  const ActParams p;
  Rng rng = make_stream(4, "x");
  const auto x1 = random_input(5, rng, 1.0);
  const auto x2 = random_input(4, rng, 1.0);
  EXPECT_TRUE(forward_multi(W, x1, x2, p).isZero(0.0));
  EXPECT_TRUE(forward_uni(modality_slice(W, 0), x1, p).isZero(0.0));
  EXPECT_TRUE(probe_forward(W, 1, x2, p).isZero(0.0));
}

TEST(Forward, SingleAlignedNeuron) {
  const ActParams p{3, 0.1};
  Rng rng = make_stream(5, "dict");
  const Dictionary D = build_dictionary(8, 4, rng);
  Weights W{4, 2, {Eigen::MatrixXd::Zero(8, 8), Eigen::MatrixXd::Zero(8, 8)}};
  const int j = 2;
  W.neuron(j, 0, 0) = 2 * p.beta * D.columns.col(j).transpose();
  const Eigen::VectorXd logits =
      forward_multi(W, D.columns.col(j), Eigen::VectorXd::Zero(8), p);
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(logits(k), k == j ? 2 * p.beta - p.beta * (1 - 1.0 / p.q) : 0.0, 1e-15);
  }
  // Uni-modal version: the logit is sigma of the inner product.
  const UniWeights V = modality_slice(W, 0);
  const Eigen::VectorXd x = 0.3 * D.columns.col(j);
  EXPECT_NEAR(forward_uni(V, x, p)(j), smooth_relu(2 * p.beta * 0.3, p), 1e-15);
}

TEST(Forward, MatchesScalarLoopOracle) {
  const ActParams p{3, 0.1};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_stream(seed, "oracle");
    const Weights W = init_weights(3, 2, {7, 5}, 0.3, rng);
    const auto x1 = random_input(7, rng, 0.5);
    const auto x2 = random_input(5, rng, 0.5);
    const auto a = oracle::encoder(W.w[0], 3, 2, as_vec(x1), p.q, p.beta);
    const auto b = oracle::encoder(W.w[1], 3, 2, as_vec(x2), p.q, p.beta);
    const Eigen::VectorXd f = forward_multi(W, x1, x2, p);
    const Eigen::VectorXd f1 = probe_forward(W, 0, x1, p);
    const Eigen::VectorXd f2 = probe_forward(W, 1, x2, p);
    for (int j = 0; j < 3; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      EXPECT_NEAR(f(j), a[jj] + b[jj], 1e-12);
      EXPECT_NEAR(f1(j), a[jj], 1e-12);
      EXPECT_NEAR(f2(j), b[jj], 1e-12);
    }
  }
}

TEST(Forward, BatchMatchesScalarOracleInEveryRegime) {
  // Inputs scaled so pre-activations land below 0, inside (0, beta) and above beta.
  for (int q : {3, 4, 5}) {
    const ActParams p{q, 0.1};
    Rng rng = make_stream(static_cast<std::uint64_t>(q), "batch");
    const Weights W = init_weights(4, 3, {6, 6}, 0.2, rng);
    Eigen::MatrixXd X(40, 6);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      X.row(i) = random_input(6, rng, 0.05 + 0.05 * static_cast<double>(i)).transpose();
    }
    const Eigen::MatrixXd L = probe_forward_batch(W, 0, X, p);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const auto ref = oracle::encoder(W.w[0], 4, 3, oracle::row(X, i), q, p.beta);
      for (int j = 0; j < 4; ++j) {
        EXPECT_NEAR(L(i, j), ref[static_cast<std::size_t>(j)],
                    1e-12 * std::max(1.0, std::abs(ref[static_cast<std::size_t>(j)])));
      }
    }
  }
}

TEST(Forward, FusionIsExactlyTheSumOfProbes) {
  const ActParams p;
  Rng rng = make_stream(6, "fusion");
  const Weights W = init_weights(5, 3, {9, 11}, 0.2, rng);
  for (int t = 0; t < 50; ++t) {
    const auto x1 = random_input(9, rng, 0.4);
    const auto x2 = random_input(11, rng, 0.4);
    const Eigen::VectorXd sum = probe_forward(W, 0, x1, p) + probe_forward(W, 1, x2, p);
    EXPECT_TRUE(forward_multi(W, x1, x2, p) == sum);
  }
}

TEST(Forward, PermutingClassBlocksPermutesLogits) {
  const ActParams p;
  const int K = 4;
  const int m = 3;
  Rng rng = make_stream(7, "perm");
  const Weights W = init_weights(K, m, {6, 6}, 0.3, rng);
  const std::vector<int> perm{2, 0, 3, 1};  // new class k takes old block perm[k]
  Weights P = W;
  for (int k = 0; k < K; ++k) {
    for (int r = 0; r < 2; ++r) {
      P.w[r].middleRows(k * m, m) = W.w[r].middleRows(perm[static_cast<std::size_t>(k)] * m, m);
    }
  }
  const auto x1 = random_input(6, rng, 0.5);
  const auto x2 = random_input(6, rng, 0.5);
  const Eigen::VectorXd a = forward_multi(W, x1, x2, p);
  const Eigen::VectorXd b = forward_multi(P, x1, x2, p);
  for (int k = 0; k < K; ++k) EXPECT_EQ(b(k), a(perm[static_cast<std::size_t>(k)]));
}

TEST(Forward, ShapeAndArgumentErrors) {
  const ActParams p;
  Rng rng = make_stream(8, "shape");
  const Weights W = init_weights(3, 2, {5, 4}, 0.1, rng);
  EXPECT_THROW(forward_multi(W, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4), p), ShapeError);
  EXPECT_THROW(probe_forward(W, 2, Eigen::VectorXd::Zero(5), p), std::invalid_argument);
  EXPECT_THROW(probe_forward(W, -1, Eigen::VectorXd::Zero(5), p), std::invalid_argument);
}

TEST(Serialization, JointRoundTrip) {
  oracle::TempDir dir("weights");
  Rng rng = make_stream(9, "save");
  const Weights W = init_weights(4, 3, {10, 7}, 0.05, rng);
  const ActParams p{4, 0.2};
  save_weights(dir / "w.mcwt", W, p, 0.05, 123);
  WeightsHeader h;
  const Weights back = load_weights(dir / "w.mcwt", &h);
  EXPECT_EQ(back, W);
  EXPECT_EQ(h.K, 4);
  EXPECT_EQ(h.m, 3);
  EXPECT_EQ(h.dims[0], 10);
  EXPECT_EQ(h.dims[1], 7);
  EXPECT_EQ(h.q, 4);
  EXPECT_EQ(h.beta, 0.2);
  EXPECT_EQ(h.sigma0, 0.05);
  EXPECT_EQ(h.iteration, 123u);
  EXPECT_EQ(h.kind, 0);
  EXPECT_THROW(load_uni_weights(dir / "w.mcwt"), FormatError);
}

TEST(Serialization, UniRoundTrip) {
  oracle::TempDir dir("weights");
  Rng rng = make_stream(10, "save");
  const UniWeights V = init_uni_weights(3, 2, 6, 0.1, rng);
  save_weights(dir / "v.mcwt", V, 1, ActParams{}, 0.1, 7);
  WeightsHeader h;
  EXPECT_EQ(load_uni_weights(dir / "v.mcwt", &h), V);
  EXPECT_EQ(h.kind, 2);
  EXPECT_EQ(read_weights_header(dir / "v.mcwt").iteration, 7u);
  EXPECT_THROW(load_weights(dir / "v.mcwt"), FormatError);
}

TEST(Serialization, CorruptFilesAreRejected) {
  oracle::TempDir dir("weights");
  Rng rng = make_stream(11, "save");
  const Weights W = init_weights(2, 2, {4, 4}, 0.1, rng);
  save_weights(dir / "w.mcwt", W, ActParams{}, 0.1, 0);
  const std::string bytes = read_file(dir / "w.mcwt");
  write_file_atomic(dir / "short.mcwt", bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(load_weights(dir / "short.mcwt"), FormatError);
  std::string bad = bytes;
  bad[0] = 'X';
  write_file_atomic(dir / "magic.mcwt", bad);
  EXPECT_THROW(load_weights(dir / "magic.mcwt"), FormatError);
  write_file_atomic(dir / "long.mcwt", bytes + "junk");
  EXPECT_THROW(load_weights(dir / "long.mcwt"), FormatError);
  EXPECT_ANY_THROW(load_weights(dir / "missing.mcwt"));
}

}  // namespace
