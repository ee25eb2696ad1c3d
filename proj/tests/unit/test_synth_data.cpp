#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "modcomp/errors.hpp"
#include "modcomp/synth_data.hpp"

namespace {

using namespace modcomp;

double max_gram_error(const Dictionary& D) {
  const Eigen::MatrixXd G = D.columns.transpose() * D.columns;
  return (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

TEST(Dictionary, SquareIsOrthogonal) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_stream(seed, "dict-test");
    EXPECT_LE(max_gram_error(build_dictionary(4, 4, rng)), 1e-10);
  }
}

TEST(Dictionary, DefaultShapeHasUnitColumns) {
  Rng rng = make_stream(1, "dict-test");
  const Dictionary D = build_dictionary(64, 20, rng);
  ASSERT_EQ(D.dim(), 64);
  ASSERT_EQ(D.num_classes(), 20);
  for (int j = 0; j < 20; ++j) EXPECT_NEAR(D.columns.col(j).norm(), 1.0, 1e-10);
  EXPECT_LE(max_gram_error(D), 1e-10);
}

TEST(Dictionary, RejectsTooFewDimensions) {
  Rng rng = make_stream(1, "dict-test");
  EXPECT_THROW(build_dictionary(3, 5, rng), ConfigError);
}

TEST(SparseCode, ZeroMuIsAlwaysSufficient) {
  ModalityConfig mc;
  mc.mu = 0.0;
  Rng rng = make_stream(2, "codes");
  for (int i = 0; i < 2000; ++i) {
    const SparseCode c = sample_sparse_code(i % 20, mc, 20, 3.0, rng);
    EXPECT_TRUE(c.sufficient);
    EXPECT_GE(c.z(c.label), 1.0);
    EXPECT_LE(c.z(c.label), mc.C_big);
  }
}

// A full configuration rejects mu = 1, but the sampler itself accepts it.
TEST(SparseCode, UnitMuIsAlwaysInsufficient) {
  ModalityConfig mc;
  mc.mu = 1.0;
  Rng rng = make_stream(3, "codes");
  for (int i = 0; i < 2000; ++i) {
    const SparseCode c = sample_sparse_code(i % 20, mc, 20, 3.0, rng);
    EXPECT_FALSE(c.sufficient);
    EXPECT_GE(c.z(c.label), 0.05);
    EXPECT_LE(c.z(c.label), 0.15);
  }
}

// Every coordinate of every code sits in its configured band.
TEST(SparseCode, BandsHoldExactly) {
  ModalityConfig mc;
  Rng rng = make_stream(4, "codes");
  for (int i = 0; i < 20000; ++i) {
    const int y = i % 20;
    const SparseCode c = sample_sparse_code(y, mc, 20, 3.0, rng);
    ASSERT_EQ(c.label, y);
    const double lo_y = c.sufficient ? 1.0 : mc.gamma / 2;
    const double hi_y = c.sufficient ? mc.C_big : 1.5 * mc.gamma;
    ASSERT_GE(c.z(y), lo_y);
    ASSERT_LE(c.z(y), hi_y);
    const double lo = c.sufficient ? mc.c_small / 2 : mc.rho / 2;
    const double hi = c.sufficient ? mc.c_small : mc.rho;
    for (int j = 0; j < 20; ++j) {
      if (j == y || c.z(j) == 0.0) continue;
      ASSERT_GE(c.z(j), lo);
      ASSERT_LE(c.z(j), hi);
    }
  }
}

TEST(SparseCode, OffTargetSupportMatchesBinomialMean) {
  ModalityConfig mc;
  Rng rng = make_stream(5, "codes");
  const int N = 10000;
  const int K = 20;
  const double s = 3.0;
  double total = 0.0;
  for (int i = 0; i < N; ++i) {
    const SparseCode c = sample_sparse_code(0, mc, K, s, rng);
    for (int j = 1; j < K; ++j) total += c.z(j) != 0.0 ? 1.0 : 0.0;
  }
  const double p = s / K;
  const double mean = (K - 1) * p;
  const double sd_of_mean = std::sqrt((K - 1) * p * (1 - p) / N);
  EXPECT_NEAR(total / N, mean, 3 * sd_of_mean);
}

TEST(SpikeNoise, ZeroAlphaIsZero) {
  Rng rng = make_stream(6, "spike");
  EXPECT_TRUE(sample_spike_noise(3, 20, 0.0, rng).isZero(0.0));
}

TEST(SpikeNoise, LabelCoordinateIsZeroAndMomentsMatch) {
  Rng rng = make_stream(7, "spike");
  const int N = 10000;
  double sum = 0.0;
  double top = 0.0;
  for (int i = 0; i < N; ++i) {
    const int y = i % 20;
    const Eigen::VectorXd a = sample_spike_noise(y, 20, 0.01, rng);
    ASSERT_EQ(a(y), 0.0);
    for (int j = 0; j < 20; ++j) {
      if (j == y) continue;
      ASSERT_GE(a(j), 0.0);
      sum += a(j);
      top = std::max(top, a(j));
    }
  }
  EXPECT_LE(top, 0.01);
  const double mean = sum / (N * 19.0);
  // U[0, 0.01] has sd 0.01 / sqrt(12).
  EXPECT_NEAR(mean, 0.005, 4 * 0.01 / std::sqrt(12.0 * N * 19.0));
}

DataConfig small_config() {
  DataConfig cfg;
  cfg.K = 8;
  for (auto& mc : cfg.modalities) mc.d = 16;
  return cfg;
}

std::array<Dictionary, kNumModalities> dicts_for(const DataConfig& cfg, Rng& rng) {
  return make_data_model(cfg, rng).dictionaries;
}

TEST(Assemble, NoiselessProjectionRecoversCode) {
  DataConfig cfg = small_config();
  cfg.alpha = 0.0;
  cfg.sigma_g = 0.0;
  Rng rng = make_stream(8, "assemble");
  const auto dicts = dicts_for(cfg, rng);
  for (int i = 0; i < 200; ++i) {
    const int y = i % cfg.K;
    const std::array<SparseCode, 2> codes{
        sample_sparse_code(y, cfg.modalities[0], cfg.K, cfg.s, rng),
        sample_sparse_code(y, cfg.modalities[1], cfg.K, cfg.s, rng)};
    const Sample smp = assemble_sample(dicts, codes, cfg, rng);
    for (int r = 0; r < 2; ++r) {
      const Eigen::VectorXd back = dicts[r].columns.transpose() * smp.x[r];
      EXPECT_LE((back - codes[r].z).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Assemble, SpikeIsRecoveredWithoutGaussianNoise) {
  DataConfig cfg = small_config();
  cfg.sigma_g = 0.0;
  Rng rng = make_stream(9, "assemble");
  const auto dicts = dicts_for(cfg, rng);
  for (int i = 0; i < 200; ++i) {
    const int y = i % cfg.K;
    const std::array<SparseCode, 2> codes{
        sample_sparse_code(y, cfg.modalities[0], cfg.K, cfg.s, rng),
        sample_sparse_code(y, cfg.modalities[1], cfg.K, cfg.s, rng)};
    const Sample smp = assemble_sample(dicts, codes, cfg, rng);
    for (int r = 0; r < 2; ++r) {
      const Eigen::VectorXd back = dicts[r].columns.transpose() * smp.x[r];
      EXPECT_LE((back - codes[r].z - smp.spike[r]).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_EQ(smp.spike[r](y), 0.0);
    }
  }
}

TEST(Assemble, GaussianResidualStaysWithinSixSigma) {
  DataConfig cfg = small_config();
  Rng rng = make_stream(10, "assemble");
  const auto dicts = dicts_for(cfg, rng);
  int outliers = 0;
  for (int i = 0; i < 1000; ++i) {
    const int y = i % cfg.K;
    const std::array<SparseCode, 2> codes{
        sample_sparse_code(y, cfg.modalities[0], cfg.K, cfg.s, rng),
        sample_sparse_code(y, cfg.modalities[1], cfg.K, cfg.s, rng)};
    const Sample smp = assemble_sample(dicts, codes, cfg, rng);
    for (int r = 0; r < 2; ++r) {
      const Eigen::VectorXd back = dicts[r].columns.transpose() * smp.x[r];
      if ((back - codes[r].z - smp.spike[r]).cwiseAbs().maxCoeff() > 6 * cfg.sigma_g) ++outliers;
      // The stored parts add up to the observation.
      const Eigen::VectorXd rebuilt =
          dicts[r].columns * (smp.z[r] + smp.spike[r]) + smp.gaussian[r];
      EXPECT_LE((rebuilt - smp.x[r]).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
  EXPECT_EQ(outliers, 0);
}

TEST(Assemble, LabelMismatchIsALogicError) {
  DataConfig cfg = small_config();
  Rng rng = make_stream(11, "assemble");
  const auto dicts = dicts_for(cfg, rng);
  const std::array<SparseCode, 2> codes{
      sample_sparse_code(1, cfg.modalities[0], cfg.K, cfg.s, rng),
      sample_sparse_code(2, cfg.modalities[1], cfg.K, cfg.s, rng)};
  EXPECT_THROW(assemble_sample(dicts, codes, cfg, rng), std::logic_error);
}

TEST(Dataset, NoInsufficientSamplesWhenMuIsZero) {
  DataConfig cfg = small_config();
  cfg.modalities[0].mu = cfg.modalities[1].mu = 0.0;
  Rng rng = make_stream(12, "dataset");
  const Dataset data = sample_dataset(cfg, 1000, rng);
  EXPECT_EQ(data.n_i(), 0u);
  EXPECT_EQ(data.n_s(), 1000u);
}

TEST(Dataset, InsufficiencyRateWithinFourSigma) {
  DataConfig cfg = small_config();
  cfg.modalities[0].mu = 0.1;
  cfg.modalities[1].mu = 0.3;
  Rng rng = make_stream(13, "dataset");
  const std::size_t N = 20000;
  const Dataset data = sample_dataset(cfg, N, rng);
  for (int r = 0; r < 2; ++r) {
    const double mu = cfg.modalities[r].mu;
    const auto& s = data.sufficient[r];
    const double insufficient =
        static_cast<double>(std::count(s.begin(), s.end(), std::uint8_t{0})) / N;
    EXPECT_NEAR(insufficient, mu, 4 * std::sqrt(mu * (1 - mu) / N)) << "modality " << r;
  }
}

TEST(Dataset, LabelCountsAreNearUniform) {
  DataConfig cfg;
  Rng rng = make_stream(14, "dataset");
  const std::size_t n = 10000;
  const Dataset data = sample_dataset(cfg, n, rng);
  std::vector<int> counts(20, 0);
  for (int y : data.y) ++counts[static_cast<std::size_t>(y)];
  for (int c : counts) EXPECT_NEAR(c, n / 20.0, 3 * std::sqrt(n / 20.0));
}

TEST(Dataset, SameSeedIsBitIdentical) {
  const DataConfig cfg = small_config();
  Rng a = make_stream(15, "dataset");
  Rng b = make_stream(15, "dataset");
  const Dataset d1 = sample_dataset(cfg, 300, a);
  const Dataset d2 = sample_dataset(cfg, 300, b);
  EXPECT_EQ(d1.y, d2.y);
  for (int r = 0; r < 2; ++r) {
    EXPECT_TRUE(d1.x[r] == d2.x[r]);
    EXPECT_EQ(d1.sufficient[r], d2.sufficient[r]);
  }
}

TEST(Dataset, SampleViewMatchesStorage) {
  const DataConfig cfg = small_config();
  Rng rng = make_stream(16, "dataset");
  const Dataset data = sample_dataset(cfg, 50, rng);
  ASSERT_TRUE(data.provenance.has_value());
  ASSERT_TRUE(data.dictionaries.has_value());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Sample s = data.sample(i);
    EXPECT_EQ(s.y, data.y[i]);
    for (int r = 0; r < 2; ++r) {
      EXPECT_TRUE(s.x[r] == data.x[r].row(static_cast<Eigen::Index>(i)).transpose());
      EXPECT_EQ(s.sufficient[r], data.sufficient[r][i] != 0);
    }
  }
}

TEST(DataConfig, ValidationRejectsBadValues) {
  DataConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  auto bad = [](auto mutate) {
    DataConfig c;
    mutate(c);
    return c;
  };
  EXPECT_THROW(bad([](DataConfig& c) { c.K = 1; }).validate(), ConfigError);
  EXPECT_THROW(bad([](DataConfig& c) { c.s = -1; }).validate(), ConfigError);
  EXPECT_THROW(bad([](DataConfig& c) { c.alpha = -0.1; }).validate(), ConfigError);
  EXPECT_THROW(bad([](DataConfig& c) { c.sigma_g = -1e-3; }).validate(), ConfigError);
  EXPECT_THROW(bad([](DataConfig& c) { c.modalities[0].mu = 1.0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](DataConfig& c) { c.modalities[1].gamma = 0.5; }).validate(), ConfigError);
  EXPECT_THROW(bad([](DataConfig& c) { c.modalities[1].c_small = 0.6; }).validate(), ConfigError);
  EXPECT_THROW(bad([](DataConfig& c) { c.modalities[0].d = 10; }).validate(), ConfigError);
}

TEST(Dataset, EmptyRequestIsRejected) {
  Rng rng = make_stream(17, "dataset");
  EXPECT_THROW(sample_dataset(small_config(), 0, rng), std::invalid_argument);
}

}  // namespace
