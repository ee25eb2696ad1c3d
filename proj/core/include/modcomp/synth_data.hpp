#pragma once

// Two-modality sparse coding data model.
//
// Each modality r observes x_r = M^r z^r + M^r a^r + g^r where M^r is a
// d_r x K dictionary with orthonormal columns, z^r a sparse code whose target
// coordinate z^r_y is either large ("sufficient") or small ("insufficient"),
// a^r a non-negative spike vector with a^r_y = 0, and g^r isotropic Gaussian
// noise. Class indices are 0-based throughout.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "modcomp/rng.hpp"

namespace modcomp {

inline constexpr int kNumModalities = 2;

struct ModalityConfig {
  int d = 64;             ///< input dimension
  double gamma = 0.1;     ///< insufficient target scale; z_y ~ U[gamma/2, 3 gamma/2]
  double rho = 0.4;       ///< insufficient off-target ceiling; z_j ~ U[rho/2, rho]
  double mu = 0.1;        ///< probability that a code is insufficient
  double C_big = 2.0;     ///< sufficient target upper bound; z_y ~ U[1, C_big]
  double c_small = 0.45;  ///< sufficient off-target ceiling; z_j ~ U[c_small/2, c_small]

  /// Throws ConfigError unless 0 < gamma < rho < 1, 0 <= mu < 1, C_big >= 1,
  /// 0 < c_small < 1/2 and d >= K.
  void validate(int K) const;

  bool operator==(const ModalityConfig&) const = default;
};

struct DataConfig {
  int K = 20;
  double s = 3.0;  ///< each off-target coordinate is active with probability s/K
  double alpha = 0.01;
  double sigma_g = 1e-3;
  std::array<ModalityConfig, kNumModalities> modalities{};
  std::uint64_t seed = 0;

  void validate() const;

  bool operator==(const DataConfig&) const = default;
};

/// d x K matrix with orthonormal columns; column j is the feature of class j.
struct Dictionary {
  Eigen::MatrixXd columns;

  int dim() const { return static_cast<int>(columns.rows()); }
  int num_classes() const { return static_cast<int>(columns.cols()); }
};

struct SparseCode {
  Eigen::VectorXd z;
  bool sufficient = true;
  int label = 0;
};

/// One paired draw. x, z, spike and gaussian are kept so that
/// x[r] == M^r (z[r] + spike[r]) + gaussian[r] can be checked after the fact.
struct Sample {
  int y = 0;
  std::array<Eigen::VectorXd, kNumModalities> x;
  std::array<bool, kNumModalities> sufficient{true, true};
  std::array<Eigen::VectorXd, kNumModalities> z;
  std::array<Eigen::VectorXd, kNumModalities> spike;
  std::array<Eigen::VectorXd, kNumModalities> gaussian;
};

/// Per-modality latent variables of every sample (row i belongs to sample i).
struct Provenance {
  std::array<Eigen::MatrixXd, kNumModalities> z;         ///< n x K
  std::array<Eigen::MatrixXd, kNumModalities> spike;     ///< n x K
  std::array<Eigen::MatrixXd, kNumModalities> gaussian;  ///< n x d_r
};

/// Row-major view of n samples: x[r] is n x d_r.
struct Dataset {
  DataConfig config;
  std::array<Eigen::MatrixXd, kNumModalities> x;
  std::vector<int> y;
  std::array<std::vector<std::uint8_t>, kNumModalities> sufficient;
  std::optional<Provenance> provenance;
  std::optional<std::array<Dictionary, kNumModalities>> dictionaries;

  std::size_t size() const { return y.size(); }
  /// Number of samples whose two modalities are both sufficient.
  std::size_t n_s() const;
  /// Number of samples with at least one insufficient modality.
  std::size_t n_i() const { return size() - n_s(); }
  bool both_sufficient(std::size_t i) const {
    return sufficient[0][i] != 0 && sufficient[1][i] != 0;
  }

  Sample sample(std::size_t i) const;
};

/// Generative model: the configuration plus its two fixed dictionaries.
struct DataModel {
  DataConfig config;
  std::array<Dictionary, kNumModalities> dictionaries;
};

/// Orthonormalizes K i.i.d. standard Gaussian vectors in R^d.
/// Throws ConfigError when d < K.
Dictionary build_dictionary(int d, int K, Rng& rng);

SparseCode sample_sparse_code(int y, const ModalityConfig& mc, int K, double s, Rng& rng);

/// Coordinate-wise U[0, alpha] with coordinate y forced to zero.
Eigen::VectorXd sample_spike_noise(int y, int K, double alpha, Rng& rng);

/// Builds both modality vectors from codes sharing one label.
/// Throws std::logic_error on a label mismatch.
Sample assemble_sample(const std::array<Dictionary, kNumModalities>& dicts,
                       const std::array<SparseCode, kNumModalities>& codes,
                       const DataConfig& cfg, Rng& rng);

/// Draws the two dictionaries for cfg (modality 0 first) from rng.
DataModel make_data_model(const DataConfig& cfg, Rng& rng);

/// n i.i.d. samples with uniform labels. Provenance and dictionaries are kept.
Dataset sample_dataset(const DataModel& model, std::size_t n, Rng& rng);

/// Convenience overload: builds a fresh DataModel from rng first.
Dataset sample_dataset(const DataConfig& cfg, std::size_t n, Rng& rng);

}  // namespace modcomp
