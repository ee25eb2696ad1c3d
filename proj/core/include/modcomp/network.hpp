#pragma once

// Late-fusion and uni-modal smoothed-ReLU networks with a fixed all-ones head.
//
// Neuron l of class j sits in row j*m + l of a modality's weight matrix, so
// logit j is the sum of the m activations in rows [j*m, (j+1)*m).

#include <array>
#include <cstdint>
#include <filesystem>

#include <Eigen/Dense>

#include "modcomp/activation.hpp"
#include "modcomp/rng.hpp"
#include "modcomp/synth_data.hpp"

namespace modcomp {

struct Weights {
  int K = 0;
  int m = 0;
  std::array<Eigen::MatrixXd, kNumModalities> w;  ///< (K*m) x d_r

  auto neuron(int j, int l, int r) const { return w[r].row(j * m + l); }
  auto neuron(int j, int l, int r) { return w[r].row(j * m + l); }
  int dim(int r) const { return static_cast<int>(w[r].cols()); }

  bool operator==(const Weights& o) const {
    return K == o.K && m == o.m && w[0] == o.w[0] && w[1] == o.w[1];
  }
};

struct UniWeights {
  int K = 0;
  int m = 0;
  Eigen::MatrixXd v;  ///< (K*m) x d

  auto neuron(int j, int l) const { return v.row(j * m + l); }
  auto neuron(int j, int l) { return v.row(j * m + l); }
  int dim() const { return static_cast<int>(v.cols()); }

  bool operator==(const UniWeights& o) const { return K == o.K && m == o.m && v == o.v; }
};

/// Every entry i.i.d. N(0, sigma0^2); sigma0 == 0 yields zeros.
/// Modality 0 is drawn before modality 1.
Weights init_weights(int K, int m, std::array<int, kNumModalities> dims, double sigma0, Rng& rng);
UniWeights init_uni_weights(int K, int m, int d, double sigma0, Rng& rng);

/// Encoder slice of modality r of a late-fusion network, as a uni-modal network.
UniWeights modality_slice(const Weights& W, int r);

Eigen::VectorXd forward_multi(const Weights& W, const Eigen::VectorXd& x1,
                              const Eigen::VectorXd& x2, const ActParams& p);
Eigen::VectorXd forward_uni(const UniWeights& V, const Eigen::VectorXd& x, const ActParams& p);
/// Logits of the fixed head applied to modality r's encoder alone; r in {0, 1}.
Eigen::VectorXd probe_forward(const Weights& W, int r, const Eigen::VectorXd& x,
                              const ActParams& p);

// Batched forms: rows of X are samples, result is n x K.
Eigen::MatrixXd encoder_logits(const Eigen::MatrixXd& weights, int K, int m,
                               const Eigen::MatrixXd& X, const ActParams& p);
Eigen::MatrixXd forward_multi_batch(const Weights& W, const Eigen::MatrixXd& X1,
                                    const Eigen::MatrixXd& X2, const ActParams& p);
Eigen::MatrixXd forward_uni_batch(const UniWeights& V, const Eigen::MatrixXd& X,
                                  const ActParams& p);
Eigen::MatrixXd probe_forward_batch(const Weights& W, int r, const Eigen::MatrixXd& X,
                                    const ActParams& p);

/// Metadata stored alongside serialized weights.
struct WeightsHeader {
  int K = 0;
  int m = 0;
  std::array<int, kNumModalities> dims{0, 0};
  int q = 3;
  double beta = 0.0;
  double sigma0 = 0.0;
  std::uint64_t iteration = 0;
  /// 0 for a late-fusion network, r + 1 for a uni-modal network on modality r.
  std::uint8_t kind = 0;
};

void save_weights(const std::filesystem::path& path, const Weights& W, const ActParams& p,
                  double sigma0, std::uint64_t iteration);
void save_weights(const std::filesystem::path& path, const UniWeights& V, int modality,
                  const ActParams& p, double sigma0, std::uint64_t iteration);
WeightsHeader read_weights_header(const std::filesystem::path& path);
Weights load_weights(const std::filesystem::path& path, WeightsHeader* header = nullptr);
UniWeights load_uni_weights(const std::filesystem::path& path, WeightsHeader* header = nullptr);

}  // namespace modcomp
