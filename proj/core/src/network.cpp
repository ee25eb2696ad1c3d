#include "modcomp/network.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "batch_ops.hpp"
#include "binary_io.hpp"
#include "modcomp/errors.hpp"
#include "modcomp/text_io.hpp"

namespace modcomp {
namespace {

constexpr char kMagic[5] = "MCWT";
constexpr std::uint32_t kVersion = 1;

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double sigma0, Rng& rng) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  if (sigma0 == 0.0) return out;
  std::normal_distribution<double> normal(0.0, sigma0);
  // Fill neuron by neuron so a given seed gives the same neuron regardless of
  // the storage order.
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) out(i, k) = normal(rng);
  }
  return out;
}

void check_shape(const Eigen::MatrixXd& weights, int K, int m) {
  if (weights.rows() != static_cast<Eigen::Index>(K) * m) {
    throw ShapeError("weights: expected K*m rows");
  }
}

void write_block(std::ostream& os, const Eigen::MatrixXd& w) {
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index k = 0; k < w.cols(); ++k) binary::put_f64(os, w(i, k));
  }
}

Eigen::MatrixXd read_block(std::istream& is, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd w(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) w(i, k) = binary::get_f64(is);
  }
  return w;
}

void write_header(std::ostream& os, const WeightsHeader& h) {
  binary::put_magic(os, kMagic);
  binary::put<std::uint32_t>(os, kVersion);
  binary::put<std::uint8_t>(os, h.kind);
  binary::put<std::uint32_t>(os, static_cast<std::uint32_t>(h.K));
  binary::put<std::uint32_t>(os, static_cast<std::uint32_t>(h.m));
  binary::put<std::uint32_t>(os, static_cast<std::uint32_t>(h.dims[0]));
  binary::put<std::uint32_t>(os, static_cast<std::uint32_t>(h.dims[1]));
  binary::put<std::uint32_t>(os, static_cast<std::uint32_t>(h.q));
  binary::put_f64(os, h.beta);
  binary::put_f64(os, h.sigma0);
  binary::put<std::uint64_t>(os, h.iteration);
}

WeightsHeader read_header(std::istream& is) {
  binary::expect_magic(is, kMagic);
  const auto version = binary::get<std::uint32_t>(is);
  if (version != kVersion) throw FormatError("weights: unsupported version " + std::to_string(version));
  WeightsHeader h;
  h.kind = binary::get<std::uint8_t>(is);
  h.K = static_cast<int>(binary::get<std::uint32_t>(is));
  h.m = static_cast<int>(binary::get<std::uint32_t>(is));
  h.dims[0] = static_cast<int>(binary::get<std::uint32_t>(is));
  h.dims[1] = static_cast<int>(binary::get<std::uint32_t>(is));
  h.q = static_cast<int>(binary::get<std::uint32_t>(is));
  h.beta = binary::get_f64(is);
  h.sigma0 = binary::get_f64(is);
  h.iteration = binary::get<std::uint64_t>(is);
  if (h.kind > 2) throw FormatError("weights: unknown network kind");
  return h;
}

void expect_end(std::istream& in) {
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("weights: trailing bytes");
}

}  // namespace

Weights init_weights(int K, int m, std::array<int, kNumModalities> dims, double sigma0, Rng& rng) {
  if (K < 1 || m < 1) throw ConfigError("init_weights: K and m must be positive");
  if (sigma0 < 0.0) throw ConfigError("init_weights: sigma0 must be non-negative");
  Weights W{K, m, {}};
  for (int r = 0; r < kNumModalities; ++r) {
    W.w[r] = gaussian_matrix(static_cast<Eigen::Index>(K) * m, dims[r], sigma0, rng);
  }
  return W;
}

UniWeights init_uni_weights(int K, int m, int d, double sigma0, Rng& rng) {
  if (K < 1 || m < 1) throw ConfigError("init_uni_weights: K and m must be positive");
  if (sigma0 < 0.0) throw ConfigError("init_uni_weights: sigma0 must be non-negative");
  return UniWeights{K, m, gaussian_matrix(static_cast<Eigen::Index>(K) * m, d, sigma0, rng)};
}

UniWeights modality_slice(const Weights& W, int r) {
  if (r < 0 || r >= kNumModalities) throw std::invalid_argument("modality index must be 0 or 1");
  return UniWeights{W.K, W.m, W.w[r]};
}

Eigen::MatrixXd encoder_logits(const Eigen::MatrixXd& weights, int K, int m,
                               const Eigen::MatrixXd& X, const ActParams& p) {
  check_shape(weights, K, m);
  if (X.cols() != weights.cols()) throw ShapeError("forward: input dimension mismatch");
  Eigen::MatrixXd pre;
  pre.noalias() = X * weights.transpose();
  return batch::activate_and_pool(pre, K, m, p, false);
}

Eigen::MatrixXd forward_multi_batch(const Weights& W, const Eigen::MatrixXd& X1,
                                    const Eigen::MatrixXd& X2, const ActParams& p) {
  if (X1.rows() != X2.rows()) throw ShapeError("forward_multi: modality batch sizes differ");
  return encoder_logits(W.w[0], W.K, W.m, X1, p) + encoder_logits(W.w[1], W.K, W.m, X2, p);
}

Eigen::MatrixXd forward_uni_batch(const UniWeights& V, const Eigen::MatrixXd& X,
                                  const ActParams& p) {
  return encoder_logits(V.v, V.K, V.m, X, p);
}

Eigen::MatrixXd probe_forward_batch(const Weights& W, int r, const Eigen::MatrixXd& X,
                                    const ActParams& p) {
  if (r < 0 || r >= kNumModalities) throw std::invalid_argument("probe: modality must be 0 or 1");
  return encoder_logits(W.w[r], W.K, W.m, X, p);
}

Eigen::VectorXd forward_multi(const Weights& W, const Eigen::VectorXd& x1,
                              const Eigen::VectorXd& x2, const ActParams& p) {
  return forward_multi_batch(W, x1.transpose(), x2.transpose(), p).row(0).transpose();
}

Eigen::VectorXd forward_uni(const UniWeights& V, const Eigen::VectorXd& x, const ActParams& p) {
  return forward_uni_batch(V, x.transpose(), p).row(0).transpose();
}

Eigen::VectorXd probe_forward(const Weights& W, int r, const Eigen::VectorXd& x,
                              const ActParams& p) {
  return probe_forward_batch(W, r, x.transpose(), p).row(0).transpose();
}

void save_weights(const std::filesystem::path& path, const Weights& W, const ActParams& p,
                  double sigma0, std::uint64_t iteration) {
  WeightsHeader h{W.K, W.m, {W.dim(0), W.dim(1)}, p.q, p.beta, sigma0, iteration, 0};
  std::ostringstream os(std::ios::binary);
  write_header(os, h);
  for (int r = 0; r < kNumModalities; ++r) write_block(os, W.w[r]);
  write_file_atomic(path, os.str());
}

void save_weights(const std::filesystem::path& path, const UniWeights& V, int modality,
                  const ActParams& p, double sigma0, std::uint64_t iteration) {
  if (modality < 0 || modality >= kNumModalities) throw std::invalid_argument("bad modality");
  WeightsHeader h{V.K, V.m, {0, 0}, p.q, p.beta, sigma0, iteration,
                  static_cast<std::uint8_t>(modality + 1)};
  h.dims[modality] = V.dim();
  std::ostringstream os(std::ios::binary);
  write_header(os, h);
  write_block(os, V.v);
  write_file_atomic(path, os.str());
}

WeightsHeader read_weights_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_header(in);
}

Weights load_weights(const std::filesystem::path& path, WeightsHeader* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  const WeightsHeader h = read_header(in);
  if (h.kind != 0) throw FormatError("weights: file holds a uni-modal network");
  Weights W{h.K, h.m, {}};
  const auto rows = static_cast<Eigen::Index>(h.K) * h.m;
  for (int r = 0; r < kNumModalities; ++r) W.w[r] = read_block(in, rows, h.dims[r]);
  expect_end(in);
  if (header) *header = h;
  return W;
}

UniWeights load_uni_weights(const std::filesystem::path& path, WeightsHeader* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  const WeightsHeader h = read_header(in);
  if (h.kind == 0) throw FormatError("weights: file holds a late-fusion network");
  const auto rows = static_cast<Eigen::Index>(h.K) * h.m;
  UniWeights V{h.K, h.m, read_block(in, rows, h.dims[h.kind - 1])};
  expect_end(in);
  if (header) *header = h;
  return V;
}

}  // namespace modcomp
