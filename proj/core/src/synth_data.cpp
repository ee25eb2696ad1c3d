#include "modcomp/synth_data.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "modcomp/errors.hpp"

namespace modcomp {
namespace {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool bernoulli(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

}  // namespace

void ModalityConfig::validate(int K) const {
  if (!(gamma > 0.0 && gamma < rho && rho < 1.0)) {
    throw ConfigError("modality: require 0 < gamma < rho < 1");
  }
  if (!(mu >= 0.0 && mu < 1.0)) throw ConfigError("modality: require 0 <= mu < 1");
  if (!(C_big >= 1.0)) throw ConfigError("modality: require C_big >= 1");
  if (!(c_small > 0.0 && c_small < 0.5)) {
    throw ConfigError("modality: require 0 < c_small < 0.5");
  }
  if (d < K) {
    throw ConfigError("modality: dimension " + std::to_string(d) + " is smaller than K=" +
                      std::to_string(K));
  }
}

void DataConfig::validate() const {
  if (K < 2) throw ConfigError("data: K must be at least 2");
  if (!(s >= 1.0 && s < K)) throw ConfigError("data: require 1 <= s < K");
  if (!(alpha >= 0.0)) throw ConfigError("data: alpha must be non-negative");
  if (!(sigma_g >= 0.0)) throw ConfigError("data: sigma_g must be non-negative");
  for (const auto& mc : modalities) mc.validate(K);
}

std::size_t Dataset::n_s() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < size(); ++i) count += both_sufficient(i) ? 1 : 0;
  return count;
}

Sample Dataset::sample(std::size_t i) const {
  Sample out;
  out.y = y.at(i);
  for (int r = 0; r < kNumModalities; ++r) {
    out.x[r] = x[r].row(static_cast<Eigen::Index>(i)).transpose();
    out.sufficient[r] = sufficient[r][i] != 0;
    if (provenance) {
      const auto row = static_cast<Eigen::Index>(i);
      out.z[r] = provenance->z[r].row(row).transpose();
      out.spike[r] = provenance->spike[r].row(row).transpose();
      out.gaussian[r] = provenance->gaussian[r].row(row).transpose();
    }
  }
  return out;
}

Dictionary build_dictionary(int d, int K, Rng& rng) {
  if (K < 1) throw ConfigError("dictionary: K must be positive");
  if (d < K) {
    throw ConfigError("dictionary: need d >= K (d=" + std::to_string(d) +
                      ", K=" + std::to_string(K) + ")");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd q(d, K);
  // Modified Gram-Schmidt with re-orthogonalization; a column that collapses
  // numerically is simply redrawn.
  for (int j = 0; j < K; ++j) {
    for (;;) {
      Eigen::VectorXd v(d);
      for (int i = 0; i < d; ++i) v(i) = normal(rng);
      const double initial = v.norm();
      for (int pass = 0; pass < 2; ++pass) {
        for (int k = 0; k < j; ++k) v -= q.col(k).dot(v) * q.col(k);
      }
      const double norm = v.norm();
      if (norm > 1e-8 * initial) {
        q.col(j) = v / norm;
        break;
      }
    }
  }
  return Dictionary{std::move(q)};
}

SparseCode sample_sparse_code(int y, const ModalityConfig& mc, int K, double s, Rng& rng) {
  if (y < 0 || y >= K) throw std::out_of_range("sparse code: label outside [0, K)");
  SparseCode code;
  code.label = y;
  code.sufficient = !bernoulli(rng, mc.mu);
  code.z = Eigen::VectorXd::Zero(K);
  const double p_active = s / K;
  const double lo = code.sufficient ? 0.5 * mc.c_small : 0.5 * mc.rho;
  const double hi = code.sufficient ? mc.c_small : mc.rho;
  for (int j = 0; j < K; ++j) {
    if (j == y) {
      code.z(j) = code.sufficient ? uniform(rng, 1.0, mc.C_big)
                                  : uniform(rng, 0.5 * mc.gamma, 1.5 * mc.gamma);
    } else if (bernoulli(rng, p_active)) {
      code.z(j) = uniform(rng, lo, hi);
    }
  }
  return code;
}

Eigen::VectorXd sample_spike_noise(int y, int K, double alpha, Rng& rng) {
  if (alpha < 0.0) throw ConfigError("spike noise: alpha must be non-negative");
  Eigen::VectorXd a = Eigen::VectorXd::Zero(K);
  if (alpha == 0.0) return a;
  for (int j = 0; j < K; ++j) {
    const double v = uniform(rng, 0.0, alpha);
    if (j != y) a(j) = v;
  }
  return a;
}

Sample assemble_sample(const std::array<Dictionary, kNumModalities>& dicts,
                       const std::array<SparseCode, kNumModalities>& codes,
                       const DataConfig& cfg, Rng& rng) {
  if (codes[0].label != codes[1].label) {
    throw std::logic_error("assemble_sample: modality codes carry different labels");
  }
  Sample out;
  out.y = codes[0].label;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int r = 0; r < kNumModalities; ++r) {
    const auto& m = dicts[r].columns;
    out.z[r] = codes[r].z;
    out.sufficient[r] = codes[r].sufficient;
    out.spike[r] = sample_spike_noise(out.y, cfg.K, cfg.alpha, rng);
    out.gaussian[r] = Eigen::VectorXd::Zero(m.rows());
    if (cfg.sigma_g > 0.0) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) out.gaussian[r](i) = cfg.sigma_g * normal(rng);
    }
    out.x[r] = m * (out.z[r] + out.spike[r]) + out.gaussian[r];
  }
  return out;
}

DataModel make_data_model(const DataConfig& cfg, Rng& rng) {
  cfg.validate();
  DataModel model{cfg, {}};
  for (int r = 0; r < kNumModalities; ++r) {
    model.dictionaries[r] = build_dictionary(cfg.modalities[r].d, cfg.K, rng);
  }
  return model;
}

Dataset sample_dataset(const DataModel& model, std::size_t n, Rng& rng) {
  if (n == 0) throw ConfigError("sample_dataset: n must be at least 1");
  const auto& cfg = model.config;
  const int K = cfg.K;
  const auto rows = static_cast<Eigen::Index>(n);

  Dataset ds;
  ds.config = cfg;
  ds.y.resize(n);
  Provenance prov;
  for (int r = 0; r < kNumModalities; ++r) {
    const int d = cfg.modalities[r].d;
    ds.x[r].resize(rows, d);
    ds.sufficient[r].resize(n);
    prov.z[r].resize(rows, K);
    prov.spike[r].resize(rows, K);
    prov.gaussian[r].resize(rows, d);
  }

  std::uniform_int_distribution<int> label(0, K - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = label(rng);
    std::array<SparseCode, kNumModalities> codes;
    for (int r = 0; r < kNumModalities; ++r) {
      codes[r] = sample_sparse_code(y, cfg.modalities[r], K, cfg.s, rng);
    }
    Sample smp = assemble_sample(model.dictionaries, codes, cfg, rng);
    const auto row = static_cast<Eigen::Index>(i);
    ds.y[i] = y;
    for (int r = 0; r < kNumModalities; ++r) {
      ds.x[r].row(row) = smp.x[r].transpose();
      ds.sufficient[r][i] = smp.sufficient[r] ? 1 : 0;
      prov.z[r].row(row) = smp.z[r].transpose();
      prov.spike[r].row(row) = smp.spike[r].transpose();
      prov.gaussian[r].row(row) = smp.gaussian[r].transpose();
    }
  }
  ds.provenance = std::move(prov);
  ds.dictionaries = model.dictionaries;
  return ds;
}

Dataset sample_dataset(const DataConfig& cfg, std::size_t n, Rng& rng) {
  return sample_dataset(make_data_model(cfg, rng), n, rng);
}

}  // namespace modcomp
