#include "modcomp/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "modcomp/errors.hpp"
#include "modcomp/text_io.hpp"

namespace modcomp {
namespace {

constexpr char kMagic[5] = "MCDS";

void put_vector(std::ostream& os, const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) binary::put_f64(os, v(i));
}

void get_row(std::istream& is, Eigen::MatrixXd& m, Eigen::Index row) {
  for (Eigen::Index k = 0; k < m.cols(); ++k) m(row, k) = binary::get_f64(is);
}

}  // namespace

void write_dataset(const std::filesystem::path& path, const Dataset& data, bool debug) {
  if (debug && (!data.provenance || !data.dictionaries)) {
    throw std::invalid_argument("write_dataset: debug mode needs stored codes and dictionaries");
  }
  const auto& cfg = data.config;
  std::ostringstream os(std::ios::binary);
  binary::put_magic(os, kMagic);
  binary::put<std::uint32_t>(os, kDatasetFormatVersion);
  binary::put<std::uint8_t>(os, debug ? kWithProvenance : 0);
  binary::put<std::uint32_t>(os, static_cast<std::uint32_t>(cfg.K));
  binary::put_f64(os, cfg.s);
  binary::put_f64(os, cfg.alpha);
  binary::put_f64(os, cfg.sigma_g);
  binary::put<std::uint64_t>(os, cfg.seed);
  for (const auto& mc : cfg.modalities) {
    binary::put<std::uint32_t>(os, static_cast<std::uint32_t>(mc.d));
    binary::put_f64(os, mc.gamma);
    binary::put_f64(os, mc.rho);
    binary::put_f64(os, mc.mu);
    binary::put_f64(os, mc.C_big);
    binary::put_f64(os, mc.c_small);
  }
  binary::put<std::uint64_t>(os, data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    binary::put<std::uint32_t>(os, static_cast<std::uint32_t>(data.y[i]));
    binary::put<std::uint8_t>(os, data.sufficient[0][i]);
    binary::put<std::uint8_t>(os, data.sufficient[1][i]);
    put_vector(os, data.x[0].row(row));
    put_vector(os, data.x[1].row(row));
  }
  if (debug) {
    for (const auto& dict : *data.dictionaries) {
      for (Eigen::Index k = 0; k < dict.columns.cols(); ++k) {
        for (Eigen::Index i = 0; i < dict.columns.rows(); ++i) binary::put_f64(os, dict.columns(i, k));
      }
    }
    const auto& prov = *data.provenance;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      for (int r = 0; r < kNumModalities; ++r) {
        put_vector(os, prov.z[r].row(row));
        put_vector(os, prov.spike[r].row(row));
        put_vector(os, prov.gaussian[r].row(row));
      }
    }
  }
  write_file_atomic(path, os.str());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  binary::expect_magic(is, kMagic);
  const auto version = binary::get<std::uint32_t>(is);
  if (version != kDatasetFormatVersion) {
    throw FormatError("dataset: unsupported format version " + std::to_string(version));
  }
  const auto flags = binary::get<std::uint8_t>(is);
  Dataset ds;
  auto& cfg = ds.config;
  cfg.K = static_cast<int>(binary::get<std::uint32_t>(is));
  cfg.s = binary::get_f64(is);
  cfg.alpha = binary::get_f64(is);
  cfg.sigma_g = binary::get_f64(is);
  cfg.seed = binary::get<std::uint64_t>(is);
  for (auto& mc : cfg.modalities) {
    mc.d = static_cast<int>(binary::get<std::uint32_t>(is));
    mc.gamma = binary::get_f64(is);
    mc.rho = binary::get_f64(is);
    mc.mu = binary::get_f64(is);
    mc.C_big = binary::get_f64(is);
    mc.c_small = binary::get_f64(is);
  }
  const auto n = binary::get<std::uint64_t>(is);
  const auto rows = static_cast<Eigen::Index>(n);
  ds.y.resize(n);
  for (int r = 0; r < kNumModalities; ++r) {
    ds.x[r].resize(rows, cfg.modalities[r].d);
    ds.sufficient[r].resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const auto y = binary::get<std::uint32_t>(is);
    if (y >= static_cast<std::uint32_t>(cfg.K)) throw FormatError("dataset: label out of range");
    ds.y[i] = static_cast<int>(y);
    ds.sufficient[0][i] = binary::get<std::uint8_t>(is);
    ds.sufficient[1][i] = binary::get<std::uint8_t>(is);
    get_row(is, ds.x[0], row);
    get_row(is, ds.x[1], row);
  }
  if (flags & kWithProvenance) {
    std::array<Dictionary, kNumModalities> dicts;
    for (int r = 0; r < kNumModalities; ++r) {
      dicts[r].columns.resize(cfg.modalities[r].d, cfg.K);
      for (Eigen::Index k = 0; k < cfg.K; ++k) {
        for (Eigen::Index i = 0; i < cfg.modalities[r].d; ++i) {
          dicts[r].columns(i, k) = binary::get_f64(is);
        }
      }
    }
    Provenance prov;
    for (int r = 0; r < kNumModalities; ++r) {
      prov.z[r].resize(rows, cfg.K);
      prov.spike[r].resize(rows, cfg.K);
      prov.gaussian[r].resize(rows, cfg.modalities[r].d);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      for (int r = 0; r < kNumModalities; ++r) {
        get_row(is, prov.z[r], row);
        get_row(is, prov.spike[r], row);
        get_row(is, prov.gaussian[r], row);
      }
    }
    ds.dictionaries = std::move(dicts);
    ds.provenance = std::move(prov);
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("dataset: trailing bytes");
  return ds;
}

void export_csv(const std::filesystem::path& path, const Dataset& data) {
  std::string out = "y,suff1,suff2";
  for (int r = 0; r < kNumModalities; ++r) {
    for (Eigen::Index k = 0; k < data.x[r].cols(); ++k) {
      out += ",x" + std::to_string(r + 1) + "_" + std::to_string(k);
    }
  }
  out += '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    out += std::to_string(data.y[i]);
    out += ',' + std::to_string(int{data.sufficient[0][i]});
    out += ',' + std::to_string(int{data.sufficient[1][i]});
    for (int r = 0; r < kNumModalities; ++r) {
      for (Eigen::Index k = 0; k < data.x[r].cols(); ++k) {
        out += ',';
        out += format_double(data.x[r](row, k));
      }
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace modcomp
