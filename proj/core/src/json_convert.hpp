#pragma once

// nlohmann::json conversions for report types. Internal to the core library.

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "modcomp/diagnostics.hpp"

namespace modcomp::json_convert {

using nlohmann::json;

/// NaN and infinities are not representable in JSON; they map to null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

/// 0-based modality to its 1-based file label; empty maps to null.
inline json modality(const std::optional<int>& r) { return r ? json(*r + 1) : json(nullptr); }

inline std::optional<int> modality_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<int>() - 1;
}

inline json matrix(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(number(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from(const json& j) {
  if (j.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    for (std::size_t k = 0; k < j[i].size(); ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = number_or_nan(j[i][k]);
    }
  }
  return m;
}

json report_json(const CompetitionReport& report);
CompetitionReport report_from(const json& j);

}  // namespace modcomp::json_convert
