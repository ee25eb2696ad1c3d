#include "modcomp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json_convert.hpp"
#include "modcomp/errors.hpp"

namespace modcomp {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_class(int j, int K) {
  if (j < 0 || j >= K) throw std::out_of_range("class index outside [0, K)");
}

void check_modality(int r) {
  if (r < 0 || r >= kNumModalities) throw std::out_of_range("modality index must be 0 or 1");
}

template <class Reduce>
double reduce_alignment(const Eigen::MatrixXd& weights, int m, const Dictionary& dict, int j,
                        Reduce reduce) {
  if (weights.cols() != dict.columns.rows()) {
    throw ShapeError("diagnostics: weight and dictionary dimensions differ");
  }
  double acc = 0.0;
  for (int l = 0; l < m; ++l) {
    const double inner = weights.row(j * m + l).dot(dict.columns.col(j));
    acc = reduce(acc, std::max(inner, 0.0));
  }
  return acc;
}

double max_fn(double a, double b) { return std::max(a, b); }
double sum_fn(double a, double b) { return a + b; }

}  // namespace

double gamma_stat(const Weights& W, const Dictionaries& dicts, int j, int r) {
  check_class(j, W.K);
  check_modality(r);
  return reduce_alignment(W.w[r], W.m, dicts[r], j, max_fn);
}

double phi_stat(const Weights& W, const Dictionaries& dicts, int j, int r) {
  check_class(j, W.K);
  check_modality(r);
  return reduce_alignment(W.w[r], W.m, dicts[r], j, sum_fn);
}

double gamma_stat(const UniWeights& V, const Dictionary& dict, int j) {
  check_class(j, V.K);
  return reduce_alignment(V.v, V.m, dict, j, max_fn);
}

double phi_stat(const UniWeights& V, const Dictionary& dict, int j) {
  check_class(j, V.K);
  return reduce_alignment(V.v, V.m, dict, j, sum_fn);
}

CompetitionSnapshot take_snapshot(const Weights& W, const Dictionaries& dicts, std::size_t t) {
  CompetitionSnapshot snap{t, Eigen::MatrixXd(W.K, kNumModalities),
                           Eigen::MatrixXd(W.K, kNumModalities)};
  for (int r = 0; r < kNumModalities; ++r) {
    // <M_j, w_{j,l}> for every neuron at once.
    const Eigen::MatrixXd inner = W.w[r] * dicts[r].columns;
    for (int j = 0; j < W.K; ++j) {
      double best = 0.0;
      double total = 0.0;
      for (int l = 0; l < W.m; ++l) {
        const double v = std::max(inner(j * W.m + l, j), 0.0);
        best = std::max(best, v);
        total += v;
      }
      snap.gamma(j, r) = best;
      snap.phi(j, r) = total;
    }
  }
  return snap;
}

double d_stat(const Dataset& data, const Dictionaries& dicts, int j, int r, const ActParams& p) {
  check_class(j, data.config.K);
  check_modality(r);
  p.validate();
  const bool noiseless = data.config.sigma_g == 0.0 && data.config.alpha == 0.0;
  if (!data.provenance && !noiseless) {
    throw DiagnosticUnavailable(
        "d_stat: dataset has no stored sparse codes and is noisy; projection would be inexact");
  }
  if (data.size() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.y[i] != j || !data.both_sufficient(i)) continue;
    const auto row = static_cast<Eigen::Index>(i);
    const double z = data.provenance ? data.provenance->z[r](row, j)
                                     : data.x[r].row(row).dot(dicts[r].columns.col(j));
    total += std::pow(z, p.q);
  }
  return total / (static_cast<double>(data.size()) * std::pow(p.beta, p.q - 1));
}

double winner_score(double gamma0, double d, int q) {
  return gamma0 * std::pow(d, 1.0 / static_cast<double>(q - 2));
}

std::optional<int> decide_winner(double score_0, double score_1, double margin) {
  if (!(margin > 1.0)) throw ConfigError("predict_winner: margin must exceed 1");
  if (score_0 > 0.0 && score_0 >= score_1 * margin) return 0;
  if (score_1 > 0.0 && score_1 >= score_0 * margin) return 1;
  return std::nullopt;
}

WinnerPrediction predict_winner(const Weights& W0, const Dataset& data, const Dictionaries& dicts,
                                const ActParams& p, double margin) {
  if (!(margin > 1.0)) throw ConfigError("predict_winner: margin must exceed 1");
  const int K = W0.K;
  WinnerPrediction out;
  out.margin = margin;
  out.gamma0 = take_snapshot(W0, dicts, 0).gamma;
  out.d.resize(K, kNumModalities);
  out.scores.resize(K, kNumModalities);
  out.winner.assign(K, std::nullopt);
  out.reason.assign(K, UndecidedReason::none);
  for (int j = 0; j < K; ++j) {
    for (int r = 0; r < kNumModalities; ++r) {
      out.d(j, r) = d_stat(data, dicts, j, r, p);
      out.scores(j, r) = winner_score(out.gamma0(j, r), out.d(j, r), p.q);
    }
    if (out.d(j, 0) == 0.0 && out.d(j, 1) == 0.0) {
      out.reason[j] = UndecidedReason::no_signal;
      continue;
    }
    out.winner[j] = decide_winner(out.scores(j, 0), out.scores(j, 1), margin);
    if (!out.winner[j]) {
      out.reason[j] = (out.scores(j, 0) == 0.0 && out.scores(j, 1) == 0.0)
                          ? UndecidedReason::no_signal
                          : UndecidedReason::margin_not_met;
    }
  }
  return out;
}

std::vector<ObservedWinner> observed_winner(const std::vector<CompetitionSnapshot>& trajectory,
                                            double threshold, double stuck_ceiling) {
  if (trajectory.empty()) throw std::invalid_argument("observed_winner: empty trajectory");
  if (!(stuck_ceiling > 0.0 && threshold > stuck_ceiling)) {
    throw ConfigError("observed_winner: require threshold > stuck_ceiling > 0");
  }
  const auto K = trajectory.front().gamma.rows();
  std::vector<ObservedWinner> out(static_cast<std::size_t>(K));
  for (Eigen::Index j = 0; j < K; ++j) {
    auto& res = out[static_cast<std::size_t>(j)];
    res.trailing_gamma = kNaN;
    for (const auto& snap : trajectory) {
      const bool cross0 = snap.gamma(j, 0) >= threshold;
      const bool cross1 = snap.gamma(j, 1) >= threshold;
      if (!cross0 && !cross1) continue;
      res.crossing_t = snap.t;
      if (cross0 && cross1) break;
      const int lead = cross0 ? 0 : 1;
      res.first_crosser = lead;
      res.trailing_gamma = snap.gamma(j, 1 - lead);
      if (res.trailing_gamma <= stuck_ceiling) res.winner = lead;
      break;
    }
  }
  return out;
}

void summarize(CompetitionReport& report) {
  const std::size_t K = report.observed.size();
  std::size_t agree = 0;
  std::size_t both = 0;
  std::array<std::size_t, kNumModalities> losses{0, 0};
  std::size_t decided = 0;
  for (std::size_t j = 0; j < K; ++j) {
    const auto& obs = report.observed[j].winner;
    if (!obs) continue;
    ++decided;
    ++losses[static_cast<std::size_t>(1 - *obs)];
    if (j < report.predicted.size() && report.predicted[j]) {
      ++both;
      if (*report.predicted[j] == *obs) ++agree;
    }
  }
  report.match_rate = both ? static_cast<double>(agree) / static_cast<double>(both) : kNaN;
  for (int r = 0; r < kNumModalities; ++r) {
    report.p_hat[r] = decided ? static_cast<double>(losses[r]) / static_cast<double>(decided) : kNaN;
  }
  report.undecided_fraction =
      K ? static_cast<double>(K - decided) / static_cast<double>(K) : kNaN;
}

PEstimate estimate_p(const std::vector<CompetitionReport>& runs) {
  if (runs.empty()) throw std::invalid_argument("estimate_p: need at least one run");
  const std::size_t K = runs.front().observed.size();
  PEstimate est;
  std::array<double, kNumModalities> acc{0.0, 0.0};
  std::size_t classes_with_data = 0;
  for (std::size_t j = 0; j < K; ++j) {
    std::array<std::size_t, kNumModalities> losses{0, 0};
    std::size_t decided = 0;
    for (const auto& run : runs) {
      if (run.observed.size() != K) throw ShapeError("estimate_p: runs disagree on K");
      ++est.total;
      const auto& w = run.observed[j].winner;
      if (!w) continue;
      ++decided;
      ++losses[static_cast<std::size_t>(1 - *w)];
    }
    est.decided += decided;
    if (decided == 0) continue;
    ++classes_with_data;
    for (int r = 0; r < kNumModalities; ++r) {
      acc[r] += static_cast<double>(losses[r]) / static_cast<double>(decided);
    }
  }
  for (int r = 0; r < kNumModalities; ++r) {
    est.p_hat[r] = classes_with_data ? acc[r] / static_cast<double>(classes_with_data) : kNaN;
  }
  est.undecided_fraction =
      est.total ? 1.0 - static_cast<double>(est.decided) / static_cast<double>(est.total) : kNaN;
  return est;
}

namespace json_convert {

json report_json(const CompetitionReport& report) {
  json classes = json::array();
  for (std::size_t j = 0; j < report.observed.size(); ++j) {
    const auto& obs = report.observed[j];
    json c;
    c["class"] = j;
    c["predicted"] = j < report.predicted.size() ? modality(report.predicted[j]) : json(nullptr);
    c["observed"] = modality(obs.winner);
    c["first_crosser"] = modality(obs.first_crosser);
    c["crossing_t"] = obs.crossing_t ? json(*obs.crossing_t) : json(nullptr);
    c["trailing_gamma"] = number(obs.trailing_gamma);
    if (report.scores.rows() > static_cast<Eigen::Index>(j)) {
      const auto row = static_cast<Eigen::Index>(j);
      c["scores"] = json::array({number(report.scores(row, 0)), number(report.scores(row, 1))});
    }
    classes.push_back(std::move(c));
  }
  json out;
  out["classes"] = std::move(classes);
  out["margin"] = report.margin;
  out["threshold"] = report.threshold;
  out["stuck_ceiling"] = report.stuck_ceiling;
  out["match_rate"] = number(report.match_rate);
  out["probe_error"] = json::array({number(report.probe_error[0]), number(report.probe_error[1])});
  out["p_hat"] = json::array({number(report.p_hat[0]), number(report.p_hat[1])});
  out["undecided_fraction"] = number(report.undecided_fraction);
  return out;
}

CompetitionReport report_from(const json& j) {
  CompetitionReport r;
  const auto& classes = j.at("classes");
  r.scores.resize(static_cast<Eigen::Index>(classes.size()), kNumModalities);
  for (const auto& c : classes) {
    const auto row = static_cast<Eigen::Index>(r.observed.size());
    r.predicted.push_back(modality_from(c.at("predicted")));
    ObservedWinner obs;
    obs.winner = modality_from(c.at("observed"));
    obs.first_crosser = modality_from(c.at("first_crosser"));
    if (!c.at("crossing_t").is_null()) obs.crossing_t = c.at("crossing_t").get<std::size_t>();
    obs.trailing_gamma = number_or_nan(c.at("trailing_gamma"));
    r.observed.push_back(obs);
    if (c.contains("scores")) {
      r.scores(row, 0) = number_or_nan(c["scores"][0]);
      r.scores(row, 1) = number_or_nan(c["scores"][1]);
    } else {
      r.scores.row(row).setConstant(kNaN);
    }
  }
  r.margin = j.at("margin").get<double>();
  r.threshold = j.at("threshold").get<double>();
  r.stuck_ceiling = j.at("stuck_ceiling").get<double>();
  r.match_rate = number_or_nan(j.at("match_rate"));
  for (int m = 0; m < kNumModalities; ++m) {
    r.probe_error[m] = number_or_nan(j.at("probe_error")[m]);
    r.p_hat[m] = number_or_nan(j.at("p_hat")[m]);
  }
  r.undecided_fraction = number_or_nan(j.at("undecided_fraction"));
  return r;
}

}  // namespace json_convert

std::string to_json(const CompetitionReport& report) {
  return json_convert::report_json(report).dump(2);
}

CompetitionReport competition_report_from_json(std::string_view text) {
  try {
    return json_convert::report_from(json_convert::json::parse(text));
  } catch (const json_convert::json::exception& e) {
    throw FormatError(std::string("competition report: ") + e.what());
  }
}

}  // namespace modcomp
