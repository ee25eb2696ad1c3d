#pragma once

// Feature-learning diagnostics for modality competition.
//
//   gamma(j, r) = max_l [<M^r_j, w_{j,l,r}>]^+       per-class progress meter
//   phi(j, r)   = sum_l [<M^r_j, w_{j,l,r}>]^+
//   d(j, r)     = (1 / (n beta^(q-1))) sum_{both-sufficient, y = j} (z^r_j)^q
//
// A modality "wins" class j at initialization when
// gamma0(j, r) d(j, r)^(1/(q-2)) beats the other modality's score by `margin`.
// Modalities are 0-based in code; files and reports number them 1 and 2.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "modcomp/activation.hpp"
#include "modcomp/network.hpp"
#include "modcomp/synth_data.hpp"

namespace modcomp {

using Dictionaries = std::array<Dictionary, kNumModalities>;

struct CompetitionSnapshot {
  std::size_t t = 0;
  Eigen::MatrixXd gamma;  ///< K x 2
  Eigen::MatrixXd phi;    ///< K x 2
};

double gamma_stat(const Weights& W, const Dictionaries& dicts, int j, int r);
double phi_stat(const Weights& W, const Dictionaries& dicts, int j, int r);
/// Same statistics for a uni-modal network against its modality's dictionary.
double gamma_stat(const UniWeights& V, const Dictionary& dict, int j);
double phi_stat(const UniWeights& V, const Dictionary& dict, int j);

CompetitionSnapshot take_snapshot(const Weights& W, const Dictionaries& dicts, std::size_t t);

/// Uses stored sparse codes when the dataset has them; otherwise recovers
/// z^r_j = <M^r_j, x^r>, which is only exact without noise. Throws
/// DiagnosticUnavailable when neither route is valid.
double d_stat(const Dataset& data, const Dictionaries& dicts, int j, int r, const ActParams& p);

enum class UndecidedReason { none, margin_not_met, no_signal };

struct WinnerPrediction {
  std::vector<std::optional<int>> winner;  ///< per class; 0-based modality
  std::vector<UndecidedReason> reason;
  Eigen::MatrixXd gamma0;  ///< K x 2
  Eigen::MatrixXd d;       ///< K x 2
  Eigen::MatrixXd scores;  ///< K x 2, gamma0 * d^(1/(q-2))
  double margin = 1.05;
};

/// Decision rule for one class given both modalities' scores.
std::optional<int> decide_winner(double score_0, double score_1, double margin);

/// Property-1 score gamma0 * d^(1/(q-2)).
double winner_score(double gamma0, double d, int q);

WinnerPrediction predict_winner(const Weights& W0, const Dataset& data, const Dictionaries& dicts,
                                const ActParams& p, double margin);

struct ObservedWinner {
  /// Modality whose gamma crossed `threshold` first with the other still at or
  /// below `stuck_ceiling`.
  std::optional<int> winner;
  /// Modality that crossed first, regardless of where the other one was.
  /// Empty when both crossed in the same snapshot or neither crossed.
  std::optional<int> first_crosser;
  std::optional<std::size_t> crossing_t;
  /// gamma of the other modality at crossing_t (NaN when no unique crosser).
  double trailing_gamma = 0.0;
};

/// Requires threshold > stuck_ceiling > 0 and a non-empty trajectory.
std::vector<ObservedWinner> observed_winner(const std::vector<CompetitionSnapshot>& trajectory,
                                            double threshold, double stuck_ceiling);

struct CompetitionReport {
  std::vector<std::optional<int>> predicted;
  std::vector<ObservedWinner> observed;
  Eigen::MatrixXd scores;  ///< K x 2
  double margin = 1.05;
  double threshold = 0.0;
  double stuck_ceiling = 0.0;
  /// Agreement of predicted and observed winners over classes where both are
  /// decided; NaN when there are none.
  double match_rate = 0.0;
  std::array<double, kNumModalities> probe_error{0.0, 0.0};
  /// Losing frequency of each modality over this run's decided classes.
  std::array<double, kNumModalities> p_hat{0.0, 0.0};
  double undecided_fraction = 0.0;
};

/// Fills match_rate, p_hat and undecided_fraction from the winner vectors.
void summarize(CompetitionReport& report);

struct PEstimate {
  /// p_hat[r]: frequency with which modality r loses a decided (run, class)
  /// pair, first averaged per class then over classes, so p_hat sums to 1
  /// whenever any pair is decided.
  std::array<double, kNumModalities> p_hat{0.0, 0.0};
  double undecided_fraction = 0.0;
  std::size_t decided = 0;
  std::size_t total = 0;
};

/// Throws std::invalid_argument on an empty run list.
PEstimate estimate_p(const std::vector<CompetitionReport>& runs);

std::string to_json(const CompetitionReport& report);
CompetitionReport competition_report_from_json(std::string_view text);

}  // namespace modcomp
