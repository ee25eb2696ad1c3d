#pragma once

// Experiment orchestration: per-seed data, the three training arms, metric
// CSVs, competition reports and the sweep-level gap report.
//
// Layout under <output_dir>/<name>/<seed>/:
//   <name>_<arm>_<seed>.csv    metric stream
//   <name>_<arm>_<seed>.json   final summary (joint: includes the competition report)

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "modcomp/diagnostics.hpp"
#include "modcomp/experiment_spec.hpp"
#include "modcomp/network.hpp"
#include "modcomp/synth_data.hpp"
#include "modcomp/trainer.hpp"

namespace modcomp {

/// Data shared by every arm of one seed.
struct RunContext {
  ExperimentSpec spec;
  std::uint64_t seed = 0;
  DataModel model;
  Dataset train;
  Dataset test;  ///< fresh_test_n held-out draws from the same model
};

/// Data streams are keyed by the run seed (or data.seed with fix_data);
/// initialization streams by (seed, arm).
RunContext make_run_context(const ExperimentSpec& spec, std::uint64_t seed);

struct ArmResult {
  Arm arm = Arm::joint;
  std::uint64_t seed = 0;
  std::vector<MetricRecord> records;
  double train_error = 0.0;
  double train_loss = 0.0;
  double test_error = 0.0;
  double test_se = 0.0;
  std::array<double, kNumModalities> probe_error{};  ///< NaN for uni arms
  std::optional<CompetitionReport> competition;      ///< joint arm only
  std::vector<CompetitionSnapshot> trajectory;       ///< joint arm only, every iteration
};

ArmResult run_unimodal(const RunContext& ctx, int r);
ArmResult run_joint(const RunContext& ctx);
ArmResult run_arm(const RunContext& ctx, Arm arm);

/// CSV text for a metric stream; byte-identical for identical inputs.
std::string metrics_csv(const std::vector<MetricRecord>& records, Arm arm, int K);

std::filesystem::path run_dir(const ExperimentSpec& spec, std::uint64_t seed);
std::filesystem::path arm_stem(const ExperimentSpec& spec, Arm arm, std::uint64_t seed);

/// Writes the CSV and JSON summary of one arm; returns the CSV path.
std::filesystem::path write_arm_outputs(const ExperimentSpec& spec, const ArmResult& result);

/// Final numbers of one arm as stored in its JSON summary.
struct ArmSummary {
  Arm arm = Arm::joint;
  std::uint64_t seed = 0;
  double train_error = 0.0;
  double train_loss = 0.0;
  double test_error = 0.0;
  double test_se = 0.0;
  std::array<double, kNumModalities> probe_error{};
  std::optional<CompetitionReport> competition;
};

ArmSummary summarize(const ArmResult& result);
std::string to_json(const ArmSummary& summary);
ArmSummary arm_summary_from_json(std::string_view text);

struct SeedResult {
  std::uint64_t seed = 0;
  std::array<ArmSummary, kNumModalities> uni;
  ArmSummary joint;
};

struct GapChecks {
  // Uni-modal arms: zero training error and test error near mu.
  bool uni_train_zero = false;
  std::array<bool, kNumModalities> uni_test_in_band{false, false};
  // Joint arm.
  bool joint_train_zero = false;
  std::size_t probe_flag_seeds = 0;
  bool probe_flag_majority = false;
  double trailing_rate = 0.0;
  std::size_t races = 0;
  bool trailing_ok = false;
  double match_rate = 0.0;
  std::size_t matched_pairs = 0;
  bool match_ok = false;
  bool p_ok = false;
  bool joint_ge_best_uni = false;
  bool joint_in_band = false;

  bool all() const;
};

struct GapReport {
  std::string name;
  std::vector<SeedResult> per_seed;
  std::array<double, kNumModalities> e_uni{};
  std::array<double, kNumModalities> e_uni_se{};
  double e_joint = 0.0;
  double e_joint_se = 0.0;
  std::array<double, kNumModalities> probe{};
  std::array<double, kNumModalities> mu{};
  /// Standard error of the per-seed difference e_joint - e_uni(best arm).
  double gap_se = 0.0;
  PEstimate p;
  /// Win frequencies used for the joint-error band; win_rate[r] = p_hat[1 - r].
  std::array<double, kNumModalities> win_rate{};
  std::array<double, 2> band{};  ///< [sum (w_r - delta) mu_r, sum (w_r + delta) mu_r]
  GapChecks checks;
  std::string spec_echo;
};

/// Pure aggregation; `report` re-aggregation calls this on stored summaries.
GapReport make_gap_report(const ExperimentSpec& spec, std::vector<SeedResult> seeds);

/// Runs every seed of the spec (all three arms), writes per-run outputs and
/// gap_report.json. Throws ConfigError unless all arms and enough seeds are requested.
/// `on_seed` is called after each seed finishes.
using SeedCallback = std::function<void(const SeedResult&)>;
GapReport run_sweep(const ExperimentSpec& spec, const SeedCallback& on_seed = {});

/// Rebuilds the gap report from the JSON summaries already on disk.
GapReport reaggregate(const ExperimentSpec& spec);

std::string to_json(const GapReport& report);
std::filesystem::path gap_report_path(const ExperimentSpec& spec);

}  // namespace modcomp
