#include "modcomp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "json_convert.hpp"
#include "modcomp/errors.hpp"
#include "modcomp/text_io.hpp"

namespace modcomp {
namespace {

using json_convert::json;
using json_convert::number;
using json_convert::number_or_nan;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string init_label(Arm arm) { return "init:" + std::string(arm_name(arm)); }

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? kNaN : s / static_cast<double>(v.size());
}

/// Sample standard error of the mean; NaN for fewer than two values.
double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return kNaN;
  const double mu = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double binomial_se(double e, std::size_t n) {
  return n ? std::sqrt(e * (1.0 - e) / static_cast<double>(n)) : kNaN;
}

}  // namespace

RunContext make_run_context(const ExperimentSpec& spec, std::uint64_t seed) {
  spec.validate();
  RunContext ctx;
  ctx.spec = spec;
  ctx.seed = seed;
  const std::uint64_t data_seed = spec.fix_data ? spec.data.seed : seed;
  DataConfig cfg = spec.data;
  cfg.seed = data_seed;
  Rng dict_rng = make_stream(data_seed, "dictionaries");
  ctx.model = make_data_model(cfg, dict_rng);
  Rng train_rng = make_stream(data_seed, "train-data");
  ctx.train = sample_dataset(ctx.model, spec.n, train_rng);
  Rng test_rng = make_stream(data_seed, "test-data");
  ctx.test = sample_dataset(ctx.model, spec.train.fresh_test_n, test_rng);
  return ctx;
}

ArmResult run_unimodal(const RunContext& ctx, int r) {
  if (r < 0 || r >= kNumModalities) throw std::invalid_argument("run_unimodal: bad modality");
  const auto& spec = ctx.spec;
  const Arm arm = r == 0 ? Arm::uni_1 : Arm::uni_2;
  const int K = spec.data.K;
  Rng init = make_stream(ctx.seed, init_label(arm));
  UniWeights V0 = init_uni_weights(K, spec.m, spec.data.modalities[r].d, spec.sigma0, init);
  const Dictionary& dict = ctx.model.dictionaries[r];

  auto hook = [&](MetricRecord& rec, const UniWeights& V) {
    rec.test_error = classification_error(forward_uni_batch(V, ctx.test.x[r], spec.act), ctx.test.y);
    rec.gamma = Eigen::MatrixXd::Constant(K, kNumModalities, kNaN);
    rec.phi = Eigen::MatrixXd::Constant(K, kNumModalities, kNaN);
    for (int j = 0; j < K; ++j) {
      rec.gamma(j, r) = gamma_stat(V, dict, j);
      rec.phi(j, r) = phi_stat(V, dict, j);
    }
  };
  auto trained = train(std::move(V0), ctx.train.x[r], ctx.train.y, spec.train, spec.act, hook);

  ArmResult res;
  res.arm = arm;
  res.seed = ctx.seed;
  res.records = std::move(trained.records);
  const auto& last = res.records.back();
  res.train_error = last.train_error;
  res.train_loss = last.train_loss;
  res.test_error = last.test_error;
  res.test_se = binomial_se(res.test_error, ctx.test.size());
  res.probe_error = {kNaN, kNaN};
  return res;
}

ArmResult run_joint(const RunContext& ctx) {
  const auto& spec = ctx.spec;
  const auto& dicts = ctx.model.dictionaries;
  Rng init = make_stream(ctx.seed, init_label(Arm::joint));
  Weights W0 = init_weights(spec.data.K, spec.m,
                            {spec.data.modalities[0].d, spec.data.modalities[1].d}, spec.sigma0,
                            init);
  const WinnerPrediction prediction =
      predict_winner(W0, ctx.train, dicts, spec.act, spec.thresholds.margin);

  ArmResult res;
  res.arm = Arm::joint;
  res.seed = ctx.seed;
  res.trajectory.reserve(spec.train.T + 1);

  auto hook = [&](MetricRecord& rec, const Weights& W) {
    const Eigen::MatrixXd l1 = probe_forward_batch(W, 0, ctx.test.x[0], spec.act);
    const Eigen::MatrixXd l2 = probe_forward_batch(W, 1, ctx.test.x[1], spec.act);
    rec.test_error = classification_error(l1 + l2, ctx.test.y);
    rec.probe_error_1 = classification_error(l1, ctx.test.y);
    rec.probe_error_2 = classification_error(l2, ctx.test.y);
    const auto& snap = res.trajectory.back();  // observer runs first
    rec.gamma = snap.gamma;
    rec.phi = snap.phi;
  };
  auto observer = [&](std::size_t t, const Weights& W) {
    res.trajectory.push_back(take_snapshot(W, dicts, t));
  };
  auto trained = train(std::move(W0), ctx.train, spec.train, spec.act, hook, observer);

  res.records = std::move(trained.records);
  const auto& last = res.records.back();
  res.train_error = last.train_error;
  res.train_loss = last.train_loss;
  res.test_error = last.test_error;
  res.test_se = binomial_se(res.test_error, ctx.test.size());
  res.probe_error = {last.probe_error_1, last.probe_error_2};

  CompetitionReport report;
  report.predicted = prediction.winner;
  report.scores = prediction.scores;
  report.margin = spec.thresholds.margin;
  report.threshold = spec.crossing_threshold();
  report.stuck_ceiling = spec.stuck_ceiling();
  report.observed = observed_winner(res.trajectory, report.threshold, report.stuck_ceiling);
  report.probe_error = res.probe_error;
  summarize(report);
  res.competition = std::move(report);
  return res;
}

ArmResult run_arm(const RunContext& ctx, Arm arm) {
  switch (arm) {
    case Arm::uni_1: return run_unimodal(ctx, 0);
    case Arm::uni_2: return run_unimodal(ctx, 1);
    case Arm::joint: return run_joint(ctx);
  }
  throw std::invalid_argument("run_arm: unknown arm");
}

std::string metrics_csv(const std::vector<MetricRecord>& records, Arm arm, int K) {
  auto field = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  std::string out = "t,arm,train_loss,train_error,test_error,probe_error_1,probe_error_2";
  for (int j = 0; j < K; ++j) {
    for (int r = 1; r <= kNumModalities; ++r) {
      out += ",gamma_" + std::to_string(j) + "_" + std::to_string(r);
    }
  }
  out += '\n';
  for (const auto& rec : records) {
    out += std::to_string(rec.t);
    out += ',';
    out += arm_name(arm);
    for (double v : {rec.train_loss, rec.train_error, rec.test_error, rec.probe_error_1,
                     rec.probe_error_2}) {
      out += ',' + field(v);
    }
    for (int j = 0; j < K; ++j) {
      for (int r = 0; r < kNumModalities; ++r) {
        const bool present = rec.gamma.rows() > j && rec.gamma.cols() > r;
        out += ',' + field(present ? rec.gamma(j, r) : kNaN);
      }
    }
    out += '\n';
  }
  return out;
}

std::filesystem::path run_dir(const ExperimentSpec& spec, std::uint64_t seed) {
  return spec.output_dir / spec.name / std::to_string(seed);
}

std::filesystem::path arm_stem(const ExperimentSpec& spec, Arm arm, std::uint64_t seed) {
  return run_dir(spec, seed) /
         (spec.name + "_" + std::string(arm_name(arm)) + "_" + std::to_string(seed));
}

ArmSummary summarize(const ArmResult& result) {
  return ArmSummary{result.arm,       result.seed,    result.train_error, result.train_loss,
                    result.test_error, result.test_se, result.probe_error, result.competition};
}

namespace {

/// "key = value" lines of a formatted spec as a flat JSON object of strings.
json config_json(const std::string& spec_echo) {
  json config = json::object();
  std::istringstream echo(spec_echo);
  for (std::string line; std::getline(echo, line);) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) config[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return config;
}

}  // namespace

std::string to_json(const ArmSummary& s) {
  json j;
  j["arm"] = arm_name(s.arm);
  j["seed"] = s.seed;
  j["train_error"] = number(s.train_error);
  j["train_loss"] = number(s.train_loss);
  j["test_error"] = number(s.test_error);
  j["test_se"] = number(s.test_se);
  j["probe_error"] = json::array({number(s.probe_error[0]), number(s.probe_error[1])});
  j["competition"] = s.competition ? json_convert::report_json(*s.competition) : json(nullptr);
  return j.dump(2);
}

ArmSummary arm_summary_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    ArmSummary s;
    s.arm = parse_arm(j.at("arm").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train_error = number_or_nan(j.at("train_error"));
    s.train_loss = number_or_nan(j.at("train_loss"));
    s.test_error = number_or_nan(j.at("test_error"));
    s.test_se = number_or_nan(j.at("test_se"));
    s.probe_error = {number_or_nan(j.at("probe_error")[0]), number_or_nan(j.at("probe_error")[1])};
    if (!j.at("competition").is_null()) s.competition = json_convert::report_from(j["competition"]);
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("arm summary: ") + e.what());
  }
}

std::filesystem::path write_arm_outputs(const ExperimentSpec& spec, const ArmResult& result) {
  const auto stem = arm_stem(spec, result.arm, result.seed);
  auto csv = stem;
  csv += ".csv";
  auto summary = stem;
  summary += ".json";
  write_file_atomic(csv, metrics_csv(result.records, result.arm, spec.data.K));
  json doc = json::parse(to_json(summarize(result)));
  doc["config"] = config_json(format_experiment_spec(spec));
  write_file_atomic(summary, doc.dump(2));
  return csv;
}

bool GapChecks::all() const {
  return uni_train_zero && uni_test_in_band[0] && uni_test_in_band[1] && joint_train_zero &&
         probe_flag_majority && trailing_ok && match_ok && p_ok && joint_ge_best_uni &&
         joint_in_band;
}

GapReport make_gap_report(const ExperimentSpec& spec, std::vector<SeedResult> seeds) {
  if (seeds.empty()) throw std::invalid_argument("gap report: no seeds");
  std::sort(seeds.begin(), seeds.end(),
            [](const SeedResult& a, const SeedResult& b) { return a.seed < b.seed; });
  const auto& th = spec.thresholds;
  GapReport rep;
  rep.name = spec.name;
  rep.spec_echo = format_experiment_spec(spec);
  for (int r = 0; r < kNumModalities; ++r) rep.mu[r] = spec.data.modalities[r].mu;

  std::array<std::vector<double>, kNumModalities> e_uni;
  std::array<std::vector<double>, kNumModalities> probe;
  std::vector<double> e_joint;
  std::vector<CompetitionReport> competitions;
  for (const auto& s : seeds) {
    for (int r = 0; r < kNumModalities; ++r) {
      e_uni[r].push_back(s.uni[r].test_error);
      probe[r].push_back(s.joint.probe_error[r]);
    }
    e_joint.push_back(s.joint.test_error);
    if (!s.joint.competition) throw FormatError("gap report: joint run without competition report");
    competitions.push_back(*s.joint.competition);
  }
  for (int r = 0; r < kNumModalities; ++r) {
    rep.e_uni[r] = mean(e_uni[r]);
    rep.e_uni_se[r] = seeds.size() > 1 ? standard_error(e_uni[r]) : seeds[0].uni[r].test_se;
    rep.probe[r] = mean(probe[r]);
  }
  rep.e_joint = mean(e_joint);
  rep.e_joint_se = seeds.size() > 1 ? standard_error(e_joint) : seeds[0].joint.test_se;

  const int best = rep.e_uni[0] <= rep.e_uni[1] ? 0 : 1;
  std::vector<double> diff;
  for (std::size_t i = 0; i < seeds.size(); ++i) diff.push_back(e_joint[i] - e_uni[best][i]);
  rep.gap_se = seeds.size() > 1
                   ? standard_error(diff)
                   : std::hypot(seeds[0].joint.test_se, seeds[0].uni[best].test_se);

  rep.p = estimate_p(competitions);
  for (int r = 0; r < kNumModalities; ++r) rep.win_rate[r] = rep.p.p_hat[1 - r];
  rep.band = {0.0, 0.0};
  for (int r = 0; r < kNumModalities; ++r) {
    rep.band[0] += (rep.win_rate[r] - th.band_slack) * rep.mu[r];
    rep.band[1] += (rep.win_rate[r] + th.band_slack) * rep.mu[r];
  }
  rep.per_seed = std::move(seeds);

  auto& c = rep.checks;
  c.uni_train_zero = true;
  c.joint_train_zero = true;
  std::size_t stuck = 0;
  std::size_t agree = 0;
  for (const auto& s : rep.per_seed) {
    for (int r = 0; r < kNumModalities; ++r) c.uni_train_zero &= s.uni[r].train_error == 0.0;
    c.joint_train_zero &= s.joint.train_error == 0.0;
    bool flagged = false;
    for (int r = 0; r < kNumModalities; ++r) {
      flagged |= s.joint.probe_error[r] >= th.probe_flag && s.uni[r].test_error <= th.uni_ok;
    }
    c.probe_flag_seeds += flagged ? 1 : 0;
    const auto& comp = *s.joint.competition;
    for (std::size_t j = 0; j < comp.observed.size(); ++j) {
      const auto& obs = comp.observed[j];
      if (obs.first_crosser) {
        ++c.races;
        if (obs.trailing_gamma <= comp.stuck_ceiling) ++stuck;
      }
      if (obs.winner && j < comp.predicted.size() && comp.predicted[j]) {
        ++c.matched_pairs;
        if (*obs.winner == *comp.predicted[j]) ++agree;
      }
    }
  }
  for (int r = 0; r < kNumModalities; ++r) {
    c.uni_test_in_band[r] = rep.e_uni[r] >= th.uni_band_lo * rep.mu[r] &&
                            rep.e_uni[r] <= th.uni_band_hi * rep.mu[r];
  }
  c.probe_flag_majority = 2 * c.probe_flag_seeds > rep.per_seed.size();
  c.trailing_rate = c.races ? static_cast<double>(stuck) / static_cast<double>(c.races) : kNaN;
  c.trailing_ok = c.races > 0 && c.trailing_rate >= th.trailing_rate;
  c.match_rate =
      c.matched_pairs ? static_cast<double>(agree) / static_cast<double>(c.matched_pairs) : kNaN;
  c.match_ok = c.matched_pairs > 0 && c.match_rate >= th.match_rate;
  c.p_ok = rep.p.p_hat[0] > th.p_floor && rep.p.p_hat[1] > th.p_floor &&
           1.0 - rep.p.undecided_fraction >= th.decided_floor &&
           std::abs(rep.p.p_hat[0] - rep.p.p_hat[1]) <= th.p_symmetry;
  c.joint_ge_best_uni = rep.e_joint >= rep.e_uni[best] - rep.gap_se;
  c.joint_in_band = rep.e_joint >= rep.band[0] && rep.e_joint <= rep.band[1];
  return rep;
}

std::filesystem::path gap_report_path(const ExperimentSpec& spec) {
  return spec.output_dir / spec.name / "gap_report.json";
}

std::string to_json(const GapReport& rep) {
  auto pair = [](const std::array<double, kNumModalities>& a) {
    return json::array({number(a[0]), number(a[1])});
  };
  json seeds = json::array();
  for (const auto& s : rep.per_seed) {
    json j;
    j["seed"] = s.seed;
    j["e_uni"] = json::array({number(s.uni[0].test_error), number(s.uni[1].test_error)});
    j["train_error_uni"] = json::array({number(s.uni[0].train_error), number(s.uni[1].train_error)});
    j["e_joint"] = number(s.joint.test_error);
    j["train_error_joint"] = number(s.joint.train_error);
    j["probe_error"] = pair(s.joint.probe_error);
    if (s.joint.competition) {
      j["match_rate"] = number(s.joint.competition->match_rate);
      j["p_hat"] = pair(s.joint.competition->p_hat);
      j["undecided_fraction"] = number(s.joint.competition->undecided_fraction);
    }
    seeds.push_back(std::move(j));
  }
  json config = config_json(rep.spec_echo);
  const auto& c = rep.checks;
  json checks;
  checks["uni_train_zero"] = c.uni_train_zero;
  checks["uni_test_in_band"] = json::array({c.uni_test_in_band[0], c.uni_test_in_band[1]});
  checks["joint_train_zero"] = c.joint_train_zero;
  checks["probe_flag_seeds"] = c.probe_flag_seeds;
  checks["probe_flag_majority"] = c.probe_flag_majority;
  checks["trailing_rate"] = number(c.trailing_rate);
  checks["races"] = c.races;
  checks["trailing_ok"] = c.trailing_ok;
  checks["match_rate"] = number(c.match_rate);
  checks["matched_pairs"] = c.matched_pairs;
  checks["match_ok"] = c.match_ok;
  checks["p_ok"] = c.p_ok;
  checks["joint_ge_best_uni"] = c.joint_ge_best_uni;
  checks["joint_in_band"] = c.joint_in_band;
  checks["all"] = c.all();

  json out;
  out["name"] = rep.name;
  out["seeds"] = rep.per_seed.size();
  out["e_uni"] = pair(rep.e_uni);
  out["e_uni_se"] = pair(rep.e_uni_se);
  out["e_joint"] = number(rep.e_joint);
  out["e_joint_se"] = number(rep.e_joint_se);
  out["gap_se"] = number(rep.gap_se);
  out["probe_error"] = pair(rep.probe);
  out["mu"] = pair(rep.mu);
  out["p_hat"] = pair(rep.p.p_hat);
  out["p_hat_convention"] = "p_hat[r] = frequency that modality r loses a decided class";
  out["win_rate"] = pair(rep.win_rate);
  out["undecided_fraction"] = number(rep.p.undecided_fraction);
  out["decided_pairs"] = rep.p.decided;
  out["total_pairs"] = rep.p.total;
  out["band"] = json::array({number(rep.band[0]), number(rep.band[1])});
  out["checks"] = std::move(checks);
  out["per_seed"] = std::move(seeds);
  out["config"] = std::move(config);
  return out.dump(2);
}

GapReport run_sweep(const ExperimentSpec& spec, const SeedCallback& on_seed) {
  spec.validate();
  for (Arm a : {Arm::uni_1, Arm::uni_2, Arm::joint}) {
    if (!spec.has_arm(a)) throw ConfigError("sweep: all three arms are required");
  }
  if (spec.seeds.size() < spec.thresholds.min_sweep_seeds) {
    throw ConfigError("sweep: need at least " + std::to_string(spec.thresholds.min_sweep_seeds) +
                      " seeds, got " + std::to_string(spec.seeds.size()));
  }
  std::vector<SeedResult> results;
  for (auto seed : spec.seeds) {
    const RunContext ctx = make_run_context(spec, seed);
    SeedResult sr;
    sr.seed = seed;
    for (int r = 0; r < kNumModalities; ++r) {
      const ArmResult res = run_unimodal(ctx, r);
      write_arm_outputs(spec, res);
      sr.uni[r] = summarize(res);
    }
    const ArmResult joint = run_joint(ctx);
    write_arm_outputs(spec, joint);
    sr.joint = summarize(joint);
    if (on_seed) on_seed(sr);
    results.push_back(std::move(sr));
  }
  GapReport rep = make_gap_report(spec, std::move(results));
  write_file_atomic(gap_report_path(spec), to_json(rep));
  return rep;
}

GapReport reaggregate(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<SeedResult> results;
  for (auto seed : spec.seeds) {
    SeedResult sr;
    sr.seed = seed;
    auto load = [&](Arm arm) {
      auto path = arm_stem(spec, arm, seed);
      path += ".json";
      ArmSummary s = arm_summary_from_json(read_file(path));
      if (s.arm != arm || s.seed != seed) throw FormatError("summary mismatch in " + path.string());
      return s;
    };
    sr.uni[0] = load(Arm::uni_1);
    sr.uni[1] = load(Arm::uni_2);
    sr.joint = load(Arm::joint);
    results.push_back(std::move(sr));
  }
  return make_gap_report(spec, std::move(results));
}

}  // namespace modcomp
