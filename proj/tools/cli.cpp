#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modcomp/dataset_io.hpp"
#include "modcomp/errors.hpp"
#include "modcomp/experiment_spec.hpp"
#include "modcomp/harness.hpp"
#include "modcomp/power_oracle.hpp"
#include "modcomp/text_io.hpp"

namespace modcomp::cli {
namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string seeds;
  std::string out;
  std::string arm;
  std::optional<std::size_t> n;
  bool fix_data = false;
  bool debug = false;
  bool csv = false;
  bool assert_mode = false;
  double slack = 20.0;
  std::size_t t_max = kDefaultPowerTmax;
};

/// A bare integer N means seeds 0..N-1; anything else is a seed list.
std::vector<std::uint64_t> seeds_from_flag(const std::string& text) {
  std::uint64_t count = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, count);
  if (ec == std::errc() && ptr == end) {
    if (count == 0) throw ConfigError("--seeds: count must be positive");
    std::vector<std::uint64_t> seeds(count);
    for (std::uint64_t i = 0; i < count; ++i) seeds[i] = i;
    return seeds;
  }
  return parse_seed_list(text);
}

ExperimentSpec load_spec(const Options& o) {
  ExperimentSpec spec = o.config.empty() ? ExperimentSpec{} : load_experiment_spec(o.config);
  if (o.seed) spec.seeds = {*o.seed};
  if (!o.seeds.empty()) spec.seeds = seeds_from_flag(o.seeds);
  if (!o.out.empty()) spec.output_dir = o.out;
  if (!o.arm.empty()) spec.arms = {parse_arm(o.arm)};
  if (o.n) spec.n = *o.n;
  if (o.fix_data) spec.fix_data = true;
  spec.validate();
  return spec;
}

std::string fmt(double v) { return format_double(v); }

int cmd_gen(const Options& o, std::ostream& out) {
  const ExperimentSpec spec = load_spec(o);
  const std::uint64_t seed = spec.seeds.front();
  const RunContext ctx = make_run_context(spec, seed);
  std::filesystem::path path = o.out.empty() ? std::filesystem::path(spec.name + "_" +
                                                                     std::to_string(seed) + ".mcds")
                                             : std::filesystem::path(o.out);
  write_dataset(path, ctx.train, o.debug);
  out << "wrote " << path.string() << " (n=" << ctx.train.size() << ")\n";
  if (o.csv) {
    auto csv = path;
    csv.replace_extension(".csv");
    export_csv(csv, ctx.train);
    out << "wrote " << csv.string() << "\n";
  }
  return kOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  ExperimentSpec spec = load_spec(o);
  if (o.arm.empty()) throw ConfigError("train: --arm is required");
  const Arm arm = spec.arms.front();
  const std::uint64_t seed = spec.seeds.front();
  const RunContext ctx = make_run_context(spec, seed);
  const ArmResult res = run_arm(ctx, arm);
  const auto csv = write_arm_outputs(spec, res);
  out << "arm=" << arm_name(arm) << " seed=" << seed << " train_error=" << fmt(res.train_error)
      << " test_error=" << fmt(res.test_error);
  if (res.competition) {
    out << " probe_error=" << fmt(res.probe_error[0]) << "," << fmt(res.probe_error[1])
        << " match_rate=" << fmt(res.competition->match_rate);
  }
  out << "\nwrote " << csv.string() << "\n";
  return kOk;
}

void print_gap(const GapReport& rep, std::ostream& out) {
  const auto& c = rep.checks;
  out << "e_uni=" << fmt(rep.e_uni[0]) << "," << fmt(rep.e_uni[1]) << " e_joint=" << fmt(rep.e_joint)
      << " probe=" << fmt(rep.probe[0]) << "," << fmt(rep.probe[1]) << " p_hat=" << fmt(rep.p.p_hat[0])
      << "," << fmt(rep.p.p_hat[1]) << " undecided=" << fmt(rep.p.undecided_fraction) << " band=["
      << fmt(rep.band[0]) << "," << fmt(rep.band[1]) << "]\n";
  out << "checks: uni_train_zero=" << c.uni_train_zero << " uni_band=" << c.uni_test_in_band[0]
      << c.uni_test_in_band[1] << " joint_train_zero=" << c.joint_train_zero
      << " probe_flag_seeds=" << c.probe_flag_seeds << "/" << rep.per_seed.size()
      << " trailing_rate=" << fmt(c.trailing_rate) << " match_rate=" << fmt(c.match_rate)
      << " p_ok=" << c.p_ok << " joint_ge_best_uni=" << c.joint_ge_best_uni
      << " joint_in_band=" << c.joint_in_band << "\n";
}

int finish_gap(const ExperimentSpec& spec, const GapReport& rep, const Options& o,
               std::ostream& out) {
  print_gap(rep, out);
  out << "wrote " << gap_report_path(spec).string() << "\n";
  if (o.assert_mode && !rep.checks.all()) return kAssertFailed;
  return kOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  ExperimentSpec spec = load_spec(o);
  spec.arms = {Arm::uni_1, Arm::uni_2, Arm::joint};
  const GapReport rep = run_sweep(spec, [&](const SeedResult& s) {
    out << "seed " << s.seed << ": e_uni=" << fmt(s.uni[0].test_error) << ","
        << fmt(s.uni[1].test_error) << " e_joint=" << fmt(s.joint.test_error)
        << " probe=" << fmt(s.joint.probe_error[0]) << "," << fmt(s.joint.probe_error[1]) << "\n"
        << std::flush;
  });
  return finish_gap(spec, rep, o, out);
}

int cmd_report(const Options& o, std::ostream& out) {
  const ExperimentSpec spec = load_spec(o);
  const GapReport rep = reaggregate(spec);
  write_file_atomic(gap_report_path(spec), to_json(rep));
  return finish_gap(spec, rep, o, out);
}

int cmd_power(const Options& o, std::ostream& out) {
  const PowerGridReport rep = lemma_grid_check(default_power_grid(), o.slack, o.t_max);
  const std::string text = to_json(rep);
  if (o.out.empty()) {
    out << text << "\n";
  } else {
    write_file_atomic(o.out, text);
    out << "max_ratio=" << fmt(rep.max_ratio) << " violations=" << rep.violations.size()
        << "\nwrote " << o.out << "\n";
  }
  return rep.all_pass ? kOk : kAssertFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Modality competition simulation lab"};
  app.name("modcomp");
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Experiment spec file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output directory (gen, power-check: output file)");
    sub->add_flag("--fix-data", o.fix_data, "Use data_seed for every run; only init varies");
  };

  auto* gen = app.add_subcommand("gen", "Sample a training set and write it to a file");
  add_common(gen);
  gen->add_option("--seed", o.seed, "Run seed");
  gen->add_option("--n", o.n, "Number of samples");
  gen->add_flag("--debug", o.debug, "Also store latent codes, noise and dictionaries");
  gen->add_flag("--csv", o.csv, "Also export a CSV next to the binary file");

  auto* train = app.add_subcommand("train", "Train one arm for one seed");
  add_common(train);
  train->add_option("--seed", o.seed, "Run seed");
  train->add_option("--arm", o.arm, "uni_1, uni_2 or joint")->required();

  auto* sweep = app.add_subcommand("sweep", "Run all arms over many seeds and write the gap report");
  add_common(sweep);
  sweep->add_option("--seeds", o.seeds, "Seed count N (0..N-1) or list such as 0..9,20");
  sweep->add_flag("--assert", o.assert_mode, "Exit 3 unless every gap check passes");

  auto* report = app.add_subcommand("report", "Rebuild the gap report from existing run outputs");
  add_common(report);
  report->add_option("--seeds", o.seeds, "Seed count N (0..N-1) or list such as 0..9,20");
  report->add_flag("--assert", o.assert_mode, "Exit 3 unless every gap check passes");

  auto* power = app.add_subcommand("power-check", "Check the tensor power lemma on its grid");
  power->add_option("--out", o.out, "Write the JSON report here instead of stdout");
  power->add_option("--slack", o.slack, "Slack constant in slack * x0 * log(1/x0)");
  power->add_option("--t-max", o.t_max, "Step budget per grid point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kConfigError;
  }

  try {
    if (gen->parsed()) return cmd_gen(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out);
    if (report->parsed()) return cmd_report(o, out);
    if (power->parsed()) return cmd_power(o, out);
  } catch (const DivergenceError& e) {
    err << "diverged: " << e.what() << "\n";
    return kDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace modcomp::cli
