// rcwbc: model checks, closed-loop scenario runs and CII sweeps.
//
// Exit codes: 0 ok, 1 validation, 2 parse, 3 solver, 4 IK.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>

#include "rcwbc/cii.hpp"
#include "rcwbc/errors.hpp"
#include "rcwbc/logging.hpp"
#include "rcwbc/rolling_contact.hpp"
#include "rcwbc/sim.hpp"

namespace fs = std::filesystem;
using namespace rcwbc;

namespace {

enum Exit { kOk = 0, kValidation = 1, kParse = 2, kSolver = 3, kIk = 4 };

RobotState random_configuration(const RobotModel& model, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> normal;
  RobotState s;
  s.q = VectorX::Zero(model.nq());
  s.v = VectorX::Zero(model.nv());
  for (int i = 0; i < 3; ++i) s.q(i) = unit(rng);
  Eigen::Vector4d quat(normal(rng), normal(rng), normal(rng), normal(rng));
  s.q.segment<4>(3) = quat.normalized();
  for (int i = 6; i < model.nv(); ++i) {
    const Interval lim = model.joint_at_v_index(i).position_limits;
    s.q(i + 1) = std::uniform_real_distribution<double>(lim.lower, lim.upper)(rng);
    s.v(i) = unit(rng);
  }
  for (int i = 0; i < 6; ++i) s.v(i) = unit(rng);
  const auto& pairs = model.rolling_pair_indices();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [prox, dist] = pairs[p];
    const double ratio = model.spec().rolling_pairs[p].ratio();
    s.q(prox + 1) = ratio * s.q(dist + 1);
    s.v(prox) = ratio * s.v(dist);
  }
  return s;
}

int run_check(const std::string& model_path, int samples, std::uint64_t seed) {
  const RobotModel model = load_model(model_path);
  std::mt19937_64 rng(seed);
  int failures = 0;
  double worst = 0.0;
  std::printf("%-8s %-14s %s\n", "state", "defect", "result");
  for (int k = 0; k < samples; ++k) {
    const ActuationValidity r = check_actuation_validity(model, random_configuration(model, rng));
    worst = std::max(worst, r.defect);
    if (!r.valid) ++failures;
    std::printf("%-8d %-14.3e %s\n", k, r.defect, r.valid ? "pass" : "FAIL");
  }
  std::printf("model %s: %d joints, %zu rolling pairs, mass %.3f kg\n", model.spec().name.c_str(), model.num_joints(),
              model.rolling_pair_indices().size(), model.total_mass());
  std::printf("actuation validity: %d/%d pass, worst defect %.3e\n", samples - failures, samples, worst);
  if (failures) {
    std::fprintf(stderr, "error: actuation validity fails at %d of %d configurations\n", failures, samples);
    return kValidation;
  }
  return kOk;
}

int run_simulate(const std::string& scenario_path, const fs::path& out_dir, std::uint64_t seed, int log_every) {
  const Scenario scenario = load_scenario(scenario_path);
  log::logger().info("scenario '{}' seed {}", scenario.name, seed);
  const TrajectoryLog log = run_scenario(scenario);
  const RunSummary summary = summarize(log);
  fs::create_directories(out_dir);
  write_log_csv(log, out_dir / "log.csv", log_every);
  write_summary(log, summary, out_dir / "summary.yaml");

  std::printf("%-12s %8s %8s %12s %12s %10s\n", "phase", "start", "end", "com_rms_m", "height_rms_m", "rpy_deg");
  for (const auto& p : summary.phases)
    std::printf("%-12s %8.3f %8.3f %12.3e %12.3e %10.3e\n", p.name.c_str(), p.start, p.end, p.com_rms, p.height_rms,
                p.rpy_max_deg);
  std::printf("ticks %ld, max |J_int v| %.3e, min cone margin %.3e, non-optimal ticks %ld\n",
              static_cast<long>(summary.ticks), summary.max_internal_velocity, summary.min_cone_margin,
              static_cast<long>(summary.non_optimal_ticks));
  std::printf("wrote %s and %s\n", (out_dir / "log.csv").c_str(), (out_dir / "summary.yaml").c_str());
  if (log.failed) {
    std::fprintf(stderr, "error: %s\n", log.failure.c_str());
    return kSolver;
  }
  return kOk;
}

int run_cii(const std::string& model_a, const std::optional<std::string>& model_b, const std::string& config_path,
            const fs::path& out_dir) {
  const CiiSweepConfig config = config_path.empty() ? CiiSweepConfig{} : load_cii_sweep_config(config_path);
  config.validate();
  const RobotModel a = load_model(model_a);
  std::vector<CiiModelReport> reports;
  std::optional<double> change;
  if (model_b) {
    const RobotModel b = load_model(*model_b);
    const CiiReport r = cii_report(a, b, config);
    reports = {r.a, r.b};
    change = r.range_change;
  } else {
    reports = {cii_sweep(a, config)};
  }
  write_cii_outputs(out_dir, reports[0], reports.size() > 1 ? &reports[1] : nullptr, config);

  bool ik_failed = false;
  for (const auto& r : reports) {
    std::printf("%-24s configs %5d  ik failures %5d  min %+.4e  max %+.4e  range %.4e\n", r.model.c_str(), r.attempted,
                r.ik_failures, r.min, r.max, r.range);
    if (r.attempted == 0 || 2 * r.ik_failures > r.attempted) {
      std::fprintf(stderr, "error: IK failed at %d of %d sweep configurations of '%s'\n", r.ik_failures, r.attempted,
                   r.model.c_str());
      ik_failed = true;
    }
  }
  if (change)
    std::printf("range reduction of '%s' relative to '%s': %.1f%% (hardware figure 36%%)\n", reports[0].model.c_str(),
                reports[1].model.c_str(), 100.0 * *change);
  std::printf("wrote %s\n", out_dir.c_str());
  return ik_failed ? kIk : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* level = std::getenv("RCWBC_LOG_LEVEL"); level && !log::set_level(level)) {
    std::fprintf(stderr, "error: RCWBC_LOG_LEVEL must be one of error, warn, info, debug\n");
    return kValidation;
  }

  CLI::App app{"Whole-body control for bipeds with rolling-contact knees"};
  app.require_subcommand(1);

  std::string model_path, scenario_path, second_model, config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int samples = 100, log_every = 1;

  auto* check = app.add_subcommand("check", "Validate a model and test actuation validity at random states");
  check->add_option("model", model_path, "Model file")->required();
  check->add_option("--samples", samples, "Number of random configurations")->check(CLI::PositiveNumber);
  check->add_option("--seed", seed, "Random seed");

  auto* simulate = app.add_subcommand("simulate", "Run a closed-loop scenario");
  simulate->add_option("scenario", scenario_path, "Scenario file")->required();
  simulate->add_option("-o,--output", out_dir, "Output directory for log.csv and summary.yaml");
  simulate->add_option("--seed", seed, "Random seed");
  simulate->add_option("--log-every", log_every, "Write every n-th control tick")->check(CLI::PositiveNumber);

  auto* cii = app.add_subcommand("cii", "Centroidal inertia isotropy sweep of one model or a comparison of two");
  cii->add_option("model", model_path, "Model file")->required();
  cii->add_option("second_model", second_model, "Model compared against the first");
  cii->add_option("-c,--config", config_path, "Sweep configuration file");
  cii->add_option("-o,--output", out_dir, "Output directory for cii_table.csv and cii_report.yaml");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*check) return run_check(model_path, samples, seed);
    if (*simulate) return run_simulate(scenario_path, out_dir, seed, log_every);
    if (*cii)
      return run_cii(model_path, second_model.empty() ? std::nullopt : std::optional<std::string>(second_model),
                     config_path, out_dir);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kParse;
  } catch (const IkDidNotConverge& e) {
    std::fprintf(stderr, "IK error: %s\n", e.what());
    return kIk;
  } catch (const SolverInfeasible& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kSolver;
  } catch (const SingularKkt& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kSolver;
  } catch (const Error& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kValidation;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  }
  return kOk;
}
