// Command-line harness: simulate sensor logs, replay them through the
// invariant or quaternion filters, and run the convergence / linearization /
// covariance-sampling experiments. All outputs are CSV.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "inekf/log_io.hpp"
#include "inekf/replay.hpp"

namespace {

using namespace inekf;

const std::map<std::string, FilterKind> kFilterNames = {
    {"inekf-right", FilterKind::kInekfRight},
    {"inekf-left", FilterKind::kInekfLeft},
    {"inekf-robocentric", FilterKind::kInekfRobocentric},
    {"qekf", FilterKind::kQekf},
};

std::string filter_name(FilterKind kind) {
  for (const auto& [name, k] : kFilterNames) {
    if (k == kind) return name;
  }
  return "?";
}

RunConfig load_config(const std::string& path) {
  return path.empty() ? RunConfig{} : parse_config(path);
}

InitialState truth_init(const SensorLog& log, const InitialStd& stds) {
  InitialState init;
  init.std = stds;
  for (const auto& rec : log.records) {
    if (rec.type == SensorRecord::Type::kTruth) {
      init.R = rec.quat.toRotationMatrix();
      init.v = rec.vec_a;
      init.p = rec.vec_b;
      break;
    }
  }
  return init;
}

void append_time(std::string& out, double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9f", t);
  out += buf;
}

void append_num(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << content;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path) {
  const RunConfig cfg = load_config(config_path);
  const SensorLog log = generate(cfg.trajectory, cfg.robot(), cfg.noise, cfg.gravity);
  write_log(out_path, log);
  std::printf("wrote %zu records to %s\n", log.records.size(), out_path.c_str());
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& log_path,
            const std::string& filter, const std::string& out_path) {
  const RunConfig cfg = load_config(config_path);
  const SensorLog log = read_log(log_path);
  ReplayConfig rc = cfg.replay(kFilterNames.at(filter));
  rc.record_trajectory = true;
  const ReplayResult res =
      replay_log(log, cfg.robot(), rc, truth_init(log, cfg.initial_std));
  write_trajectory_csv(out_path, res.trajectory);
  if (res.errors.empty()) {
    std::printf("%s: %zu samples (log carries no ground truth)\n", filter.c_str(),
                res.trajectory.size());
  } else {
    std::printf("%s: %zu samples, final position error %.6f m, %s\n", filter.c_str(),
                res.trajectory.size(), res.final_position_error,
                res.converged ? "converged" : "did not converge");
  }
  return 0;
}

int cmd_montecarlo(const std::string& config_path, const std::string& log_path,
                   const std::string& filter, int runs, uint64_t seed,
                   const std::string& out_path) {
  const RunConfig cfg = load_config(config_path);
  const SensorLog log = read_log(log_path);
  const BipedModel robot = cfg.robot();

  std::vector<FilterKind> kinds;
  if (filter.empty()) {
    kinds = {FilterKind::kInekfRight, FilterKind::kQekf};
  } else {
    kinds = {kFilterNames.at(filter)};
  }

  MonteCarloSpec mc;
  mc.runs = runs;
  mc.seed = seed;
  mc.orientation_range = cfg.mc_orientation_range;
  mc.velocity_range = cfg.mc_velocity_range;

  std::string out = "filter,run,converged,time_to_converge,steady_roll_pitch,"
                    "final_position_error\n";
  for (FilterKind kind : kinds) {
    ReplayConfig rc = cfg.replay(kind);
    rc.estimate_bias = false;  // convergence studies run with bias fixed
    const auto results = monte_carlo(log, robot, rc, mc);
    for (const auto& r : results) {
      out += filter_name(kind);
      out += ',';
      out += std::to_string(r.run);
      out += r.converged ? ",1," : ",0,";
      append_num(out, r.time_to_converge);
      out += ',';
      append_num(out, r.steady_roll_pitch);
      out += ',';
      append_num(out, r.final_position_error);
      out += '\n';
    }
    const double median = median_time_to_converge(results);
    std::printf("%s: median time-to-converge %.3f s\n", filter_name(kind).c_str(),
                median);
  }
  write_file(out_path, out);
  return 0;
}

int cmd_lintest(const std::string& config_path, uint64_t seed,
                const std::string& out_path) {
  const RunConfig cfg = load_config(config_path);
  std::vector<double> scales;
  const int points = 17;
  for (int i = 0; i < points; ++i) {
    scales.push_back(i * (M_PI / 2) / (points - 1));
  }
  const auto curve = linearization_test(scales, 1.0, 1000.0, seed, cfg.gravity);
  std::string out = "scale,inekf_diff,qekf_diff\n";
  for (const auto& p : curve) {
    append_num(out, p.scale);
    out += ',';
    append_num(out, p.inekf_diff);
    out += ',';
    append_num(out, p.qekf_diff);
    out += '\n';
  }
  write_file(out_path, out);
  std::printf("wrote %zu sweep points to %s\n", curve.size(), out_path.c_str());
  return 0;
}

int cmd_covsample(const std::string& config_path, const std::string& log_path,
                  int samples, uint64_t seed, const std::string& out_path) {
  const RunConfig cfg = load_config(config_path);
  const SensorLog log = read_log(log_path);
  const BipedModel robot = cfg.robot();

  double t_end = 0.0;
  for (const auto& rec : log.records) t_end = std::max(t_end, rec.t);
  std::vector<double> snap_times;
  for (double t = 2.0; t <= t_end + 1e-9; t += 2.0) snap_times.push_back(t);

  InitialState init = truth_init(log, cfg.initial_std);
  Eigen::VectorXd d(15);
  const double yaw_std = 2.0 * M_PI;  // fully uncertain heading
  d << 1e-4, 1e-4, yaw_std * yaw_std, Vec3::Constant(1e-4),
      Vec3::Constant(cfg.initial_std.position * cfg.initial_std.position),
      Vec3::Constant(1e-6), Vec3::Constant(1e-6);
  init.P0_override = d.asDiagonal();

  std::string out = "filter,t,x,y,z\n";
  for (FilterKind kind : {FilterKind::kInekfRight, FilterKind::kQekf}) {
    ReplayConfig rc = cfg.replay(kind);
    const ReplayResult res = replay_log(log, robot, rc, init, snap_times);
    const size_t count =
        kind == FilterKind::kQekf ? res.qekf_snapshots.size() : res.snapshots.size();
    for (size_t i = 0; i < count; ++i) {
      SubstreamRng rng = make_stream(seed, NoiseStream::kSampling, i);
      const auto cloud = kind == FilterKind::kQekf
                             ? covariance_samples(res.qekf_snapshots[i], samples, rng)
                             : covariance_samples(res.snapshots[i], samples, rng);
      for (const Vec3& s : cloud) {
        out += filter_name(kind);
        out += ',';
        append_time(out, snap_times[i]);
        out += ',';
        append_num(out, s.x());
        out += ',';
        append_num(out, s.y());
        out += ',';
        append_num(out, s.z());
        out += '\n';
      }
    }
  }
  write_file(out_path, out);
  std::printf("wrote %d samples per snapshot to %s\n", samples, out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contact-aided invariant EKF harness"};
  app.require_subcommand(1);

  std::string config_path, log_path, out_path, filter;
  int runs = 100;
  int samples = 10000;
  uint64_t seed = 0;

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic walking sensor log");
  sim->add_option("--config", config_path, "run configuration file");
  sim->add_option("--out", out_path, "output log path")->required();

  auto* run = app.add_subcommand("run", "Replay a log through one filter");
  run->add_option("--config", config_path, "run configuration file");
  run->add_option("--log", log_path, "sensor log")->required();
  run->add_option("--filter", filter, "inekf-right|inekf-left|inekf-robocentric|qekf")
      ->required()
      ->check(CLI::IsMember({"inekf-right", "inekf-left", "inekf-robocentric", "qekf"}));
  run->add_option("--out", out_path, "trajectory CSV path")->required();

  auto* mc = app.add_subcommand("montecarlo",
                                "Randomized-initialization convergence study");
  mc->add_option("--config", config_path, "run configuration file");
  mc->add_option("--log", log_path, "sensor log")->required();
  mc->add_option("--filter", filter, "restrict to one filter (default: both)")
      ->check(CLI::IsMember({"inekf-right", "inekf-left", "inekf-robocentric", "qekf"}));
  mc->add_option("--runs", runs, "number of runs")->default_val(100);
  mc->add_option("--seed", seed, "initialization seed")->default_val(0);
  mc->add_option("--out", out_path, "metrics CSV path")->required();

  auto* lin = app.add_subcommand("lintest",
                                 "Linearization-exactness sweep over initial error");
  lin->add_option("--config", config_path, "run configuration file");
  lin->add_option("--seed", seed, "IMU sampling seed")->default_val(0);
  lin->add_option("--out", out_path, "curve CSV path")->required();

  auto* cov = app.add_subcommand("covsample",
                                 "Sample position clouds under full yaw uncertainty");
  cov->add_option("--config", config_path, "run configuration file");
  cov->add_option("--log", log_path, "sensor log")->required();
  cov->add_option("--runs", samples, "samples per snapshot")->default_val(10000);
  cov->add_option("--seed", seed, "sampling seed")->default_val(0);
  cov->add_option("--out", out_path, "cloud CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_path);
    if (run->parsed()) return cmd_run(config_path, log_path, filter, out_path);
    if (mc->parsed())
      return cmd_montecarlo(config_path, log_path, filter, runs, seed, out_path);
    if (lin->parsed()) return cmd_lintest(config_path, seed, out_path);
    if (cov->parsed()) return cmd_covsample(config_path, log_path, samples, seed, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
