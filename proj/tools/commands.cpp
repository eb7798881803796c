#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

#include "skfmatch/matcher.hpp"
#include "skfmatch/results_io.hpp"
#include "skfmatch/road_map.hpp"
#include "skfmatch/sensor_log.hpp"
#include "skfmatch/simulator.hpp"

namespace skfmatch::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kOutDirEnv = "SKFMATCH_OUT_DIR";
constexpr double kNeesDof = 3.0;

/// Input or content problem; maps to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioOptions {
  std::string scenario_path;
  std::string kind;
  std::optional<std::uint64_t> seed;
  std::optional<double> gps_sigma;
  std::optional<double> odo_sigma_s;
  std::optional<double> odo_sigma_theta;
};

struct MatchOptions {
  std::optional<double> radius;
  std::optional<double> stay_probability;
  std::optional<double> prune_threshold;
  std::optional<double> jump_epsilon;
  std::optional<double> track;
  std::optional<double> odo_sigma_s;
  std::optional<double> odo_sigma_theta;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  throw CLI::ValidationError("--out", std::string("no output directory (use --out or ") +
                                          kOutDirEnv + ")");
}

/// Writes every file or none: contents are complete before the first byte hits the disk.
void write_outputs(const std::string& dir,
                   const std::vector<std::pair<std::string, std::string>>& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
  std::vector<fs::path> staged;
  for (const auto& [name, content] : files) {
    const fs::path tmp = fs::path(dir) / (name + ".tmp");
    std::ofstream out(tmp, std::ios::binary);
    out << content;
    if (!out) {
      for (const auto& p : staged) fs::remove(p, ec);
      fs::remove(tmp, ec);
      throw DataError("cannot write " + tmp.string());
    }
    staged.push_back(tmp);
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    fs::rename(staged[i], fs::path(dir) / files[i].first, ec);
    if (ec) throw DataError("cannot finalize " + files[i].first + ": " + ec.message());
  }
}

void add_scenario_options(CLI::App* cmd, ScenarioOptions& o) {
  cmd->add_option("--scenario", o.scenario_path, "Scenario file (JSON)");
  cmd->add_option("--kind", o.kind, "Scenario kind when no file is given")
      ->check(CLI::IsMember({"straight", "outage", "parallel", "junction"}));
  cmd->add_option("--seed", o.seed, "Random seed (overrides the file)");
  cmd->add_option("--gps-sigma", o.gps_sigma, "GPS standard deviation, m");
  cmd->add_option("--odo-sigma-s", o.odo_sigma_s, "Odometry distance noise, m/m");
  cmd->add_option("--odo-sigma-theta", o.odo_sigma_theta, "Odometry heading noise, rad/m");
}

void add_match_options(CLI::App* cmd, MatchOptions& o) {
  cmd->add_option("--radius", o.radius, "Candidate selection radius, m");
  cmd->add_option("--stay-probability", o.stay_probability, "Mode stay probability");
  cmd->add_option("--prune-threshold", o.prune_threshold, "Hypothesis prune threshold");
  cmd->add_option("--jump-epsilon", o.jump_epsilon, "Mass towards unconnected segments");
  cmd->add_option("--track", o.track, "Rear axle width, m");
  cmd->add_option("--match-odo-sigma-s", o.odo_sigma_s, "Filter odometry distance noise, m/m");
  cmd->add_option("--match-odo-sigma-theta", o.odo_sigma_theta,
                  "Filter odometry heading noise, rad/m");
}

Scenario load_scenario(const ScenarioOptions& o) {
  Scenario s;
  try {
    if (!o.scenario_path.empty()) {
      s = scenario_from_json(read_file(o.scenario_path));
    } else if (!o.kind.empty()) {
      s = Scenario::defaults(scenario_kind_from_string(o.kind));
    } else {
      throw CLI::ValidationError("--scenario", "give --scenario FILE or --kind KIND");
    }
    if (o.seed) s.seed = *o.seed;
    if (o.gps_sigma) s.gps_sigma = *o.gps_sigma;
    if (o.odo_sigma_s) s.odometry.sigma_s = *o.odo_sigma_s;
    if (o.odo_sigma_theta) s.odometry.sigma_theta = *o.odo_sigma_theta;
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  return s;
}

MatcherConfig matcher_config(const MatchOptions& o, const VehicleParams& vehicle) {
  MatcherConfig c;
  c.vehicle = vehicle;
  if (o.radius) c.radius = *o.radius;
  if (o.stay_probability) c.skf.stay_probability = *o.stay_probability;
  if (o.prune_threshold) c.skf.prune_threshold = *o.prune_threshold;
  if (o.jump_epsilon) c.skf.jump_epsilon = *o.jump_epsilon;
  if (o.track) c.vehicle.track = *o.track;
  if (o.odo_sigma_s) c.vehicle.odo_noise.sigma_s = *o.odo_sigma_s;
  if (o.odo_sigma_theta) c.vehicle.odo_noise.sigma_theta = *o.odo_sigma_theta;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw CLI::ValidationError("matcher", e.what());
  }
  return c;
}

nlohmann::json metrics_json(const Metrics& m) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : m.disambiguation) {
    events.push_back({{"onset", e.onset},
                      {"steps", e.steps ? nlohmann::json(*e.steps) : nlohmann::json(nullptr)}});
  }
  const auto band = chi_square_band(kNeesDof);
  return {
      {"steps", m.nees.size()},
      {"correct_segment_rate", m.correct_segment_rate},
      {"position_rmse", m.position_rmse},
      {"final_position_error", m.final_position_error},
      {"disambiguation", events},
      {"mean_nees", m.mean_nees},
      {"nees_band_95", {band.first, band.second}},
      {"nees_coverage", band_coverage(m.nees, band)},
  };
}

int cmd_sim(const ScenarioOptions& so, const std::string& out_flag, std::ostream& out) {
  const Scenario s = load_scenario(so);
  const std::string dir = resolve_out_dir(out_flag);
  const ScenarioWorld world = generate_scenario(s);
  const SensorLog log = simulate_sensors(world.truth, s);

  std::ostringstream map_text;
  save_map(map_text, world.map);
  std::ostringstream log_text;
  write_sensor_log(log_text, log);
  std::ostringstream truth_text;
  write_truth_csv(truth_text, world.truth);

  write_outputs(dir, {{"map.txt", map_text.str()},
                      {"map.geojson", map_to_geojson(world.map)},
                      {"log.csv", log_text.str()},
                      {"truth.csv", truth_text.str()}});
  out << "wrote " << world.truth.steps.size() << " steps of " << to_string(s.kind)
      << " (seed " << s.seed << ") to " << dir << '\n';
  return kExitOk;
}

int cmd_match(const std::string& map_path, const std::string& log_path, const MatchOptions& mo,
              const std::string& out_flag, std::ostream& out) {
  const std::string dir = resolve_out_dir(out_flag);
  const MatcherConfig config = matcher_config(mo, VehicleParams{});
  RoadMap map;
  SensorLog log;
  try {
    map = load_map_file(map_path);
    log = read_sensor_log_file(log_path);
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }

  std::vector<MatchResult> results;
  try {
    results = run_matcher(map, log, config);
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }

  std::ostringstream csv;
  write_results_csv(csv, results);
  write_outputs(dir, {{"results.csv", csv.str()}, {"track.geojson", track_to_geojson(map, results)}});
  out << "matched " << results.size() << " steps to " << dir << '\n';
  return kExitOk;
}

int cmd_eval(const std::string& results_path, const std::string& truth_path, std::ostream& out) {
  std::vector<MatchResult> results;
  GroundTruth truth;
  try {
    std::istringstream rs(read_file(results_path));
    results = read_results_csv(rs);
    std::istringstream ts(read_file(truth_path));
    truth = read_truth_csv(ts);
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }
  Metrics m;
  try {
    m = evaluate(results, truth);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  out << metrics_json(m).dump(2) << '\n';
  return kExitOk;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

int cmd_mc(const ScenarioOptions& so, const MatchOptions& mo, std::size_t runs,
           const std::vector<std::uint64_t>& seed_list, const std::string& out_flag,
           std::ostream& out) {
  const Scenario base = load_scenario(so);
  std::vector<std::uint64_t> seeds = seed_list;
  if (seeds.empty()) {
    if (runs < 1) throw CLI::ValidationError("--runs", "need at least one run");
    for (std::size_t i = 0; i < runs; ++i) seeds.push_back(base.seed + i);
  }
  const MatcherConfig config = matcher_config(mo, base.vehicle());
  const auto band = chi_square_band(kNeesDof);

  std::vector<double> rates;
  std::vector<double> final_errors;
  std::vector<double> disamb;
  std::vector<double> all_nees;
  std::size_t unresolved = 0;
  nlohmann::json per_seed = nlohmann::json::array();

  for (std::uint64_t seed : seeds) {
    Scenario s = base;
    s.seed = seed;
    try {
      const ScenarioWorld world = generate_scenario(s);
      const SensorLog log = simulate_sensors(world.truth, s);
      const Metrics m = evaluate(run_matcher(world.map, log, config), world.truth);
      rates.push_back(m.correct_segment_rate);
      final_errors.push_back(m.final_position_error);
      all_nees.insert(all_nees.end(), m.nees.begin(), m.nees.end());
      for (const auto& e : m.disambiguation) {
        if (e.steps) {
          disamb.push_back(static_cast<double>(*e.steps));
        } else {
          ++unresolved;
        }
      }
      per_seed.push_back({{"seed", seed},
                          {"correct_segment_rate", m.correct_segment_rate},
                          {"final_position_error", m.final_position_error},
                          {"mean_nees", m.mean_nees}});
    } catch (const std::exception& e) {
      throw DataError("seed " + std::to_string(seed) + ": " + e.what());
    }
  }

  const double n = static_cast<double>(seeds.size());
  const double mean_nees =
      all_nees.empty() ? 0.0
                       : std::accumulate(all_nees.begin(), all_nees.end(), 0.0) /
                             static_cast<double>(all_nees.size());
  nlohmann::json report = {
      {"kind", std::string(to_string(base.kind))},
      {"runs", seeds.size()},
      {"correct_segment_rate",
       {{"mean", std::accumulate(rates.begin(), rates.end(), 0.0) / n},
        {"min", *std::min_element(rates.begin(), rates.end())}}},
      {"final_position_error",
       {{"mean", std::accumulate(final_errors.begin(), final_errors.end(), 0.0) / n},
        {"max", *std::max_element(final_errors.begin(), final_errors.end())}}},
      {"disambiguation_steps",
       {{"resolved", disamb.size()},
        {"unresolved", unresolved},
        {"min", disamb.empty() ? 0.0 : *std::min_element(disamb.begin(), disamb.end())},
        {"median", median(disamb)},
        {"max", disamb.empty() ? 0.0 : *std::max_element(disamb.begin(), disamb.end())}}},
      {"nees",
       {{"mean", mean_nees},
        {"band_95", {band.first, band.second}},
        {"coverage", band_coverage(all_nees, band)}}},
      {"per_seed", per_seed},
  };
  const std::string text = report.dump(2) + "\n";
  if (!out_flag.empty()) write_outputs(out_flag, {{"mc_report.json", text}});
  out << text;
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-hypothesis road matching with a switching Kalman filter", "skfmatch"};
  app.require_subcommand(1);

  ScenarioOptions sim_opts;
  std::string sim_out;
  auto* sim = app.add_subcommand("sim", "Generate a scenario: map, sensor log, ground truth");
  add_scenario_options(sim, sim_opts);
  sim->add_option("--out", sim_out, "Output directory (default $SKFMATCH_OUT_DIR)");

  std::string map_path;
  std::string log_path;
  std::string match_out;
  MatchOptions match_opts;
  auto* match = app.add_subcommand("match", "Run the matcher over a sensor log");
  match->add_option("--map", map_path, "Road map file")->required();
  match->add_option("--log", log_path, "Sensor log file")->required();
  match->add_option("--out", match_out, "Output directory (default $SKFMATCH_OUT_DIR)");
  add_match_options(match, match_opts);

  std::string results_path;
  std::string truth_path;
  auto* eval = app.add_subcommand("eval", "Score matcher results against ground truth");
  eval->add_option("--results", results_path, "results.csv from match")->required();
  eval->add_option("--truth", truth_path, "truth.csv from sim")->required();

  ScenarioOptions mc_opts;
  MatchOptions mc_match;
  std::size_t runs = 1;
  std::vector<std::uint64_t> seed_list;
  std::string mc_out;
  auto* mc = app.add_subcommand("mc", "Monte-Carlo: sim + match + eval over many seeds");
  add_scenario_options(mc, mc_opts);
  add_match_options(mc, mc_match);
  mc->add_option("--runs", runs, "Number of consecutive seeds starting at --seed");
  mc->add_option("--seed-list", seed_list, "Explicit seeds (overrides --runs)")->delimiter(',');
  mc->add_option("--out", mc_out, "Also write mc_report.json here");

  std::vector<const char*> argv{"skfmatch"};
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (sim->parsed()) return cmd_sim(sim_opts, sim_out, out);
    if (match->parsed()) return cmd_match(map_path, log_path, match_opts, match_out, out);
    if (eval->parsed()) return cmd_eval(results_path, truth_path, out);
    if (mc->parsed()) return cmd_mc(mc_opts, mc_match, runs, seed_list, mc_out, out);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace skfmatch::cli
