#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsd/models.hpp"
#include "qsd/noise.hpp"
#include "qsd/qsd_sim.hpp"

namespace qsd {

enum class Scenario {
  doing_nothing,
  fixed_threshold,
  threshold_sweep,
  threshold_choice,
  auto_threshold,
  heuristics,
  alpha_scatter,
  noiseless_k,
  bound_validation,
  tightness,
};

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct EpsilonRule {
  enum class Kind { fixed, relative, scaled };
  Kind kind = Kind::scaled;
  double value = 25.0;
  // fixed: value; relative: value*|S~|; scaled: value*sigma*|S~|
  double resolve(double sigma, double norm_s) const;
};

struct GridConfig {
  TimeGrid::Kind kind = TimeGrid::Kind::forward;
  int n = 20;
  double dt = 1.0;
  std::optional<int> M;  // symmetric grid: delta_EM = E_M - E_0, default N-1
};

struct HeuristicConfig {
  int k = 5;
  double h0_rel = 1e-2;
  double tiny_rel = 1e-12;
};

struct BoundsConfig {
  double alpha = 0.25;
  std::optional<double> mu;  // default: alpha_fit of the noiseless pair
};

struct ExperimentConfig {
  Scenario scenario = Scenario::threshold_sweep;
  ModelSpec model;
  GridConfig grid;
  NoiseSpec noise;
  std::vector<double> sigma_list;
  EpsilonRule epsilon_rule;
  std::vector<double> epsilon_list;
  std::vector<double> r_list{1e-1, 1e-3, 1e-5};
  double epsilon0_rel = 1e-3;
  HeuristicConfig heuristics;
  std::vector<int> k_list;
  std::optional<BoundsConfig> bounds;
  int trials = 1;
  std::uint64_t base_seed = 0;
  std::string output_path;
  bool timing = false;
};

// Throws ConfigError naming the offending field, or the line and column
// of a JSON syntax error.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct TrialRecord {
  std::string row_type = "trial";  // trial | summary | point
  std::string scenario;
  std::string variant;
  std::optional<long long> trial;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma, epsilon, recovered_E, reference_E, exact_E0, abs_error, bound;
  std::string hypothesis_flags;
  std::string status = "ok";
  std::optional<double> wall_time;
  std::optional<double> median_abs_error, max_abs_error;
  std::optional<double> x, y;
};

extern const std::vector<std::string> kCsvColumns;

// Runs the scenario, writes the CSV to config.output_path when it is not
// empty, and returns every row in file order.
std::vector<TrialRecord> run_scenario(const ExperimentConfig& config);

std::string records_to_csv(const std::vector<TrialRecord>& rows);
void write_csv(const std::vector<TrialRecord>& rows, const std::string& path);

// Builds the noiseless projected pair described by a config's model and grid.
DefinitePair build_config_pair(const ExperimentConfig& config);

// Number of worker threads: QSDTHRESH_THREADS when set, else hardware.
unsigned worker_threads();

// Median with the even-count convention of averaging the two middle values.
double median(std::vector<double> v);

}  // namespace qsd
