#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <json.hpp>

#include "qsd/bounds.hpp"
#include "qsd/errors.hpp"
#include "qsd/experiment.hpp"
#include "qsd/pair_io.hpp"
#include "qsd/threshold.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

using nlohmann::json;

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int cmd_run(const std::string& config_path, const std::string& out, int trials, long long seed) {
  qsd::ExperimentConfig cfg = qsd::load_config(config_path);
  if (!out.empty()) cfg.output_path = out;
  if (trials > 0) cfg.trials = trials;
  if (seed >= 0) cfg.base_seed = static_cast<std::uint64_t>(seed);
  const auto rows = qsd::run_scenario(cfg);
  if (cfg.output_path.empty()) std::cout << qsd::records_to_csv(rows);
  return 0;
}

int cmd_export(const std::string& config_path, const std::string& out) {
  const qsd::ExperimentConfig cfg = qsd::load_config(config_path);
  const qsd::DefinitePair pair = qsd::build_config_pair(cfg);
  qsd::cache_pair(pair, out);
  return 0;
}

int cmd_import(const std::string& in) {
  const qsd::DefinitePair p = qsd::load_pair(in);
  const qsd::EigenSystem es = qsd::hermitian_eig(p.S);
  json j;
  j["n"] = p.S.dim();
  j["toeplitz"] = p.first_row_H.has_value();
  j["norm_S"] = qsd::spectral_norm(p.S);
  j["norm_H"] = qsd::spectral_norm(p.H);
  j["lambda_min_S"] = es.values(0);
  j["lambda_max_S"] = es.values(es.values.size() - 1);
  try {
    j["E0_noiseless"] = qsd::noiseless_qsd_energy(p, 1e-12, true);
  } catch (const qsd::Error& e) {
    j["E0_noiseless"] = nullptr;
    j["E0_error"] = e.what();
  }
  std::cout << j.dump(1) << '\n';
  return 0;
}

int cmd_bounds(const std::string& pair_path, double eta_h, double eta_s, double eps, double alpha,
               std::optional<double> mu) {
  const qsd::DefinitePair p = qsd::load_pair(pair_path);
  json j;
  if (!mu) {
    const qsd::AlphaFit fit = qsd::alpha_fit(p.H, p.S);
    const double m = fit.mu_at(alpha);
    if (std::isfinite(m)) {
      mu = m;
      j["mu_source"] = "alpha_fit";
    } else {
      // Courant-Fischer fallback: alpha = 1/2 with mu = max |Lambda(H,S)|.
      const qsd::ThresholdReport tr = qsd::threshold_solve(p.H, p.S, 1e-12 * qsd::spectral_norm(p.S));
      alpha = 0.5;
      mu = tr.e_all.cwiseAbs().maxCoeff();
      j["mu_source"] = "max_abs_lambda";
    }
  } else {
    j["mu_source"] = "given";
  }
  const qsd::MainBoundReport r = qsd::main_bound(p.H, p.S, eta_h, eta_s, eps, alpha, *mu);
  j["n"] = r.n;
  j["m"] = r.m;
  j["epsilon"] = r.epsilon;
  j["rho"] = finite_or_null(r.rho);
  j["mu"] = r.mu;
  j["alpha"] = r.alpha;
  j["chi"] = finite_or_null(r.chi);
  j["d0"] = r.d0;
  j["E0"] = r.e0;
  j["hypotheses"] = {{"gap_2_9", r.hypotheses.gap_2_9},
                     {"small_noise", r.hypotheses.small_noise},
                     {"chi_small", r.hypotheses.chi_small},
                     {"angle_gap", r.hypotheses.angle_gap}};
  j["bound"] = r.bound ? json(*r.bound) : json(nullptr);
  std::cout << j.dump(1) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thresholded quantum subspace diagonalization experiments"};
  app.require_subcommand(1);

  std::string config_path, out_path, in_path, pair_path;
  int trials = 0;
  long long seed = -1;
  double eta_h = 0.0, eta_s = 0.0, eps = 0.0, alpha = 0.25;
  std::optional<double> mu;

  auto* run = app.add_subcommand("run", "Run an experiment scenario and write CSV");
  run->add_option("--config", config_path, "Config JSON")->required();
  run->add_option("--out", out_path, "CSV output path (overrides config)");
  run->add_option("--trials", trials, "Trial count (overrides config)")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Base seed (overrides config)")->check(CLI::NonNegativeNumber);

  auto* pair = app.add_subcommand("pair", "Export or inspect a cached pair");
  pair->require_subcommand(1);
  auto* pexport = pair->add_subcommand("export", "Write the noiseless pair of a config");
  pexport->add_option("--config", config_path, "Config JSON")->required();
  pexport->add_option("--out", out_path, "Pair JSON output path")->required();
  auto* pimport = pair->add_subcommand("import", "Load a pair file and print a summary");
  pimport->add_option("--in", in_path, "Pair JSON")->required();

  auto* bounds = app.add_subcommand("bounds", "Evaluate the noisy eigenvalue bound for a pair");
  bounds->add_option("--pair", pair_path, "Pair JSON")->required();
  bounds->add_option("--eta-h", eta_h, "Noise level in H")->required()->check(CLI::NonNegativeNumber);
  bounds->add_option("--eta-s", eta_s, "Noise level in S")->required()->check(CLI::NonNegativeNumber);
  bounds->add_option("--epsilon", eps, "Threshold")->required()->check(CLI::PositiveNumber);
  bounds->add_option("--alpha", alpha, "Exponent in [0, 1/2]")->check(CLI::Range(0.0, 0.5));
  bounds->add_option("--mu", mu, "Constant mu (default: fitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, out_path, trials, seed);
    if (*pexport) return cmd_export(config_path, out_path);
    if (*pimport) return cmd_import(in_path);
    if (*bounds) return cmd_bounds(pair_path, eta_h, eta_s, eps, alpha, mu);
  } catch (const qsd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
