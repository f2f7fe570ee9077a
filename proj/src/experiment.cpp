#include "qsd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "qsd/bounds.hpp"
#include "qsd/errors.hpp"
#include "qsd/threshold.hpp"

namespace qsd {

using nlohmann::json;

// ---------------------------------------------------------------- names

namespace {

const std::vector<std::pair<Scenario, std::string>> kScenarioNames = {
    {Scenario::doing_nothing, "doing-nothing"},
    {Scenario::fixed_threshold, "fixed-threshold"},
    {Scenario::threshold_sweep, "threshold-sweep"},
    {Scenario::threshold_choice, "threshold-choice"},
    {Scenario::auto_threshold, "auto-threshold"},
    {Scenario::heuristics, "heuristics"},
    {Scenario::alpha_scatter, "alpha-scatter"},
    {Scenario::noiseless_k, "noiseless-k"},
    {Scenario::bound_validation, "bound-validation"},
    {Scenario::tightness, "tightness"},
};

std::string fmt_g(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

std::string to_string(Scenario s) {
  for (const auto& [k, v] : kScenarioNames)
    if (k == s) return v;
  return "unknown";
}

Scenario scenario_from_string(const std::string& s) {
  for (const auto& [k, v] : kScenarioNames)
    if (v == s) return k;
  throw ConfigError("scenario: unknown value '" + s + "'");
}

double EpsilonRule::resolve(double sigma, double norm_s) const {
  switch (kind) {
    case Kind::fixed: return value;
    case Kind::relative: return value * norm_s;
    case Kind::scaled: return value * sigma * norm_s;
  }
  return value;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

unsigned worker_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QSDTHRESH_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(std::min<long>(v, 1024));
  }
  return hw;
}

// ---------------------------------------------------------------- config

namespace {

class Obj {
 public:
  Obj(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    for (const auto& [key, _] : j_.items()) {
      if (!allowed.count(key)) throw ConfigError(sub(key) + ": unknown key");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw(const std::string& key) const { return j_.at(key); }
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const std::string& key) const {
    const json& v = need(key);
    if (!v.is_number()) throw ConfigError(sub(key) + ": expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double def) const { return has(key) ? number(key) : def; }

  long long integer(const std::string& key) const {
    const json& v = need(key);
    if (!v.is_number_integer()) throw ConfigError(sub(key) + ": expected an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& key, long long def) const { return has(key) ? integer(key) : def; }

  std::uint64_t u64(const std::string& key, std::uint64_t def) const {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    throw ConfigError(sub(key) + ": expected a nonnegative integer");
  }

  std::string str(const std::string& key) const {
    const json& v = need(key);
    if (!v.is_string()) throw ConfigError(sub(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::string str(const std::string& key, const std::string& def) const { return has(key) ? str(key) : def; }

  bool boolean(const std::string& key, bool def) const {
    if (!has(key)) return def;
    if (!j_.at(key).is_boolean()) throw ConfigError(sub(key) + ": expected a boolean");
    return j_.at(key).get<bool>();
  }

  std::vector<double> numbers(const std::string& key) const {
    if (!has(key)) return {};
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(sub(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(sub(key) + "[" + std::to_string(i) + "]: expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

 private:
  const json& need(const std::string& key) const {
    auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError(sub(key) + ": required field missing");
    return *it;
  }
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
};

void line_col(const std::string& text, std::size_t byte, std::size_t& line, std::size_t& col) {
  line = 1;
  col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
}

ModelSpec parse_model(const Obj& root) {
  const Obj m(root.raw("model"), "model",
              {"kind", "L", "g", "U", "Ne", "n_up", "initial_state", "operator", "xi", "name", "seed"});
  ModelSpec spec;
  const std::string kind = m.str("kind");
  if (kind == "tfim") {
    spec.kind = ModelKind::tfim;
    spec.L = static_cast<int>(m.integer("L"));
    spec.g = m.number("g");
    try {
      spec.tfim_state = tfim_state_from_string(m.str("initial_state", "cat"));
    } catch (const InvalidInput& e) {
      throw ConfigError("model.initial_state: " + std::string(e.what()));
    }
    if (spec.L < 2 || spec.L > 14) throw ConfigError("model.L: must be in [2, 14] for tfim");
  } else if (kind == "hubbard") {
    spec.kind = ModelKind::hubbard;
    spec.L = static_cast<int>(m.integer("L"));
    spec.U = m.number("U");
    spec.Ne = static_cast<int>(m.integer("Ne"));
    if (m.has("n_up")) spec.n_up = static_cast<int>(m.integer("n_up"));
    if (spec.L < 2 || spec.L > 6) throw ConfigError("model.L: must be in [2, 6] for hubbard");
    if (spec.Ne < 0 || spec.Ne > 2 * spec.L) throw ConfigError("model.Ne: must be in [0, 2L]");
  } else if (kind == "synthetic") {
    spec.kind = ModelKind::synthetic;
    spec.synthetic_name = m.str("operator", m.str("name", ""));
    spec.xi_name = m.str("xi", "");
    spec.seed = m.u64("seed", 0);
    if (spec.synthetic_name.empty()) throw ConfigError("model.operator: required for synthetic models");
  } else {
    throw ConfigError("model.kind: unknown value '" + kind + "'");
  }
  return spec;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line, col;
    line_col(text, e.byte, line, col);
    throw ConfigError("config: JSON syntax error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + " (byte " + std::to_string(e.byte) + ")");
  }
  const Obj root(j, "",
                 {"scenario", "model", "grid", "noise", "sigma_list", "epsilon_rule", "epsilon_list", "r_list",
                  "epsilon0_rel", "heuristics", "k_list", "bounds", "trials", "base_seed", "output_path",
                  "timing"});
  ExperimentConfig c;
  c.scenario = scenario_from_string(root.str("scenario"));

  const bool pair_free = c.scenario == Scenario::bound_validation || c.scenario == Scenario::tightness;
  if (root.has("model")) {
    c.model = parse_model(root);
  } else if (!pair_free) {
    throw ConfigError("model: required field missing");
  }

  if (root.has("grid")) {
    const Obj g(root.raw("grid"), "grid", {"kind", "n", "dt", "M"});
    const std::string kind = g.str("kind", "forward");
    if (kind == "forward") {
      c.grid.kind = TimeGrid::Kind::forward;
      c.grid.n = static_cast<int>(g.integer("n"));
      c.grid.dt = g.number("dt");
      if (c.grid.n < 1) throw ConfigError("grid.n: must be >= 1");
      if (!(c.grid.dt > 0.0)) throw ConfigError("grid.dt: must be > 0");
    } else if (kind == "symmetric") {
      c.grid.kind = TimeGrid::Kind::symmetric;
      if (g.has("M")) c.grid.M = static_cast<int>(g.integer("M"));
    } else {
      throw ConfigError("grid.kind: unknown value '" + kind + "'");
    }
  }

  if (root.has("noise")) {
    const Obj n(root.raw("noise"), "noise", {"model", "m", "B"});
    const std::string model = n.str("model", "toeplitz-gaussian");
    if (model == "toeplitz-gaussian") c.noise.model = NoiseModel::toeplitz_gaussian;
    else if (model == "dense-gaussian") c.noise.model = NoiseModel::dense_gaussian;
    else if (model == "monte-carlo") c.noise.model = NoiseModel::monte_carlo;
    else throw ConfigError("noise.model: unknown value '" + model + "'");
    c.noise.m = static_cast<int>(n.integer("m", 1));
    c.noise.B = n.number("B", 1.0);
    if (c.noise.m < 1) throw ConfigError("noise.m: must be >= 1");
    if (!(c.noise.B > 0.0)) throw ConfigError("noise.B: must be > 0");
  }

  c.sigma_list = root.numbers("sigma_list");
  for (double s : c.sigma_list)
    if (!(s >= 0.0)) throw ConfigError("sigma_list: entries must be >= 0");

  if (root.has("epsilon_rule")) {
    const Obj e(root.raw("epsilon_rule"), "epsilon_rule", {"kind", "value", "multiplier"});
    const std::string kind = e.str("kind");
    if (kind == "fixed") c.epsilon_rule.kind = EpsilonRule::Kind::fixed;
    else if (kind == "relative") c.epsilon_rule.kind = EpsilonRule::Kind::relative;
    else if (kind == "scaled") c.epsilon_rule.kind = EpsilonRule::Kind::scaled;
    else throw ConfigError("epsilon_rule.kind: unknown value '" + kind + "'");
    c.epsilon_rule.value = e.has("multiplier") ? e.number("multiplier") : e.number("value");
  } else {
    switch (c.scenario) {
      case Scenario::fixed_threshold: c.epsilon_rule = {EpsilonRule::Kind::relative, 1e-8}; break;
      case Scenario::noiseless_k: c.epsilon_rule = {EpsilonRule::Kind::fixed, 1e-6}; break;
      default: c.epsilon_rule = {EpsilonRule::Kind::scaled, 25.0}; break;
    }
  }

  c.epsilon_list = root.numbers("epsilon_list");
  if (root.has("r_list")) c.r_list = root.numbers("r_list");
  for (double r : c.r_list)
    if (!(r > 0.0)) throw ConfigError("r_list: entries must be > 0");
  c.epsilon0_rel = root.number("epsilon0_rel", 1e-3);
  if (!(c.epsilon0_rel > 0.0)) throw ConfigError("epsilon0_rel: must be > 0");

  if (root.has("heuristics")) {
    const Obj h(root.raw("heuristics"), "heuristics", {"k", "h0_rel", "tiny_rel"});
    c.heuristics.k = static_cast<int>(h.integer("k", 5));
    c.heuristics.h0_rel = h.number("h0_rel", 1e-2);
    c.heuristics.tiny_rel = h.number("tiny_rel", 1e-12);
    if (c.heuristics.k < 1) throw ConfigError("heuristics.k: must be >= 1");
    if (!(c.heuristics.h0_rel > 0.0)) throw ConfigError("heuristics.h0_rel: must be > 0");
  }

  if (root.has("k_list")) {
    const json& kl = root.raw("k_list");
    if (!kl.is_array()) throw ConfigError("k_list: expected an array of integers");
    for (std::size_t i = 0; i < kl.size(); ++i) {
      if (!kl[i].is_number_integer() || kl[i].get<long long>() < 0) {
        throw ConfigError("k_list[" + std::to_string(i) + "]: expected a nonnegative integer");
      }
      c.k_list.push_back(static_cast<int>(kl[i].get<long long>()));
    }
  }

  if (root.has("bounds")) {
    const Obj b(root.raw("bounds"), "bounds", {"alpha", "mu"});
    BoundsConfig bc;
    bc.alpha = b.number("alpha", 0.25);
    if (b.has("mu")) bc.mu = b.number("mu");
    if (bc.alpha < 0.0 || bc.alpha > 0.5) throw ConfigError("bounds.alpha: must be in [0, 1/2]");
    c.bounds = bc;
  }

  const long long trials = root.integer("trials", 1);
  if (trials < 1) throw ConfigError("trials: must be >= 1");
  c.trials = static_cast<int>(trials);
  c.base_seed = root.u64("base_seed", 0);
  c.output_path = root.str("output_path", "");
  c.timing = root.boolean("timing", false);

  const bool noisy = c.scenario == Scenario::doing_nothing || c.scenario == Scenario::fixed_threshold ||
                     c.scenario == Scenario::threshold_sweep || c.scenario == Scenario::threshold_choice ||
                     c.scenario == Scenario::auto_threshold || c.scenario == Scenario::heuristics;
  if (noisy && c.noise.model != NoiseModel::monte_carlo && c.sigma_list.empty()) {
    throw ConfigError("sigma_list: must be nonempty for scenario " + to_string(c.scenario));
  }
  if ((c.scenario == Scenario::threshold_choice || c.scenario == Scenario::bound_validation) &&
      c.epsilon_list.empty()) {
    throw ConfigError("epsilon_list: must be nonempty for scenario " + to_string(c.scenario));
  }
  if (c.scenario == Scenario::noiseless_k) {
    if (c.k_list.empty()) throw ConfigError("k_list: must be nonempty for scenario noiseless-k");
    if (c.grid.kind != TimeGrid::Kind::symmetric) throw ConfigError("grid.kind: noiseless-k needs a symmetric grid");
  }
  if (!pair_free && c.model.kind == ModelKind::synthetic && c.model.xi_name.empty()) {
    throw ConfigError("model.xi: required for synthetic operator models");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------- CSV

const std::vector<std::string> kCsvColumns = {
    "row_type", "scenario", "variant",  "trial",         "seed",         "sigma",       "epsilon",
    "recovered_E", "reference_E", "exact_E0", "abs_error", "bound", "hypothesis_flags", "status",
    "wall_time", "median_abs_error", "max_abs_error", "x", "y"};

namespace {

std::string csv_real(const std::optional<double>& v) {
  if (!v) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string records_to_csv(const std::vector<TrialRecord>& rows) {
  std::string out;
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    if (i) out += ',';
    out += kCsvColumns[i];
  }
  out += '\n';
  for (const auto& r : rows) {
    const std::vector<std::string> cells = {
        csv_text(r.row_type),
        csv_text(r.scenario),
        csv_text(r.variant),
        r.trial ? std::to_string(*r.trial) : "",
        r.seed ? std::to_string(*r.seed) : "",
        csv_real(r.sigma),
        csv_real(r.epsilon),
        csv_real(r.recovered_E),
        csv_real(r.reference_E),
        csv_real(r.exact_E0),
        csv_real(r.abs_error),
        csv_real(r.bound),
        csv_text(r.hypothesis_flags),
        csv_text(r.status),
        csv_real(r.wall_time),
        csv_real(r.median_abs_error),
        csv_real(r.max_abs_error),
        csv_real(r.x),
        csv_real(r.y),
    };
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::vector<TrialRecord>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("write_csv: cannot open '" + path + "'");
  out << records_to_csv(rows);
  if (!out) throw InvalidInput("write_csv: write failed for '" + path + "'");
}

// ---------------------------------------------------------------- scenarios

namespace {

TimeGrid make_grid(const GridConfig& g, const Spectrum& spec, int k) {
  if (g.kind == TimeGrid::Kind::forward) return TimeGrid::forward(g.n, g.dt);
  const auto N = static_cast<int>(spec.E.size());
  const int M = g.M ? *g.M : N - 1;
  if (M < 1 || M > N - 1) throw ConfigError("grid.M: must be in [1, N-1]");
  return TimeGrid::symmetric(k, spec.E(M) - spec.E(0));
}

struct Prepared {
  ModelInstance model;
  std::shared_ptr<const Spectrum> spectrum;
  std::unique_ptr<QsdInstance> inst;  // grid instance for noisy scenarios
  double reference = 0.0;
  double exact = 0.0;
  double norm_h_op = 0.0;
};

std::string model_meta(const ExperimentConfig& c) {
  json m;
  const ModelSpec& s = c.model;
  switch (s.kind) {
    case ModelKind::tfim:
      m["kind"] = "tfim";
      m["L"] = s.L;
      m["g"] = s.g;
      m["initial_state"] = to_string(s.tfim_state);
      break;
    case ModelKind::hubbard:
      m["kind"] = "hubbard";
      m["L"] = s.L;
      m["U"] = s.U;
      m["Ne"] = s.Ne;
      if (s.n_up) m["n_up"] = *s.n_up;
      break;
    case ModelKind::synthetic:
      m["kind"] = "synthetic";
      m["operator"] = s.synthetic_name;
      m["xi"] = s.xi_name;
      break;
  }
  json g;
  if (c.grid.kind == TimeGrid::Kind::forward) {
    g["kind"] = "forward";
    g["n"] = c.grid.n;
    g["dt"] = c.grid.dt;
  } else {
    g["kind"] = "symmetric";
    if (c.grid.M) g["M"] = *c.grid.M;
  }
  return json{{"model", m}, {"grid", g}}.dump();
}

Prepared prepare(const ExperimentConfig& c, int k_for_symmetric = 0) {
  Prepared p;
  p.model = build_model(c.model);
  p.spectrum = std::make_shared<const Spectrum>(operator_spectrum(p.model.h_op));
  p.exact = p.spectrum->E(0);
  p.norm_h_op = p.spectrum->E.cwiseAbs().maxCoeff();
  const TimeGrid grid = make_grid(c.grid, *p.spectrum, k_for_symmetric);
  p.inst = std::make_unique<QsdInstance>(p.model.h_op, p.model.phi0, grid, PairMode::toeplitz, p.spectrum);
  p.reference = noiseless_qsd_energy(p.inst->pair(), 1e-12, true);
  return p;
}

// One perturbed realization of the pair for a given sigma cell.
struct NoisyPair {
  HermitianMatrix h, s;
  HermitianMatrix dh, ds;
};

struct UnitDraw {
  HermitianMatrix nh, ns;
};

// Pulls entries that exceed B by rounding only (e.g. S_00 = 1 + ulp) back
// onto the bound; genuine violations are left for monte_carlo_estimate.
CVector clip_rounding(CVector row, double B) {
  auto clip = [B](double x) { return std::abs(x) > B && std::abs(x) <= B * (1 + 1e-12) ? std::copysign(B, x) : x; };
  for (auto& v : row) v = cplx(clip(v.real()), clip(v.imag()));
  return row;
}

UnitDraw draw_unit_noise(const ExperimentConfig& c, const DefinitePair& pair, double norm_h_op, Rng& rng) {
  const int n = static_cast<int>(pair.S.dim());
  switch (c.noise.model) {
    case NoiseModel::toeplitz_gaussian: {
      HermitianMatrix nh = toeplitz_gaussian_noise(n, 1.0, rng);
      HermitianMatrix ns = toeplitz_gaussian_noise(n, 1.0, rng);
      return {nh, ns};
    }
    case NoiseModel::dense_gaussian: {
      HermitianMatrix nh = dense_gaussian_hermitian(n, 1.0, rng);
      HermitianMatrix ns = dense_gaussian_hermitian(n, 1.0, rng);
      return {nh, ns};
    }
    case NoiseModel::monte_carlo: {
      const CVector rh = pair.H.mat().row(0).transpose();
      const CVector rs = pair.S.mat().row(0).transpose();
      const double scale = norm_h_op > 0.0 ? norm_h_op : 1.0;
      const CVector eh = monte_carlo_estimate(clip_rounding(rh / scale, c.noise.B), c.noise.m, c.noise.B, rng) * scale;
      const CVector es = monte_carlo_estimate(clip_rounding(rs, c.noise.B), c.noise.m, c.noise.B, rng);
      return {HermitianMatrix::toeplitz(eh) - pair.H, HermitianMatrix::toeplitz(es) - pair.S};
    }
  }
  throw InvalidInput("unknown noise model");
}

std::string flags_string(const MainBoundFlags& f) {
  return std::string("gap_2_9=") + (f.gap_2_9 ? "1" : "0") + ";small_noise=" + (f.small_noise ? "1" : "0") +
         ";chi_small=" + (f.chi_small ? "1" : "0") + ";angle_gap=" + (f.angle_gap ? "1" : "0");
}

using Clock = std::chrono::steady_clock;

void parallel_for(int count, const std::function<void(int)>& body) {
  const unsigned nthreads = std::min<unsigned>(worker_threads(), static_cast<unsigned>(std::max(count, 1)));
  if (nthreads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < nthreads; ++t) {
    pool.emplace_back([&]() {
      try {
        for (int i = next++; i < count; i = next++) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// Noisy scenarios: every trial draws unit noise once and reuses it across
// the sigma cells.
std::vector<TrialRecord> run_noisy(const ExperimentConfig& c) {
  const Prepared p = prepare(c);
  const DefinitePair& pair = p.inst->pair();
  const std::string scen = to_string(c.scenario);

  std::optional<double> mu_bound;
  if (c.bounds) {
    mu_bound = c.bounds->mu ? *c.bounds->mu : alpha_fit(pair.H, pair.S).mu_at(c.bounds->alpha);
  }

  const bool mc = c.noise.model == NoiseModel::monte_carlo;
  const std::vector<double> sigmas = mc ? std::vector<double>{0.0} : c.sigma_list;

  std::vector<std::vector<TrialRecord>> per_trial(static_cast<std::size_t>(c.trials));
  parallel_for(c.trials, [&](int trial) {
    const std::uint64_t seed = c.base_seed ^ static_cast<std::uint64_t>(trial);
    Rng rng(seed);
    auto& out = per_trial[static_cast<std::size_t>(trial)];
    UnitDraw unit;
    try {
      unit = draw_unit_noise(c, pair, p.norm_h_op, rng);
    } catch (const Error& e) {
      for (double sigma : sigmas) {
        TrialRecord r;
        r.scenario = scen;
        r.variant = "draw";
        r.trial = trial;
        r.seed = seed;
        if (!mc) r.sigma = sigma;
        r.reference_E = p.reference;
        r.exact_E0 = p.exact;
        r.status = std::string("error: ") + e.what();
        out.push_back(std::move(r));
      }
      return;
    }

    for (double sigma : sigmas) {
      const HermitianMatrix dh = mc ? unit.nh : unit.nh * sigma;
      const HermitianMatrix ds = mc ? unit.ns : unit.ns * sigma;
      const HermitianMatrix ht = pair.H + dh;
      const HermitianMatrix st = pair.S + ds;

      auto base = [&](const std::string& variant) {
        TrialRecord r;
        r.scenario = scen;
        r.variant = mc ? variant + (variant.empty() ? "" : ";") + "m=" + std::to_string(c.noise.m) : variant;
        r.trial = trial;
        r.seed = seed;
        if (!mc) r.sigma = sigma;
        r.reference_E = p.reference;
        r.exact_E0 = p.exact;
        return r;
      };
      auto finish = [&](TrialRecord& r, double e, Clock::time_point t0) {
        r.recovered_E = e;
        r.abs_error = std::abs(e - p.reference);
        if (c.timing) r.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
      };
      auto guarded = [&](TrialRecord r, const std::function<void(TrialRecord&)>& fn) {
        const auto t0 = Clock::now();
        try {
          fn(r);
          if (r.recovered_E) finish(r, *r.recovered_E, t0);
        } catch (const Error& e) {
          r.status = std::string("error: ") + e.what();
          r.recovered_E.reset();
          r.abs_error.reset();
        }
        out.push_back(std::move(r));
      };

      double norm_st = 0.0;
      try {
        norm_st = spectral_norm(st);
      } catch (const Error&) {
      }

      switch (c.scenario) {
        case Scenario::doing_nothing:
          guarded(base("none"), [&](TrialRecord& r) {
            const CVector ev = gen_eig_unstructured(ht, st);
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < ev.size(); ++i)
              if (std::isfinite(ev(i).real())) best = std::min(best, ev(i).real());
            if (!std::isfinite(best)) throw NotDefinite("no finite eigenvalue");
            r.recovered_E = best;
          });
          break;
        case Scenario::fixed_threshold:
        case Scenario::threshold_sweep:
          guarded(base("threshold"), [&](TrialRecord& r) {
            const double eps = c.epsilon_rule.resolve(sigma, norm_st);
            r.epsilon = eps;
            const ThresholdReport rep = threshold_solve(ht, st, eps);
            r.recovered_E = rep.e0;
            if (mu_bound) {
              const NoiseLevel lv = spectral_noise_level(dh, ds);
              const MainBoundReport mb = main_bound(pair.H, pair.S, lv.eta_H, lv.eta_S, eps, c.bounds->alpha, *mu_bound);
              r.hypothesis_flags = flags_string(mb.hypotheses);
              if (mb.bound) r.bound = *mb.bound;
              r.x = std::abs(std::atan(rep.e0) - std::atan(mb.e0));
            }
          });
          break;
        case Scenario::threshold_choice:
          for (double eps : c.epsilon_list) {
            guarded(base("eps=" + fmt_g(eps)), [&](TrialRecord& r) {
              r.epsilon = eps;
              r.recovered_E = threshold_solve(ht, st, eps).e0;
            });
          }
          break;
        case Scenario::auto_threshold:
          for (double rr : c.r_list) {
            guarded(base("r=" + fmt_g(rr)), [&](TrialRecord& r) {
              const AutoThresholdTrace tr = auto_threshold_solve(ht, st, c.epsilon0_rel * norm_st, rr);
              r.epsilon = tr.final_epsilon;
              r.recovered_E = tr.final_energy;
              r.hypothesis_flags = "stop=" + to_string(tr.stop_reason);
            });
          }
          break;
        case Scenario::heuristics: {
          std::vector<HeuristicScore> scores;
          std::string err;
          try {
            scores = heuristic_scores(ht, st, c.heuristics.tiny_rel * norm_st);
          } catch (const Error& e) {
            err = e.what();
          }
          const double h0 = c.heuristics.h0_rel * norm_st;
          const std::pair<HeuristicStrategy, const char*> strategies[] = {
              {HeuristicStrategy::a, "a"}, {HeuristicStrategy::b, "b"}, {HeuristicStrategy::c, "c"}};
          const std::pair<HeuristicMetric, const char*> metrics[] = {{HeuristicMetric::h1, "h1"},
                                                                     {HeuristicMetric::h2, "h2"}};
          for (const auto& [metric, mname] : metrics) {
            for (const auto& [strategy, sname] : strategies) {
              guarded(base(std::string(sname) + "-" + mname), [&](TrialRecord& r) {
                if (!err.empty()) throw InvalidInput(err);
                r.epsilon = c.heuristics.tiny_rel * norm_st;
                r.recovered_E = heuristic_select(scores, strategy, c.heuristics.k, h0, metric);
              });
            }
          }
          break;
        }
        default:
          break;
      }
    }
  });

  std::vector<TrialRecord> rows;
  for (auto& v : per_trial)
    for (auto& r : v) rows.push_back(std::move(r));
  return rows;
}

std::vector<TrialRecord> run_alpha_scatter(const ExperimentConfig& c) {
  const Prepared p = prepare(c);
  const DefinitePair& pair = p.inst->pair();
  const std::string scen = to_string(c.scenario);
  const AlphaFit fit = alpha_fit(pair.H, pair.S, 1e-16);
  const ThresholdReport tr = threshold_solve(pair.H, pair.S, 1e-12 * spectral_norm(pair.S));
  const double max_lam = tr.e_all.cwiseAbs().maxCoeff();

  std::vector<TrialRecord> rows;
  for (std::size_t i = 0; i < fit.x.size(); ++i) {
    TrialRecord r;
    r.row_type = "point";
    r.scenario = scen;
    r.variant = "scatter";
    r.trial = static_cast<long long>(i);
    r.x = fit.x[i];
    r.y = fit.y[i];
    rows.push_back(r);
  }
  for (std::size_t a = 0; a < fit.alpha_grid.size(); ++a) {
    TrialRecord r;
    r.row_type = "summary";
    r.scenario = scen;
    r.variant = "mu_min";
    r.x = fit.alpha_grid[a];
    r.y = fit.mu_min[a];
    rows.push_back(r);
  }
  TrialRecord r;
  r.row_type = "summary";
  r.scenario = scen;
  r.variant = "max_abs_lambda";
  r.y = max_lam;
  rows.push_back(r);
  return rows;
}

std::vector<TrialRecord> run_noiseless_k(const ExperimentConfig& c) {
  const ModelInstance model = build_model(c.model);
  const auto spectrum = std::make_shared<const Spectrum>(operator_spectrum(model.h_op));
  const Overlaps ov = overlaps(*spectrum, model.phi0);
  const int N = static_cast<int>(spectrum->E.size());
  const int M = c.grid.M ? *c.grid.M : N - 1;
  const std::string scen = to_string(c.scenario);

  std::vector<TrialRecord> rows(c.k_list.size());
  parallel_for(static_cast<int>(c.k_list.size()), [&](int idx) {
    const int k = c.k_list[static_cast<std::size_t>(idx)];
    TrialRecord& r = rows[static_cast<std::size_t>(idx)];
    r.scenario = scen;
    r.variant = "k=" + std::to_string(k);
    r.trial = idx;
    r.exact_E0 = spectrum->E(0);
    r.reference_E = spectrum->E(0);
    const auto t0 = Clock::now();
    try {
      const TimeGrid grid = make_grid(c.grid, *spectrum, k);
      const QsdInstance inst(model.h_op, model.phi0, grid, PairMode::toeplitz, spectrum);
      const double eps = c.epsilon_rule.resolve(0.0, spectral_norm(inst.pair().S));
      r.epsilon = eps;
      const ThresholdReport rep = threshold_solve(inst.pair().H, inst.pair().S, eps);
      r.recovered_E = rep.e0;
      r.abs_error = std::abs(rep.e0 - spectrum->E(0));
      r.x = rep.e0 - spectrum->E(0);
      r.bound = a_priori_bound(ov.E, ov.gamma, M, k, eps, rep.epsilon_total_clipped());
      if (N > 1 && M == N - 1) {
        r.y = a_priori_bound_simplified(spectrum->E(N - 1) - spectrum->E(0), spectrum->E(1) - spectrum->E(0),
                                        std::norm(ov.gamma(0)), k);
      }
    } catch (const Error& e) {
      r.status = std::string("error: ") + e.what();
    }
    if (c.timing) r.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  });
  return rows;
}

std::vector<TrialRecord> run_bound_validation(const ExperimentConfig& c) {
  const SyntheticBundle b =
      synthetic_pair("sm_thresh_only", {{"seed", static_cast<double>(c.base_seed)}});
  const double e0 = b.info.at("E0");
  const double de = b.info.at("E_max") - e0;
  const double c0n = b.info.at("c0_norm");
  const std::string scen = to_string(c.scenario);
  std::vector<TrialRecord> rows;
  long long idx = 0;
  for (double eps : c.epsilon_list) {
    TrialRecord r;
    r.scenario = scen;
    r.variant = "eps=" + fmt_g(eps);
    r.trial = idx++;
    r.seed = c.base_seed;
    r.epsilon = eps;
    r.exact_E0 = e0;
    r.reference_E = e0;
    try {
      const ThresholdReport rep = threshold_solve(b.h, b.s, eps);
      r.recovered_E = rep.e0;
      r.abs_error = std::abs(rep.e0 - e0);
      r.x = rep.e0 - e0;
      const bool hyp = 2.0 * std::sqrt(eps) * c0n < 1.0;
      r.hypothesis_flags = std::string("thm_hyp=") + (hyp ? "1" : "0");
      if (hyp) r.bound = thresholding_only_bound(de, eps, c0n);
    } catch (const Error& e) {
      r.status = std::string("error: ") + e.what();
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<TrialRecord> run_tightness(const ExperimentConfig& c) {
  const std::string scen = to_string(c.scenario);
  std::vector<TrialRecord> rows(static_cast<std::size_t>(c.trials));
  parallel_for(c.trials, [&](int trial) {
    TrialRecord& r = rows[static_cast<std::size_t>(trial)];
    const std::uint64_t seed = c.base_seed ^ static_cast<std::uint64_t>(trial);
    r.scenario = scen;
    r.variant = "projection";
    r.trial = trial;
    r.seed = seed;
    try {
      const SyntheticBundle b = synthetic_pair("sm_tightness", {{"seed", static_cast<double>(seed)}});
      const ProjectionError pe = projection_error_direct(b.h, b.s, *b.s_tilde, b.epsilon);
      const double eta_s = spectral_norm(*b.delta_s);
      const EigenSystem es = hermitian_eig(b.s);
      Eigen::Index m = 0;
      for (Eigen::Index i = 0; i < es.values.size(); ++i)
        if (es.values(i) > b.epsilon) ++m;
      const double lam_m = es.values(es.values.size() - m);
      const double rho = lam_m / b.epsilon - 1.0;
      const double n = static_cast<double>(b.s.dim());
      r.epsilon = b.epsilon;
      r.y = pe.chi_H;
      r.x = eta_s / std::sqrt(b.epsilon);
      r.bound = 3.0 * b.info.at("mu") * n * n * n * (1.0 + 1.0 / rho) * eta_s;
    } catch (const Error& e) {
      r.status = std::string("error: ") + e.what();
    }
  });
  return rows;
}

void append_summaries(std::vector<TrialRecord>& rows) {
  struct Cell {
    std::string variant;
    std::optional<double> sigma;
    std::vector<double> errs;
  };
  std::vector<Cell> cells;
  std::string scen;
  for (const auto& r : rows) {
    if (r.row_type != "trial") continue;
    scen = r.scenario;
    auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) {
      return c.variant == r.variant && c.sigma == r.sigma;
    });
    if (it == cells.end()) {
      cells.push_back({r.variant, r.sigma, {}});
      it = cells.end() - 1;
    }
    if (r.abs_error) it->errs.push_back(*r.abs_error);
  }
  for (const auto& c : cells) {
    TrialRecord s;
    s.row_type = "summary";
    s.scenario = scen;
    s.variant = c.variant;
    s.sigma = c.sigma;
    if (!c.errs.empty()) {
      s.median_abs_error = median(c.errs);
      s.max_abs_error = *std::max_element(c.errs.begin(), c.errs.end());
    } else {
      s.status = "no successful trials";
    }
    rows.push_back(s);
  }
}

}  // namespace

DefinitePair build_config_pair(const ExperimentConfig& c) {
  const int k = c.k_list.empty() ? 0 : c.k_list.front();
  ModelInstance model = build_model(c.model);
  const auto spectrum = std::make_shared<const Spectrum>(operator_spectrum(model.h_op));
  const TimeGrid grid = make_grid(c.grid, *spectrum, k);
  QsdInstance inst(model.h_op, model.phi0, grid, PairMode::toeplitz, spectrum);
  DefinitePair p = inst.pair();
  p.meta = model_meta(c);
  return p;
}

std::vector<TrialRecord> run_scenario(const ExperimentConfig& c) {
  std::vector<TrialRecord> rows;
  switch (c.scenario) {
    case Scenario::alpha_scatter:
      rows = run_alpha_scatter(c);
      break;
    case Scenario::noiseless_k:
      rows = run_noiseless_k(c);
      break;
    case Scenario::bound_validation:
      rows = run_bound_validation(c);
      break;
    case Scenario::tightness:
      rows = run_tightness(c);
      append_summaries(rows);
      break;
    default:
      rows = run_noisy(c);
      append_summaries(rows);
      break;
  }
  if (!c.output_path.empty()) write_csv(rows, c.output_path);
  return rows;
}

}  // namespace qsd
