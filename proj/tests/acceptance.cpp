// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gen.hpp"
#include "qsd/bounds.hpp"
#include "qsd/errors.hpp"
#include "qsd/experiment.hpp"
#include "qsd/models.hpp"
#include "qsd/qsd_sim.hpp"
#include "qsd/threshold.hpp"

using namespace qsd;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds, 0 for none
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const double kG = -std::sqrt(2.0);

ModelSpec tfim_spec(TfimState state) {
  ModelSpec s;
  s.kind = ModelKind::tfim;
  s.L = 10;
  s.g = kG;
  s.tfim_state = state;
  return s;
}

Outcome exact_energy() {
  const double e0 = hermitian_eig(tfim_hamiltonian(10, kG)).values(0);
  return {std::abs(e0 - (-15.9799750)) <= 5e-7, fmt("E0 = %.9f", e0)};
}

Outcome noiseless_qsd() {
  const double e = noiseless_qsd_energy(tfim_spec(TfimState::cat), TimeGrid::forward(40, 1.0), 1e-12, true);
  return {std::abs(e - (-15.9799748)) <= 2e-6, fmt("E = %.9f (cat initial state)", e)};
}

double ground_overlap(TfimState state) {
  const HermitianMatrix h = tfim_hamiltonian(10, kG);
  return std::norm(overlaps(h, tfim_initial_state(10, state)).gamma(0));
}

Outcome initial_overlap() {
  const double up = ground_overlap(TfimState::all_up);
  const double down = ground_overlap(TfimState::all_down);
  const double cat = ground_overlap(TfimState::cat);
  const bool ok_up = std::abs(up - 0.079) <= 0.005;
  const bool ok_down = std::abs(down - 0.079) <= 0.005;
  std::string detail = fmt("all_up %.5f, all_down %.5f; cat (not a product state) %.5f", up, down, cat);
  if (ok_up) detail += "; matched by all_up";
  else if (ok_down) detail += "; matched by all_down";
  return {ok_up || ok_down, detail};
}

Outcome counterexamples() {
  double worst_thr = 0.0, worst_gen = 0.0, worst_wil = 0.0;
  for (double e : {1e-2, 1e-4}) {
    const auto b = synthetic_pair("bad_threshold", {{"epsilon", e}});
    worst_thr = std::max(worst_thr, std::abs(threshold_solve(b.h, b.s, e).e0 - 1.0));
    const RVector v = gen_eig_definite(b.h, b.s).values;
    worst_gen = std::max({worst_gen, std::abs(v(0) - 0.0), std::abs(v(1) - 2.0)});
  }
  const auto w = synthetic_pair("wilkinson");
  const RVector wv = gen_eig_definite(w.h, w.s).values;
  worst_wil = std::max(std::abs(wv(0) - 1.0), std::abs(wv(1) - 2.0));
  return {worst_thr <= 1e-12 && worst_gen <= 1e-10 && worst_wil <= 1e-12,
          fmt("threshold err %.2e, unthresholded err %.2e, Wilkinson err %.2e", worst_thr, worst_gen, worst_wil)};
}

std::vector<double> trial_errors(const std::string& scenario) {
  const std::string cfg = R"({"scenario": ")" + scenario + R"(",
    "model": {"kind": "tfim", "L": 10, "g": -1.4142135623730951, "initial_state": "cat"},
    "grid": {"kind": "forward", "n": 20, "dt": 1.0},
    "noise": {"model": "toeplitz-gaussian"}, "sigma_list": [1e-6],
    "epsilon_rule": {"kind": "scaled", "multiplier": 25}, "trials": 100, "base_seed": 0})";
  std::vector<double> out;
  for (const auto& r : run_scenario(parse_config(cfg)))
    if (r.row_type == "trial") out.push_back(r.abs_error ? *r.abs_error : std::numeric_limits<double>::quiet_NaN());
  return out;
}

Outcome noise_robustness() {
  const auto thr = trial_errors("threshold-sweep");
  const auto none = trial_errors("doing-nothing");
  int bad = 0;
  for (double e : thr)
    if (!std::isfinite(e) || !(e < 1e-1)) ++bad;
  std::vector<double> nf;
  for (double e : none)
    if (std::isfinite(e)) nf.push_back(e);
  const double mt = median(thr), mn = nf.empty() ? std::numeric_limits<double>::quiet_NaN() : median(nf);
  const double ratio = mn / mt;
  return {thr.size() == 100 && bad == 0 && ratio >= 10.0,
          fmt("median thresholded %.3e, median baseline %.3e, ratio %.3g, thresholded failures %d", mt, mn, ratio,
              bad)};
}

std::pair<HermitianMatrix, HermitianMatrix> perturbation(int n, double chi, gen::Rng& rng) {
  const double t = gen::uniform(rng, 0.0, pi / 2);
  return {gen::hermitian_with_norm(n, rng, chi * std::cos(t)), gen::hermitian_with_norm(n, rng, chi * std::sin(t))};
}

Outcome mathias_li_suite() {
  gen::Rng rng(500);
  int bracket = 0, stewart = 0, checked = 0;
  for (int t = 0; t < 500; ++t) {
    const int n = gen::uniform_int(rng, 2, 6);
    const HermitianMatrix a = gen::hermitian(n, rng);
    const HermitianMatrix b = gen::positive_definite(n, rng, gen::uniform(rng, 0.05, 1.0));
    const double eps = hermitian_eig(b).values(0);
    const double chi = eps / n * std::pow(10.0, gen::uniform(rng, -6, 0));
    const auto [da, db] = perturbation(n, chi, rng);
    const RVector th = gen_eig_definite(a + da, b + db).angles;
    const MathiasLiIntervals iv = mathias_li_intervals(a, b, chi, eps);
    for (int j = 0; j < n; ++j)
      if (th(j) < iv.lower_sorted(j) - 1e-10 || th(j) > iv.upper_sorted(j) + 1e-10) ++bracket;
    const double c = crawford_number(a, b);
    if (chi <= c) {
      ++checked;
      const RVector th0 = gen_eig_definite(a, b).angles;
      const double w = stewart_bound(chi, c);
      for (int j = 0; j < n; ++j)
        if (std::abs(th(j) - th0(j)) > w + 1e-10) ++stewart;
    }
  }
  return {bracket == 0 && stewart == 0,
          fmt("bracket violations %d, Stewart violations %d (%d pairs checked)", bracket, stewart, checked)};
}

Outcome a_priori_dominance() {
  const std::pair<const char*, const char*> cases[] = {
      {"sm_H1", "sm_xi1"}, {"sm_H1", "sm_xi2"}, {"sm_H2", "sm_xi3"}, {"sm_H2", "sm_xi4"}};
  int below = 0, above = 0, runs = 0;
  double worst_ratio = 0.0;
  for (const auto& [op, xi] : cases) {
    const auto h = synthetic_pair(op);
    const auto v = synthetic_pair(xi);
    auto sp = std::make_shared<const Spectrum>(operator_spectrum(h.h));
    const Overlaps ov = overlaps(*sp, v.vec);
    const int N = static_cast<int>(sp->E.size());
    for (int k = 5; k <= 60; ++k) {
      const QsdInstance inst(h.h, v.vec, TimeGrid::symmetric(k, sp->E(N - 1) - sp->E(0)), PairMode::toeplitz, sp);
      const ThresholdReport rep = threshold_solve(inst.pair().H, inst.pair().S, 1e-6);
      const double err = rep.e0 - sp->E(0);
      const double bound = a_priori_bound(ov.E, ov.gamma, N - 1, k, 1e-6, rep.epsilon_total_clipped());
      ++runs;
      if (err < -1e-9) ++below;
      if (!(err <= bound)) ++above;
      if (bound > 0) worst_ratio = std::max(worst_ratio, err / bound);
    }
  }
  return {below == 0 && above == 0,
          fmt("%d runs: %d below -1e-9, %d above the bound, max error/bound %.3g", runs, below, above, worst_ratio)};
}

Outcome thresholding_only_dominance() {
  const auto b = synthetic_pair("sm_thresh_only");
  const double e0 = b.info.at("E0"), de = b.info.at("E_max") - e0, c0 = b.info.at("c0_norm");
  int checked = 0, fails = 0;
  double min_err = std::numeric_limits<double>::infinity();
  std::ostringstream log;
  for (int p = -12; p <= -2; ++p) {
    const double eps = std::pow(10.0, p);
    if (!(2 * std::sqrt(eps) * c0 < 1)) continue;
    ++checked;
    const double err = threshold_solve(b.h, b.s, eps).e0 - e0;
    const double bound = thresholding_only_bound(de, eps, c0);
    min_err = std::min(min_err, err);
    if (!(err >= 0.0 && err <= bound)) {
      ++fails;
      log << fmt(" [eps=1e%d err=%.3e bound=%.3e]", p, err, bound);
    }
  }
  return {checked > 0 && fails == 0,
          fmt("%d thresholds in scope, %d failures, min error %.3e", checked, fails, min_err) + log.str()};
}

Outcome tightness() {
  int inside = 0, exceeds = 0;
  double med_ratio = 0.0;
  std::vector<double> vals;
  for (int seed = 0; seed < 20; ++seed) {
    const auto b = synthetic_pair("sm_tightness", {{"seed", static_cast<double>(seed)}});
    const ProjectionError pe = projection_error_direct(b.h, b.s, *b.s_tilde, b.epsilon);
    const double rho = 2e-10 / b.epsilon - 1.0;
    const double free = 3 * b.info.at("mu") * 125 * (1 + 1 / rho) * spectral_norm(*b.delta_s);
    if (pe.chi_H >= 1e-8 && pe.chi_H <= 1e-6) ++inside;
    if (pe.chi_H > free) ++exceeds;
    vals.push_back(pe.chi_H);
  }
  med_ratio = median(vals);
  return {inside >= 15 && exceeds >= 15,
          fmt("%d/20 in [1e-8, 1e-6], %d/20 above the alpha-free bound, median %.3e", inside, exceeds, med_ratio)};
}

Outcome alpha_scatter() {
  const ModelInstance mi = build_model(tfim_spec(TfimState::cat));
  const QsdInstance inst(mi.h_op, mi.phi0, TimeGrid::forward(40, 1.0));
  const DefinitePair& p = inst.pair();
  const AlphaFit fit = alpha_fit(p.H, p.S);
  // Lambda of the pencil on the same admissible subspace the points come from.
  const double cut = fit.floor * hermitian_eig(p.S).values.maxCoeff();
  const double lam = threshold_solve(p.H, p.S, cut).e_all.cwiseAbs().maxCoeff();
  const double lam_op = inst.spectrum().E.cwiseAbs().maxCoeff();
  std::size_t ok34 = 0, ok12 = 0, op34 = 0, op12 = 0;
  for (std::size_t i = 0; i < fit.x.size(); ++i) {
    const double x34 = std::pow(fit.x[i], 0.75), x12 = std::sqrt(fit.x[i]);
    ok34 += fit.y[i] <= lam * x34;
    ok12 += fit.y[i] <= lam * x12;
    op34 += fit.y[i] <= lam_op * x34;
    op12 += fit.y[i] <= lam_op * x12;
  }
  const double n = static_cast<double>(fit.x.size());
  return {!fit.x.empty() && ok34 >= 0.99 * n && ok12 == fit.x.size(),
          fmt("%zu points, max|Lambda| %.4f: alpha=1/4 holds %.2f%%, alpha=1/2 holds %.2f%%; "
              "with max|E| %.4f of the operator: %.2f%%, %.2f%%",
              fit.x.size(), lam, 100.0 * ok34 / n, 100.0 * ok12 / n, lam_op, 100.0 * op34 / n, 100.0 * op12 / n)};
}

CMatrix best_rank(const HermitianMatrix& a, int m) {
  const EigenSystem es = hermitian_eig(a);
  const CMatrix v = es.vectors.rightCols(m);
  return v * es.values.tail(m).cast<cplx>().asDiagonal() * v.adjoint();
}

Outcome structural() {
  int toep = 0, mono = 0, weyl = 0, lowrank = 0, minimax = 0;

  for (double g : {0.5, 1.0, kG})
    for (int n : {5, 10, 20}) {
      ModelSpec s;
      s.kind = ModelKind::tfim;
      s.L = 6;
      s.g = g;
      const ModelInstance mi = build_model(s);
      const KrylovBasis kb = krylov_matrix(mi.h_op, mi.phi0, TimeGrid::forward(n, 1.0));
      const DefinitePair d = projected_pair(mi.h_op, kb, PairMode::direct);
      const DefinitePair t = projected_pair(mi.h_op, kb, PairMode::toeplitz);
      if ((d.H.mat() - t.H.mat()).cwiseAbs().maxCoeff() > 1e-10) ++toep;
      if ((d.S.mat() - t.S.mat()).cwiseAbs().maxCoeff() > 1e-10) ++toep;
    }

  gen::Rng rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = gen::uniform_int(rng, 2, 7);
    RVector vals(n);
    for (int i = 0; i < n; ++i) vals(i) = std::pow(10.0, gen::uniform(rng, -10, 0));
    const HermitianMatrix s = gen::with_spectrum(vals, rng);
    const HermitianMatrix h = gen::hermitian(n, rng);
    const double top = hermitian_eig(s).values(n - 1);
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 12; ++i) {
      const double eps = std::pow(10.0, -11.0 + i);
      if (!(top > eps)) break;
      const double e = threshold_solve(h, s, eps).e0;
      if (prev > e + 1e-10 * (1 + std::abs(e))) ++mono;
      prev = e;
    }
  }

  for (int trial = 0; trial < 200; ++trial) {
    const int n = gen::uniform_int(rng, 2, 8);
    const HermitianMatrix s = gen::positive_definite(n, rng, 0.0);
    const HermitianMatrix d = gen::hermitian(n, rng, std::pow(10.0, gen::uniform(rng, -10, -1)));
    const RVector l0 = hermitian_eig(s).values, l1 = hermitian_eig(s + d).values;
    const double nd = spectral_norm(d);
    for (int j = 0; j < n; ++j)
      if (std::abs(l1(j) - l0(j)) > nd + 1e-12) ++weyl;
  }

  for (int t = 0; t < 200; ++t) {
    const int n = gen::uniform_int(rng, 2, 7);
    const int m = gen::uniform_int(rng, 1, n - 1);
    RVector vals(n);
    const double lm = gen::uniform(rng, 0.1, 1.0);
    const double lm1 = lm * gen::uniform(rng, 0.0, 0.8);
    for (int i = 0; i < n - m; ++i) vals(i) = gen::uniform(rng, 0.0, lm1);
    vals(n - m - 1) = lm1;
    vals(n - m) = lm;
    for (int i = n - m + 1; i < n; ++i) vals(i) = gen::uniform(rng, lm, 2.0);
    const HermitianMatrix a = gen::with_spectrum(vals, rng);
    const double dn = (lm - lm1) * std::pow(10.0, gen::uniform(rng, -6, -0.5));
    const HermitianMatrix d = gen::hermitian_with_norm(n, rng, dn);
    const CMatrix diff = best_rank(a + d, m) - best_rank(a, m);
    if (spectral_norm(diff) > low_rank_stability_bound(lm, lm1, dn, dn, n)) ++lowrank;
    if (frobenius_norm(diff) > low_rank_stability_bound(lm, lm1, dn, frobenius_norm(d), n)) ++lowrank;
  }

  for (double a : {0.05, 0.3, 1.0, 2.2})
    for (int k : {1, 2, 5, 10, 20}) {
      const double beta = cheb_beta(a, k);
      const int npts = 10000;
      double outside = 0.0, all = 0.0, quad = 0.0;
      for (int i = 0; i <= npts; ++i) {
        const double th = -pi + 2 * pi * i / npts;
        const double v = std::abs(p_star(th, a, k));
        all = std::max(all, v);
        quad += ((i == 0 || i == npts) ? 0.5 : 1.0) * v * v * (2 * pi / npts);
        const double tho = a + (pi - a) * i / npts;
        outside = std::max({outside, std::abs(p_star(tho, a, k)), std::abs(p_star(-tho, a, k))});
      }
      if (std::abs(outside - beta) > 1e-8) ++minimax;
      if (all > 1 + 1e-10) ++minimax;
      if (quad > 2 * a + (2 * pi - 2 * a) * beta * beta + 1e-6) ++minimax;
      if (p_star(0.0, a, k) != 1.0) ++minimax;
      if (beta > 2.0 * std::pow(1.0 + a, -k) * (1 + 1e-12)) ++minimax;
    }

  const int total = toep + mono + weyl + lowrank + minimax;
  return {total == 0, fmt("violations: toeplitz %d, monotonicity %d, Weyl %d, low-rank %d, minimax %d", toep, mono,
                          weyl, lowrank, minimax)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "TFIM exact ground energy", 60, exact_energy},
      {2, "noiseless QSD energy, TFIM n=40", 120, noiseless_qsd},
      {3, "initial-state ground overlap", 0, initial_overlap},
      {4, "counterexample exactness", 0, counterexamples},
      {5, "noise robustness of thresholding", 600, noise_robustness},
      {6, "eigenangle bracket and Stewart suite", 0, mathias_li_suite},
      {7, "a-priori bound dominance", 300, a_priori_dominance},
      {8, "thresholding-only bound dominance", 0, thresholding_only_dominance},
      {9, "projection-error tightness", 0, tightness},
      {10, "geometric-mean scatter fit", 0, alpha_scatter},
      {11, "structural invariants", 0, structural},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit > 0 && secs >= c.time_limit) {
      o.pass = false;
      o.detail += fmt("; runtime %.1f s over the %.0f s limit", secs, c.time_limit);
    }
    if (!o.pass) ++failed;
    std::printf("%s [%2d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
