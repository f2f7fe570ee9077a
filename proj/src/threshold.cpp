#include "qsd/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qsd/errors.hpp"

namespace qsd {

namespace {

ThresholdReport solve_with_eig(const HermitianMatrix& h, const HermitianMatrix& s,
                               const EigenSystem& es, double epsilon) {
  const Eigen::Index n = s.dim();
  ThresholdReport rep;
  rep.epsilon = epsilon;
  std::vector<Eigen::Index> kept, dropped;
  for (Eigen::Index i = 0; i < n; ++i) {
    (es.values(i) > epsilon ? kept : dropped).push_back(i);
  }
  if (kept.empty()) throw EmptyThreshold("threshold_solve: no S-eigenvalue above epsilon");

  rep.kept_dim = static_cast<Eigen::Index>(kept.size());
  rep.kept_vals.resize(rep.kept_dim);
  rep.basis.resize(n, rep.kept_dim);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    rep.kept_vals(i) = es.values(kept[i]);
    rep.basis.col(i) = es.vectors.col(kept[i]);
  }
  rep.discarded_vals.resize(static_cast<Eigen::Index>(dropped.size()));
  rep.epsilon_total = 0.0;
  for (std::size_t i = 0; i < dropped.size(); ++i) {
    rep.discarded_vals(i) = es.values(dropped[i]);
    rep.epsilon_total += es.values(dropped[i]);
  }

  const CMatrix& v = rep.basis;
  rep.a = HermitianMatrix(CMatrix(v.adjoint() * h.mat() * v));
  rep.b = HermitianMatrix(CMatrix(v.adjoint() * s.mat() * v));
  rep.reduced = gen_eig_definite(rep.a, rep.b, 0.0);
  rep.e_all = rep.reduced.values;
  rep.e0 = rep.e_all(0);
  return rep;
}

bool is_jump(double e, double e_new, double r) {
  if (e_new == e) return false;
  const double denom = std::min(std::abs(e), std::abs(e_new));
  if (denom == 0.0) return true;
  return std::abs(e - e_new) / denom > r;
}

}  // namespace

ThresholdReport threshold_solve(const HermitianMatrix& h, const HermitianMatrix& s,
                                double epsilon) {
  if (h.dim() != s.dim()) throw ShapeError("threshold_solve: dimension mismatch");
  if (!std::isfinite(epsilon)) throw InvalidInput("threshold_solve: epsilon not finite");
  return solve_with_eig(h, s, hermitian_eig(s), epsilon);
}

AutoThresholdTrace auto_threshold_solve(const HermitianMatrix& h,
                                        const HermitianMatrix& s, double epsilon0,
                                        double r) {
  if (!(epsilon0 > 0.0) || !(r > 0.0)) {
    throw InvalidInput("auto_threshold_solve: epsilon0 and r must be positive");
  }
  if (h.dim() != s.dim()) throw ShapeError("auto_threshold_solve: dimension mismatch");
  const EigenSystem es = hermitian_eig(s);

  AutoThresholdTrace trace;
  double e = solve_with_eig(h, s, es, epsilon0).e0;
  trace.steps.push_back({epsilon0, e});

  std::vector<double> lambdas;
  for (Eigen::Index i = es.values.size() - 1; i >= 0; --i) {
    const double l = es.values(i);
    if (l < epsilon0 && (lambdas.empty() || l < lambdas.back())) lambdas.push_back(l);
  }

  trace.stop_reason = StopReason::exhausted;
  for (double eps : lambdas) {
    double e_new = 0.0;
    bool failed = false;
    try {
      e_new = solve_with_eig(h, s, es, eps).e0;
    } catch (const NotDefinite&) {
      failed = true;
    }
    if (failed || is_jump(e, e_new, r)) {
      trace.stop_reason = StopReason::jump;
      trace.rejected_epsilon = eps;
      trace.rejected_energy = failed ? std::nan("") : e_new;
      break;
    }
    e = e_new;
    trace.steps.push_back({eps, e});
  }
  trace.final_epsilon = trace.steps.back().epsilon;
  trace.final_energy = trace.steps.back().energy;
  return trace;
}

std::vector<HeuristicScore> heuristic_scores(const HermitianMatrix& h,
                                             const HermitianMatrix& s,
                                             double tiny_epsilon) {
  const ThresholdReport rep = threshold_solve(h, s, tiny_epsilon);
  std::vector<HeuristicScore> out;
  out.reserve(static_cast<std::size_t>(rep.kept_dim));
  for (Eigen::Index j = 0; j < rep.kept_dim; ++j) {
    CVector c = rep.basis * rep.reduced.vectors.col(j);
    c /= c.norm();
    const CVector sc = s.mat() * c;
    out.push_back({rep.reduced.values(j), c.dot(sc).real(), std::abs(sc(0))});
  }
  return out;
}

double heuristic_select(const std::vector<HeuristicScore>& scores,
                        HeuristicStrategy strategy, int k, double h0,
                        HeuristicMetric metric) {
  if (scores.empty()) throw InvalidInput("heuristic_select: no scores");
  auto hval = [metric](const HeuristicScore& sc) {
    return metric == HeuristicMetric::h1 ? sc.h1 : sc.h2;
  };
  auto best_h = [&]() {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
      if (hval(scores[i]) > hval(scores[best])) best = i;
    }
    return scores[best].E;
  };

  switch (strategy) {
    case HeuristicStrategy::a:
      return best_h();
    case HeuristicStrategy::b: {
      if (k < 1) throw InvalidInput("heuristic_select: k must be >= 1");
      std::vector<std::size_t> idx(scores.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
        return hval(scores[x]) > hval(scores[y]);
      });
      const std::size_t top = std::min<std::size_t>(idx.size(), static_cast<std::size_t>(k));
      double e = scores[idx[0]].E;
      for (std::size_t i = 1; i < top; ++i) e = std::min(e, scores[idx[i]].E);
      return e;
    }
    case HeuristicStrategy::c: {
      if (!(h0 > 0.0)) throw InvalidInput("heuristic_select: h0 must be positive");
      bool found = false;
      double e = 0.0;
      for (const auto& sc : scores) {
        if (hval(sc) > h0 && (!found || sc.E < e)) {
          e = sc.E;
          found = true;
        }
      }
      return found ? e : best_h();
    }
  }
  return best_h();
}

std::string to_string(StopReason r) {
  return r == StopReason::jump ? "jump" : "exhausted";
}

}  // namespace qsd
