#include "qsd/bounds.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qsd/errors.hpp"
#include "qsd/threshold.hpp"

namespace qsd {

namespace {

double lambda_min(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

double crawford_number(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) throw ShapeError("crawford_number: dimension mismatch");
  const CMatrix& am = a.mat();
  const CMatrix& bm = b.mat();
  auto f = [&](double t) { return lambda_min(std::cos(t) * am + std::sin(t) * bm); };

  constexpr int grid = 720;
  const double step = 2.0 * std::numbers::pi / grid;
  int best = 0;
  double best_val = f(0.0);
  for (int i = 1; i < grid; ++i) {
    const double v = f(i * step);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double lo = (best - 1) * step;
  double hi = (best + 1) * step;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-12) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = f(x1);
    }
  }
  best_val = std::max({best_val, f1, f2});
  if (best_val <= 0.0) throw NotDefinitePair("crawford_number: pair is not definite");
  return best_val;
}

double stewart_bound(double chi, double crawford) {
  if (!(crawford > 0.0)) throw InvalidInput("stewart_bound: crawford must be positive");
  if (chi > crawford) throw BoundVacuous("stewart_bound: chi exceeds the Crawford number");
  return std::asin(chi / crawford);
}

MathiasLiIntervals mathias_li_intervals(const HermitianMatrix& a, const HermitianMatrix& b,
                                        double chi, double epsilon) {
  if (a.dim() != b.dim()) throw ShapeError("mathias_li_intervals: dimension mismatch");
  const Eigen::Index q = a.dim();
  const EigenSystem eb = hermitian_eig(b);
  if (!(eb.values(0) >= epsilon) || !(epsilon > 0.0)) {
    throw HypothesisViolated("mathias_li_intervals: eigenvalues of B must be >= epsilon > 0");
  }
  if (q * chi > epsilon) throw HypothesisViolated("mathias_li_intervals: q*chi > epsilon");

  const GenEigSolution sol = gen_eig_definite(a, b, 0.0);
  MathiasLiIntervals out;
  out.q = q;
  out.chi = chi;
  out.angles = sol.angles;
  out.cond_d = sol.cond_d;
  out.lower.resize(q);
  out.upper.resize(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    const double arg = q * chi / sol.cond_d(j);
    if (arg > 1.0) throw ConditionTooPoor("mathias_li_intervals: q*chi/d_j > 1");
    const double w = std::asin(arg);
    out.lower(j) = sol.angles(j) - w;
    out.upper(j) = sol.angles(j) + w;
  }
  out.lower_sorted = out.lower;
  out.upper_sorted = out.upper;
  std::sort(out.lower_sorted.begin(), out.lower_sorted.end());
  std::sort(out.upper_sorted.begin(), out.upper_sorted.end());
  return out;
}

double mathias_li_gap_bound(const HermitianMatrix& a, const HermitianMatrix& b, double chi,
                            double epsilon, Eigen::Index j) {
  const MathiasLiIntervals iv = mathias_li_intervals(a, b, chi, epsilon);
  if (j < 0 || j >= iv.q) throw InvalidInput("mathias_li_gap_bound: index out of range");
  const double qc = iv.q * chi;
  const double need = std::asin(qc / epsilon) - std::asin(qc / iv.cond_d(j));
  double gap = std::numeric_limits<double>::infinity();
  if (j > 0) gap = std::min(gap, iv.angles(j) - iv.angles(j - 1));
  if (j + 1 < iv.q) gap = std::min(gap, iv.angles(j + 1) - iv.angles(j));
  if (gap < need) throw GapTooSmall("mathias_li_gap_bound: eigenangle gap condition fails");
  return std::asin(qc / iv.cond_d(j));
}

double chi_H_bound(double mu, double alpha, int n, double rho, double norm_s, double epsilon,
                   double eta_s) {
  if (!(rho > 0.0) || !(epsilon > 0.0)) throw InvalidInput("chi_H_bound: need rho, epsilon > 0");
  const double f = 1.0 + 1.0 / rho;
  if (f * eta_s / epsilon > 1.0) throw HypothesisViolated("chi_H_bound: eta_S too large");
  const double nn = n;
  return 3.0 * mu * nn * nn * nn * f * std::pow(norm_s / epsilon, alpha) * eta_s;
}

double chi_S_bound(int n, double rho, double eta_s, double epsilon) {
  if (!(rho > 0.0) || !(epsilon > 0.0)) throw InvalidInput("chi_S_bound: need rho, epsilon > 0");
  const double x = (1.0 + 1.0 / rho) * eta_s * n;
  return 2.0 * x + x * x / epsilon;
}

double chi_S_bound_simplified(int n, double rho, double eta_s, double epsilon) {
  if (!(rho > 0.0) || !(epsilon > 0.0)) throw InvalidInput("chi_S_bound: need rho, epsilon > 0");
  const double x = (1.0 + 1.0 / rho) * eta_s * n;
  if (x / epsilon > 1.0) throw HypothesisViolated("chi_S_bound_simplified: x/epsilon > 1");
  return 3.0 * x;
}

MainBoundReport main_bound(const HermitianMatrix& h, const HermitianMatrix& s, double eta_h,
                           double eta_s, double epsilon, double alpha, double mu) {
  if (h.dim() != s.dim()) throw ShapeError("main_bound: dimension mismatch");
  MainBoundReport rep;
  rep.n = s.dim();
  rep.epsilon = epsilon;
  rep.alpha = alpha;
  rep.mu = mu;
  const EigenSystem es = hermitian_eig(s);
  const Eigen::Index n = rep.n;
  Eigen::Index m = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (es.values(i) > epsilon) ++m;
  rep.m = m;
  if (m == 0 || !(epsilon > 0.0)) return rep;

  const double lam_m = es.values(n - m);
  const double lam_m1 = m < n ? es.values(n - m - 1) : 0.0;
  const double norm_s = es.values.cwiseAbs().maxCoeff();
  rep.rho = lam_m / epsilon - 1.0;
  const double f = 1.0 + 1.0 / rep.rho;
  const double nn = static_cast<double>(n);
  rep.chi = 3.0 * (2.0 + mu) * nn * nn * nn * f * std::pow(norm_s / epsilon, alpha) * eta_s + eta_h;

  rep.hypotheses.gap_2_9 = rep.rho > 0.0 && lam_m1 + eta_s <= epsilon;
  rep.hypotheses.small_noise = rep.rho > 0.0 && f * eta_s / epsilon <= 1.0;
  rep.hypotheses.chi_small = nn * rep.chi <= epsilon;

  const ThresholdReport tr = threshold_solve(h, s, epsilon);
  rep.e0 = tr.e0;
  rep.d0 = tr.reduced.cond_d(0);
  if (rep.hypotheses.chi_small) {
    if (tr.kept_dim < 2) {
      rep.hypotheses.angle_gap = true;
    } else {
      const double gap = tr.reduced.angles(1) - tr.reduced.angles(0);
      rep.hypotheses.angle_gap = gap >= std::asin(nn * rep.chi / epsilon);
    }
  }
  if (rep.hypotheses.all()) {
    const double arg = nn * rep.chi / rep.d0;
    if (arg <= 1.0) rep.bound = std::asin(arg);
  }
  return rep;
}

double chebyshev_t(int k, double x) {
  if (k < 0) throw InvalidInput("chebyshev_t: negative degree");
  if (k == 0) return 1.0;
  double t0 = 1.0, t1 = x;
  for (int j = 2; j <= k; ++j) {
    const double t2 = 2.0 * x * t1 - t0;
    t0 = t1;
    t1 = t2;
  }
  return t1;
}

double cheb_beta(double a, int k) {
  if (!(a > 0.0 && a < std::numbers::pi)) throw BadAngle("cheb_beta: a must lie in (0, pi)");
  if (k < 0) throw InvalidInput("cheb_beta: k must be >= 0");
  const double ca = std::cos(a);
  return 1.0 / chebyshev_t(k, 1.0 + 2.0 * (1.0 - ca) / (ca + 1.0));
}

double p_star(double theta, double a, int k) {
  if (!(a > 0.0 && a < std::numbers::pi)) throw BadAngle("p_star: a must lie in (0, pi)");
  if (k < 0) throw InvalidInput("p_star: k must be >= 0");
  const double ca = std::cos(a);
  const double num = chebyshev_t(k, 1.0 + 2.0 * (std::cos(theta) - ca) / (ca + 1.0));
  const double den = chebyshev_t(k, 1.0 + 2.0 * (1.0 - ca) / (ca + 1.0));
  if (theta == 0.0) return 1.0;
  return num / den;
}

double a_priori_bound(const RVector& E, const CVector& gamma, int M, int k, double epsilon,
                      double epsilon_total) {
  const auto N = E.size();
  if (gamma.size() != N) throw ShapeError("a_priori_bound: E and gamma differ in size");
  if (M < 1 || M > N - 1) throw InvalidInput("a_priori_bound: need 1 <= M <= N-1");
  if (k < 0 || epsilon < 0.0) throw InvalidInput("a_priori_bound: need k >= 0, epsilon >= 0");
  const double g0 = std::abs(gamma(0));
  const double den = g0 * g0 - 2.0 * g0 * std::sqrt((2.0 * k + 1.0) * epsilon);
  if (!(den > 0.0)) throw OverlapTooSmall("a_priori_bound: nonpositive denominator");

  auto dE = [&](Eigen::Index i) { return E(i) - E(0); };
  const double damp = 4.0 * std::pow(1.0 + std::numbers::pi * dE(1) / dE(M), -2.0 * k);
  double low = 0.0, high = 0.0;
  for (Eigen::Index i = 1; i <= M; ++i) low += dE(i) * std::norm(gamma(i));
  for (Eigen::Index i = M + 1; i < N; ++i) high += dE(i) * std::norm(gamma(i));
  const double num = 2.0 * (dE(N - 1) * epsilon_total + damp * low + high);
  return num / den;
}

double a_priori_bound_simplified(double delta_e_max, double delta_e1, double gamma0_sq, int k) {
  if (!(gamma0_sq > 0.0)) throw OverlapTooSmall("a_priori_bound_simplified: zero overlap");
  return 8.0 * delta_e_max * (1.0 - gamma0_sq) / gamma0_sq *
         std::pow(1.0 + std::numbers::pi * delta_e1 / delta_e_max, -2.0 * k);
}

double thresholding_only_bound(double delta_e, double epsilon, double c0_norm) {
  const double t = 2.0 * std::sqrt(epsilon) * c0_norm;
  if (!(t < 1.0)) throw HypothesisViolated("thresholding_only_bound: 2 sqrt(eps)|c0| >= 1");
  return delta_e * epsilon * c0_norm * c0_norm / (1.0 - t);
}

double low_rank_stability_bound(double lambda_m, double lambda_m1, double delta_spec,
                                double delta_qui, int n) {
  const double gap = lambda_m - lambda_m1 - delta_spec;
  if (!(gap > 0.0)) throw HypothesisViolated("low_rank_stability_bound: gap too small");
  return delta_qui + 2.0 * n * lambda_m * delta_spec / gap * (1.0 + 0.5 * n * delta_spec / gap);
}

double AlphaFit::mu_at(double alpha) const {
  for (std::size_t i = 0; i < alpha_grid.size(); ++i)
    if (alpha_grid[i] == alpha) return mu_min[i];
  double mu = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mu = std::max(mu, y[i] / std::pow(x[i], 1.0 - alpha));
  return mu;
}

AlphaFit alpha_fit(const HermitianMatrix& h, const HermitianMatrix& s, double floor_ratio) {
  if (h.dim() != s.dim()) throw ShapeError("alpha_fit: dimension mismatch");
  const EigenSystem es = hermitian_eig(s);
  const Eigen::Index n = s.dim();
  AlphaFit fit;
  fit.floor = floor_ratio;
  fit.alpha_grid = {0.0, 0.125, 0.25, 0.375, 0.5};
  fit.mu_min.assign(fit.alpha_grid.size(), 0.0);
  if (n == 0) return fit;
  const double lam1 = es.values(n - 1);
  if (!(lam1 > 0.0)) throw InvalidInput("alpha_fit: S has no positive eigenvalue");
  const CMatrix g = es.vectors.adjoint() * h.mat() * es.vectors;
  const double cut = floor_ratio * lam1;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      const double li = es.values(i), lj = es.values(j);
      const double lo = std::min(li, lj), hi = std::max(li, lj);
      if (!(lo >= cut) || !(lo > 0.0)) continue;
      fit.x.push_back(lo / hi);
      fit.y.push_back(std::abs(g(i, j)) / hi);
    }
  }
  for (std::size_t a = 0; a < fit.alpha_grid.size(); ++a) {
    double mu = 0.0;
    for (std::size_t p = 0; p < fit.x.size(); ++p) {
      mu = std::max(mu, fit.y[p] / std::pow(fit.x[p], 1.0 - fit.alpha_grid[a]));
    }
    fit.mu_min[a] = mu;
  }
  return fit;
}

ProjectionError projection_error_direct(const HermitianMatrix& h, const HermitianMatrix& s,
                                        const HermitianMatrix& s_tilde, double epsilon) {
  if (h.dim() != s.dim() || s.dim() != s_tilde.dim()) {
    throw ShapeError("projection_error_direct: dimension mismatch");
  }
  auto kept_basis = [epsilon](const HermitianMatrix& m) {
    const EigenSystem es = hermitian_eig(m);
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = es.values.size() - 1; i >= 0; --i)
      if (es.values(i) > epsilon) idx.push_back(i);
    CMatrix v(m.dim(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) v.col(static_cast<Eigen::Index>(c)) = es.vectors.col(idx[c]);
    return v;
  };
  const CMatrix v = kept_basis(s);
  const CMatrix vt = kept_basis(s_tilde);
  if (v.cols() != vt.cols()) {
    throw SectorMismatch("projection_error_direct: S and S~ keep different dimensions");
  }
  const CMatrix pi = v * v.adjoint();
  const CMatrix pit = vt * vt.adjoint();
  ProjectionError out;
  out.chi_H = spectral_norm(HermitianMatrix(CMatrix(pit * h.mat() * pit - pi * h.mat() * pi)));
  out.chi_S = spectral_norm(HermitianMatrix(CMatrix(pit * s.mat() * pit - pi * s.mat() * pi)));
  out.W = vt.adjoint() * v;
  return out;
}

}  // namespace qsd
