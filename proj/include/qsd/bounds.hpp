#pragma once

#include <optional>
#include <vector>

#include "qsd/linalg.hpp"

namespace qsd {

// max over theta of lambda_min(cos(theta) A + sin(theta) B), clipped at 0,
// from a 720-point scan refined by golden-section search.
double crawford_number(const HermitianMatrix& a, const HermitianMatrix& b);

double stewart_bound(double chi, double crawford);

struct MathiasLiIntervals {
  RVector lower, upper;                // l_j, u_j per eigenvalue index
  RVector lower_sorted, upper_sorted;  // increasing rearrangements
  RVector angles;                      // atan(E_j)
  RVector cond_d;                      // d_j
  double chi = 0.0;
  Eigen::Index q = 0;
};

// Requires lambda_min(B) >= epsilon and q*chi <= epsilon.
MathiasLiIntervals mathias_li_intervals(const HermitianMatrix& a, const HermitianMatrix& b,
                                        double chi, double epsilon);

// asin(q chi / d_j) after checking the eigenangle gap condition at index j.
double mathias_li_gap_bound(const HermitianMatrix& a, const HermitianMatrix& b, double chi,
                            double epsilon, Eigen::Index j);

double chi_H_bound(double mu, double alpha, int n, double rho, double norm_s, double epsilon,
                   double eta_s);
double chi_S_bound(int n, double rho, double eta_s, double epsilon);
// 3(1+1/rho) eta_S n; requires (1+1/rho) eta_S n / epsilon <= 1.
double chi_S_bound_simplified(int n, double rho, double eta_s, double epsilon);

struct MainBoundFlags {
  bool gap_2_9 = false;      // lambda_{m+1} + eta_S <= eps < (1+rho) eps <= lambda_m
  bool small_noise = false;  // (1+1/rho) eta_S / eps <= 1
  bool chi_small = false;    // n chi <= eps
  bool angle_gap = false;    // atan E1 - atan E0 >= asin(n chi / eps)
  bool all() const { return gap_2_9 && small_noise && chi_small && angle_gap; }
};

struct MainBoundReport {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  double epsilon = 0.0;
  double rho = 0.0;
  double mu = 0.0;
  double alpha = 0.0;
  double chi = 0.0;
  double d0 = 0.0;
  double e0 = 0.0;
  MainBoundFlags hypotheses;
  std::optional<double> bound;  // eigenangle bound, present only if all flags hold
};

MainBoundReport main_bound(const HermitianMatrix& h, const HermitianMatrix& s, double eta_h,
                           double eta_s, double epsilon, double alpha, double mu);

// T_k(x) by the three-term recurrence.
double chebyshev_t(int k, double x);
double cheb_beta(double a, int k);
double p_star(double theta, double a, int k);

// Right-hand side of the a-priori bound. E ascending (E[0] = E_0), gamma the
// overlaps, 1 <= M <= N-1, symmetric grid with 2k+1 times.
double a_priori_bound(const RVector& E, const CVector& gamma, int M, int k, double epsilon,
                      double epsilon_total);
// Simplified form with M = N-1 and Delta E_i <= Delta E_{N-1}.
double a_priori_bound_simplified(double delta_e_max, double delta_e1, double gamma0_sq, int k);

double thresholding_only_bound(double delta_e, double epsilon, double c0_norm);

double low_rank_stability_bound(double lambda_m, double lambda_m1, double delta_spec,
                                double delta_qui, int n);

struct AlphaFit {
  std::vector<double> x, y;
  std::vector<double> alpha_grid;  // {0, 1/8, 1/4, 3/8, 1/2}
  std::vector<double> mu_min;      // per alpha_grid entry
  double floor = 1e-16;
  double mu_at(double alpha) const;
};

AlphaFit alpha_fit(const HermitianMatrix& h, const HermitianMatrix& s, double floor_ratio = 1e-16);

struct ProjectionError {
  double chi_H = 0.0;
  double chi_S = 0.0;
  CMatrix W;  // V~* V, q x q
};

ProjectionError projection_error_direct(const HermitianMatrix& h, const HermitianMatrix& s,
                                        const HermitianMatrix& s_tilde, double epsilon);

}  // namespace qsd
