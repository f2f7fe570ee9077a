#pragma once

#include <string>
#include <vector>

#include "qsd/linalg.hpp"

namespace qsd {

struct ThresholdReport {
  double epsilon = 0.0;
  Eigen::Index kept_dim = 0;
  RVector kept_vals;       // S-eigenvalues > epsilon, ascending
  RVector discarded_vals;  // S-eigenvalues <= epsilon, ascending
  double epsilon_total = 0.0;  // raw sum of discarded_vals
  CMatrix basis;               // kept S-eigenvectors V, one per column
  HermitianMatrix a;           // V* H V
  HermitianMatrix b;           // V* S V
  GenEigSolution reduced;      // solution of (a, b)
  double e0 = 0.0;
  RVector e_all;

  // Nonnegative version of epsilon_total for use in bounds.
  double epsilon_total_clipped() const { return epsilon_total > 0.0 ? epsilon_total : 0.0; }
};

ThresholdReport threshold_solve(const HermitianMatrix& h,
                                const HermitianMatrix& s, double epsilon);

enum class StopReason { exhausted, jump };

struct AutoThresholdStep {
  double epsilon;
  double energy;
};

struct AutoThresholdTrace {
  std::vector<AutoThresholdStep> steps;  // accepted (epsilon, E), epsilon decreasing
  double final_epsilon = 0.0;
  double final_energy = 0.0;
  StopReason stop_reason = StopReason::exhausted;
  // Candidate that triggered the jump test, when stop_reason == jump.
  double rejected_epsilon = 0.0;
  double rejected_energy = 0.0;
};

AutoThresholdTrace auto_threshold_solve(const HermitianMatrix& h,
                                        const HermitianMatrix& s,
                                        double epsilon0, double r);

struct HeuristicScore {
  double E;
  double h1;
  double h2;
};

std::vector<HeuristicScore> heuristic_scores(const HermitianMatrix& h,
                                             const HermitianMatrix& s,
                                             double tiny_epsilon);

enum class HeuristicStrategy { a, b, c };
enum class HeuristicMetric { h1, h2 };

double heuristic_select(const std::vector<HeuristicScore>& scores,
                        HeuristicStrategy strategy, int k, double h0,
                        HeuristicMetric metric);

std::string to_string(StopReason r);

}  // namespace qsd
