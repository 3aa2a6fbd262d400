#pragma once

// Slow-time-scale degree-distribution evolution under preferential
// attachment, stochastic-dominance predicates, and diffusion thresholds.
// One growth step at clock k moves degree-d mass up with probability
// (2-p)d/(2k); the top class absorbs. Thresholds treat lambda as scaling
// the infection side only, against unit-rate recovery.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "difftrack/graph.hpp"
#include "difftrack/sis.hpp"

namespace difftrack {

// Row-stochastic upper-bidiagonal growth matrix over degrees 1..size with
// H(d,d) = 1 - (2-p)d/(2k), H(d,d+1) = (2-p)d/(2k), absorbing last row.
// Errors when p is outside [0,1] or k is too small for the diagonal to
// stay nonnegative (raise k or shrink size).
Eigen::MatrixXd evolution_matrix(double p, int k, int size);

struct EvolutionPath {
    std::vector<int> degrees;  // 1..size
    Eigen::MatrixXd rho;       // one row per clock tick, row 0 = rho0
};

// Applies the growth step for clocks k_start..k_end to rho0 (over degrees
// 1..size). The simplex is preserved exactly.
EvolutionPath evolve_distribution(const Eigen::VectorXd& rho0, double p, int k_start, int k_end);
EvolutionPath evolve_distribution(const DegreeDistribution& rho0, double p, int k_start,
                                  int k_end);

struct DominanceResult {
    bool holds = false;
    int first_violation = -1;  // index (or row) of the first failed comparison
};

// a dominates b first-order: every prefix sum of a is <= that of b. The
// final prefix (both totals) is skipped; comparisons are exact.
DominanceResult first_order_dominates(const Eigen::VectorXd& rho_a, const Eigen::VectorXd& rho_b);

// a dominates b second-order: cumulative sums of the prefix sums compare.
DominanceResult second_order_dominates(const Eigen::VectorXd& rho_a,
                                       const Eigen::VectorXd& rho_b);

// Every row of h_a first-order dominates the same row of h_b. Prefix
// comparisons get a few ulps of slack: interior prefixes of a stochastic
// row that are mathematically equal need not be bitwise equal.
DominanceResult rowwise_dominates(const Eigen::MatrixXd& h_a, const Eigen::MatrixXd& h_b);

struct ThresholdResult {
    double lambda_star = 0.0;
    bool infinite = false;  // no finite critical scale (set with lambda_star = inf)
    std::string note;
};

// Critical infection scale sum(l rho(l)) / sum(l^2 rho(l) p21(l,1)).
// Base rates only: kernel.lambda plays no role in the returned scale.
ThresholdResult diffusion_threshold_closed_form(const DegreeDistribution& rho,
                                                const TransitionKernel& kernel);

struct EmpiricalThresholdConfig {
    double theta_pos = 1e-4;  // endemic when ||x_inf||_inf exceeds this
    double rel_tol = 1e-3;    // bisection width relative to the bracket top
    int m = 8;                // step divisor for the fixed-point iteration
    double lambda_max = 0.0;  // bracket top; 0 = m / max infection rate
};

// Bisection on the infection scale: smallest lambda whose asymptotic state
// from x0_small (entrywise in (0, 0.05]) is endemic. Recovery rates enter
// unscaled, matching the closed form's convention.
ThresholdResult diffusion_threshold_empirical(const DegreeDistribution& rho,
                                              const TransitionKernel& kernel,
                                              const Eigen::VectorXd& x0_small,
                                              const EmpiricalThresholdConfig& cfg = {});

// Derivative at alpha = 0 of the endemic self-consistency curve
//   Q(alpha) = (1/<l>) sum_l l rho(l) g_l(alpha) / (1 + g_l(alpha)),
// g_l = lambda * sum_a p21(l,a) C(l,a) alpha^a (1-alpha)^(l-a), by central
// differences at h and h/2 with Richardson extrapolation. A slope above 1
// means the disease-free state is unstable at kernel.lambda.
double q_slope_at_zero(const DegreeDistribution& rho, const TransitionKernel& kernel,
                       double h = 1e-3);

}  // namespace difftrack
