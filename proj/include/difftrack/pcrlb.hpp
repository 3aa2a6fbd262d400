#pragma once

// Recursive posterior Cramér-Rao bound for the polynomial dynamics with a
// small isotropic process perturbation (variance epsilon) and linear
// Gaussian observations. Jacobian expectations are Monte Carlo averages
// over simulated perturbed trajectories; tr(J_n^{-1}) lower-bounds every
// Bayesian filter's total MSE at step n.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "difftrack/filter.hpp"
#include "difftrack/meanfield.hpp"

namespace difftrack {

struct PcrlbConfig {
    double epsilon = 1e-6;
    int n_trajectories = 100;
    int horizon = 0;
    Eigen::MatrixXd c;
    Eigen::MatrixXd r;
    Eigen::VectorXd x0_mean;
    Eigen::MatrixXd x0_cov;
};

struct FisherSequence {
    std::vector<Eigen::MatrixXd> j;   // J_0 .. J_horizon
    std::vector<double> trace_bound;  // tr(J_n^{-1})
};

// j0 is the initial information matrix (inverse initial covariance).
FisherSequence pcrlb_run(const PolynomialDynamics& dyn, const PcrlbConfig& cfg,
                         const Eigen::MatrixXd& j0, std::uint64_t seed);

struct MseBoundReport {
    std::vector<double> trace_bound;
    std::vector<double> trace_mse;  // Monte Carlo mean of ||xhat - x||^2
    std::vector<double> mse_se;     // standard error of trace_mse
};

// Runs the moment filter on the same perturbed trajectories the bound is
// evaluated on (initial states drawn from the filter's initial belief,
// J_0 = init.cov^{-1}) and reports both curves.
MseBoundReport mse_vs_bound_report(const PolynomialDynamics& dyn, const PcrlbConfig& cfg,
                                   const FilterState& init, std::uint64_t seed);

// CSV with header "n,trace_bound,trace_mse,network_label".
void save_pcrlb_report(const MseBoundReport& report, const std::string& network_label,
                       const std::string& path);

}  // namespace difftrack
