#pragma once

// Bayesian tracking of the mean-field state from noisy linear observations.
// The dynamics are polynomial and the belief is kept Gaussian, so the
// predicted mean and covariance are computed in closed form from Gaussian
// moments of polynomials; the measurement update is the standard linear
// correction in Joseph form. A discrete HMM filter tracks the slowly
// evolving degree distribution on top of the fast infection state.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "difftrack/meanfield.hpp"
#include "difftrack/sampling.hpp"

namespace difftrack {

struct GaussianBelief {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

// One state component of a polynomial map: a polynomial in the component
// x_index and the scalar projection s = w'x, with coef(d, j) multiplying
// x_index^d s^j, d <= 1.
struct PolyRow {
    int index = 0;
    Eigen::MatrixXd coef;  // 2 x (s-degree + 1)
};

inline constexpr int kMaxMomentDegree = 8;

struct MomentResult {
    Eigen::VectorXd mean;  // E[f(x)]
    Eigen::MatrixXd cov;   // Cov[f(x)]
};

// Exact moments of the polynomial map under x ~ N(belief). Rows of total
// degree above max_total_degree raise a capacity error.
MomentResult gaussian_poly_moments(const std::vector<PolyRow>& rows, const Eigen::VectorXd& w,
                                   const GaussianBelief& belief,
                                   int max_total_degree = kMaxMomentDegree);
MomentResult gaussian_poly_moments(const PolynomialDynamics& dyn, const GaussianBelief& belief,
                                   int max_total_degree = kMaxMomentDegree);

// The mean-field map in PolyRow form (s projection vector is dyn.phi).
std::vector<PolyRow> dynamics_rows(const PolynomialDynamics& dyn);

struct FilterState {
    Eigen::VectorXd xhat;
    Eigen::MatrixXd cov;
};

// Time update through the dynamics; process_noise, when given, is added to
// the predicted covariance.
FilterState predict(const PolynomialDynamics& dyn, const FilterState& prior,
                    const Eigen::MatrixXd* process_noise = nullptr);

// Measurement update, Joseph form. Errors when the innovation covariance is
// numerically singular (the message carries its condition number).
FilterState update(const FilterState& prior, const Observation& obs);

struct TrackResult {
    std::vector<FilterState> states;  // index 0 is the initial state
    std::vector<double> mse;          // per-step ||xhat - truth||^2, when truth given
};

TrackResult track(const PolynomialDynamics& dyn, const std::vector<Observation>& observations,
                  const FilterState& init, const Eigen::MatrixXd* truth = nullptr,
                  const Eigen::MatrixXd* process_noise = nullptr);

// Filter log CSV with header "t,degree,xhat,h_ll,y,mse"; mse is the
// per-degree squared error when truth was supplied.
void save_filter_log(const TrackResult& result, const std::vector<Observation>& observations,
                     const std::vector<int>& degrees, const Eigen::MatrixXd* truth,
                     const std::string& path);

// Discrete-state filter step: posterior ∝ diag(likelihood) * transition' * belief.
Eigen::VectorXd hmm_update(const Eigen::VectorXd& belief, const Eigen::MatrixXd& transition,
                           const Eigen::VectorXd& likelihood);

struct TwoTimescaleConfig {
    TransitionKernel kernel;  // must cover degrees 1..size
    Eigen::VectorXd rho0;     // strictly positive, degrees 1..size, sums to 1
    std::function<double(double)> p_of_alpha;
    int slow_steps = 0;
    int k_start = 0;  // evolution clock at the first slow step
    bool static_network = false;
    double sigma_z = 0.75;  // width of the discretized-Gaussian mode likelihood
    int fast_m = 1;
    Eigen::VectorXd fast_x0;
    double fast_r = 1e-3;  // diagonal observation noise on the fast scale, 0 = exact
    int fast_horizon = 80;
    double init_cov = 0.1;
    std::uint64_t seed = 0;
};

struct TwoTimescaleRecord {
    int k = 0;
    double p = 0.0;
    int true_mode = 0;    // degree label
    int mode_obs = 0;     // degree label extracted from the fast filter
    int belief_mode = 0;  // degree label
    double alpha_inf = 0.0;
    Eigen::VectorXd belief;
};

struct TwoTimescaleResult {
    std::vector<TwoTimescaleRecord> records;
    double mode_match_rate = 0.0;
};

TwoTimescaleResult two_timescale_track(const TwoTimescaleConfig& cfg);

// HMM log CSV with header "k,state,prob,mode_obs".
void save_hmm_log(const TwoTimescaleResult& result, const std::string& path);

}  // namespace difftrack
