#pragma once

// Noisy measurement of the per-degree infected fractions: uniform per-class
// node sampling and respondent-driven (random-walk) sampling, both reported
// as a linear-Gaussian observation y = C x + v, v ~ N(0, R).

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "difftrack/graph.hpp"
#include "difftrack/rng.hpp"
#include "difftrack/sis.hpp"

namespace difftrack {

struct Observation {
    Eigen::VectorXd y;
    Eigen::MatrixXd c;  // one row per observed class, one column per state class
    Eigen::MatrixXd r;
    std::vector<int> degrees;        // degree label per observation row
    std::vector<int> sample_sizes;   // draws behind each row
    std::vector<int> missing_degrees;  // state classes with no usable row
    bool warning_disconnected = false;
    bool warning_bipartite = false;
};

inline constexpr double kMinObservationVariance = 1e-6;

// gamma[i] draws (with replacement) from the class of state_degrees[i];
// classes where gamma[i] >= class size are counted exactly instead. The
// binomial plug-in variance xhat(1-xhat)/gamma is floored at
// kMinObservationVariance.
Observation uniform_sample(const Graph& g, const InfectionState& s,
                           const std::vector<int>& state_degrees, const std::vector<int>& gamma,
                           std::uint64_t seed);

struct WalkConfig {
    int walk_length = 0;
    int burn_in = 0;
    int start_node = -1;  // -1: random non-isolated node
    int num_batches = 20;
    // Optional symmetric edge weights aligned with g.edges(); empty = unit.
    std::vector<double> edge_weights;
};

// Weighted random walk; per-class estimates reweight visits by 1/pi(node)
// with pi proportional to node strength. R is diagonal from batch means.
// Classes with no visit, or with fewer than two batches containing visits,
// are reported missing.
Observation rds_sample(const Graph& g, const InfectionState& s,
                       const std::vector<int>& state_degrees, const WalkConfig& cfg,
                       std::uint64_t seed);

struct ObserveConfig {
    std::string method = "uniform";  // "uniform" or "rds"
    std::vector<int> gamma;
    WalkConfig walk;
    double fixed_r = -1.0;  // >= 0 replaces R with fixed_r * I
};

Observation observe(const Graph& g, const InfectionState& s, const std::vector<int>& state_degrees,
                    const ObserveConfig& cfg, std::uint64_t seed);

// Idealized uniform sampling from an infinite population whose class
// fractions are x: gamma[i] Bernoulli(x[i]) draws per class, binomial
// plug-in variance. Used when the ground truth is a mean-field state.
Observation synthetic_uniform_observation(const Eigen::VectorXd& x, const std::vector<int>& degrees,
                                          const std::vector<int>& gamma, Rng& rng);

// y = C x + v with v ~ N(0, R); R must be symmetric positive semidefinite.
Observation gaussian_observation(const Eigen::VectorXd& x, const std::vector<int>& degrees,
                                 const Eigen::MatrixXd& c, const Eigen::MatrixXd& r, Rng& rng);

// Observation log CSV with header "t,degree,y,r_ll,gamma".
void save_observations(const std::vector<Observation>& obs, const std::string& path);

}  // namespace difftrack
