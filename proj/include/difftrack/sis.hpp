#pragma once

// Susceptible-infected-susceptible dynamics on a fixed graph. Per-node flip
// probabilities depend on the node's degree l and its count a of infected
// neighbors; all flips in a step are computed synchronously from the
// start-of-step state.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "difftrack/graph.hpp"
#include "difftrack/rng.hpp"

namespace difftrack {

struct TransitionKernel {
    // p21[l][a]: susceptible -> infected rate, p12[l][a]: infected ->
    // susceptible rate, for degree l in 1..max_degree and a in 0..l.
    // Entries are base rates in [0,1]; the per-step flip probability is
    // lambda * rate. Index 0 of the outer vectors is unused.
    double lambda = 1.0;
    std::vector<std::vector<double>> p12;
    std::vector<std::vector<double>> p21;

    int max_degree() const { return static_cast<int>(p12.size()) - 1; }
    double max_rate() const;
    // Entries in [0,1], both tables shaped (l+1) for each l.
    void validate() const;
    // True when lambda * rate is a valid probability for every entry.
    bool step_probabilities_valid() const;

    static TransitionKernel zero(int max_degree, double lambda = 1.0);
    // Both tables iid uniform on [0,1).
    static TransitionKernel random_stochastic(int max_degree, double lambda, std::uint64_t seed);

    TransitionKernel with_lambda(double new_lambda) const;
};

// Kernel CSV with header "l,a,p12,p21".
void save_kernel(const TransitionKernel& k, const std::string& path);
TransitionKernel load_kernel(const std::string& path, double lambda = 1.0);

struct InfectionState {
    std::vector<std::uint8_t> infected;

    int count() const;
    static InfectionState all_susceptible(int n);
    static InfectionState random(int n, double q, Rng& rng);
};

// One synchronous step; requires kernel.max_degree() >= g.max_degree() and
// valid per-step probabilities. Isolated nodes never transition. Returns the
// nodes that flipped.
std::vector<int> step_agents(const Graph& g, const TransitionKernel& k, InfectionState& s, Rng& rng);

// Fraction infected among nodes of each listed degree; degrees must have at
// least one node each.
Eigen::VectorXd infected_fraction_by_degree(const Graph& g, const InfectionState& s,
                                            const std::vector<int>& degrees);

// Probability that a uniformly random edge endpoint is infected:
// sum_l l rho(l) x(l) / sum_l l rho(l).
double infected_link_probability(const DegreeDistribution& rho, const Eigen::VectorXd& x);

struct SisTrajectory {
    std::vector<int> degrees;  // degree classes present in the graph
    Eigen::MatrixXd x;         // (horizon+1) rows, one column per degree class
};

SisTrajectory simulate_sis(const Graph& g, const TransitionKernel& k, const InfectionState& init,
                           int horizon, std::uint64_t seed);

// Trajectory CSV with header "t,degree,x".
void save_trajectory(const SisTrajectory& t, const std::string& path);

}  // namespace difftrack
