#pragma once

// Deterministic mean-field dynamics for the degree-classed infection state.
// One step moves each class fraction by
//   x'(l) = x(l) + (1/m) * [ (1 - x(l)) g_inc_l(alpha) - x(l) g_dec_l(alpha) ]
// where alpha is the infected link probability phi'x and g_inc/g_dec mix the
// kernel rates with binomial weights in alpha. Each state component is a
// polynomial in (x(l), phi'x), which the filter exploits.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "difftrack/graph.hpp"
#include "difftrack/sis.hpp"

namespace difftrack {

struct PolynomialDynamics {
    std::vector<int> degrees;  // degree label per state component
    Eigen::VectorXd rho;       // class probabilities, all positive
    Eigen::VectorXd phi;       // phi_i = l_i rho_i / sum_j l_j rho_j
    double lambda = 1.0;
    int m = 1;  // step divisor

    // Binomial-basis coefficients c[i][a] = lambda * rate(l_i, a) * C(l_i, a),
    // a = 0..l_i, so g(alpha) = sum_a c[a] alpha^a (1-alpha)^(l-a).
    std::vector<std::vector<double>> c_inc;
    std::vector<std::vector<double>> c_dec;
    // Power-basis expansions g(s) = sum_j b[j] s^j with near-cancelled
    // coefficients trimmed to zero; used by the moment engine and tensors.
    std::vector<std::vector<double>> b_inc;
    std::vector<std::vector<double>> b_dec;

    int dim() const { return static_cast<int>(degrees.size()); }
    double g_inc(int i, double alpha) const;
    double g_dec(int i, double alpha) const;
    double g_inc_deriv(int i, double alpha) const;
    double g_dec_deriv(int i, double alpha) const;
    double alpha_of(const Eigen::VectorXd& x) const { return phi.dot(x); }
    // Max over components of the total polynomial degree in x.
    int total_degree() const;
};

// Requires every rho entry positive and the kernel to cover the labels.
PolynomialDynamics build_dynamics(const TransitionKernel& k, const DegreeDistribution& rho, int m);

struct MeanFieldStep {
    Eigen::VectorXd x;
    bool out_of_range = false;  // some component left [0,1]; value not clamped
};

MeanFieldStep mean_field_step(const PolynomialDynamics& dyn, const Eigen::VectorXd& x);

Eigen::MatrixXd jacobian(const PolynomialDynamics& dyn, const Eigen::VectorXd& x);

struct MeanFieldTrajectory {
    std::vector<int> degrees;
    Eigen::MatrixXd x;  // (horizon+1) rows
    bool out_of_range = false;
};

MeanFieldTrajectory simulate_mean_field(const PolynomialDynamics& dyn, const Eigen::VectorXd& x0,
                                        int horizon);

struct AsymptoticState {
    Eigen::VectorXd x;
    bool converged = false;
    long iterations = 0;
};

AsymptoticState asymptotic_state(const PolynomialDynamics& dyn, const Eigen::VectorXd& x0,
                                 double tol = 1e-10, long max_iter = 500000);

// Dense tensor representation f(x) = A0 + A1 x + A2 x x' + ...; term k is
// stored flattened as a[k][row * dim^k + offset(j1..jk)]. Exists as a
// cross-check of the per-degree representation, not for production stepping.
struct DenseTensors {
    int dim = 0;
    int order = 0;                       // highest tensor order
    std::vector<std::vector<double>> a;  // a[k] has dim^(k+1) entries

    double evaluate_row(int row, const Eigen::VectorXd& x) const;
    Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;
};

// Errors when total storage would exceed `capacity` doubles.
DenseTensors dense_tensors(const PolynomialDynamics& dyn, std::size_t capacity = 100000000);

// Mean-field trajectory CSV with header "t,degree,xbar".
void save_mean_field_trajectory(const MeanFieldTrajectory& t, const std::string& path);
// Dynamics model JSON: rho, phi, lambda, c_inc, c_dec, m.
void save_dynamics_json(const PolynomialDynamics& dyn, const std::string& path);

}  // namespace difftrack
