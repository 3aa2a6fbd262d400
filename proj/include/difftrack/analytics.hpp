#pragma once

// Statistical evaluation utilities: two-sample Kolmogorov-Smirnov test,
// discrete power-law maximum likelihood with a likelihood-ratio comparison
// against a discrete exponential, trajectory deviation tables, and the
// moving-average / least-squares VAR baseline estimators.

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace difftrack {

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Survival function of the Kolmogorov distribution, 2 sum (-1)^(k-1) e^(-2 k^2 x^2).
double kolmogorov_q(double x);

// Sup-distance between empirical CDFs with the asymptotic p-value at the
// two-sample effective size nm/(n+m).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
KsResult ks_two_sample(const std::vector<int>& a, const std::vector<int>& b);

struct FitReport {
    double exponent = 0.0;            // fitted power-law exponent, positive convention
    double llr_vs_exponential = 0.0;  // positive favors the power law
    double ks_statistic = 0.0;        // empirical CDF vs fitted power-law CDF
    double p_value = 0.0;
    long n = 0;
    int l_min = 1;
    bool small_sample = false;  // n < 50
};

// Discrete power-law MLE on values >= l_min: P(l) proportional to l^(-gamma),
// normalized by the Hurwitz zeta at integer l_min. The exponent maximizes
// the zeta likelihood by golden-section search.
FitReport fit_power_law_discrete(const std::vector<int>& values, int l_min = 1);

void save_fit_report(const FitReport& report, const std::string& path);

struct DeviationRow {
    std::string label;  // "1", "2", "3+"
    double avg_sq = 0.0;
    double avg_abs = 0.0;
    double max_abs = 0.0;
};

// Per-degree deviation summary between two aligned trajectories (rows =
// time, columns = degree classes). Degrees >= 3 aggregate into one row
// weighted by class node counts.
std::vector<DeviationRow> deviation_table(const Eigen::MatrixXd& model,
                                          const Eigen::MatrixXd& data,
                                          const std::vector<int>& degrees,
                                          const std::vector<long>& class_counts);

// CSV with header "degree,avg_sq,avg_abs,max_abs".
void save_deviation_table(const std::vector<DeviationRow>& rows, const std::string& path);

// Causal moving average over the trailing `window` rows.
Eigen::MatrixXd moving_average_filter(const Eigen::MatrixXd& observations, int window);

struct VarFit {
    std::vector<Eigen::MatrixXd> coef;  // coef[j]: lag j+1 coefficient matrix
    Eigen::VectorXd intercept;
    Eigen::MatrixXd estimates;  // one-step predictions; first `order` rows copy the data
};

// VAR(order) fit by least squares over the whole series, then one-step
// predictions. Errors when the series is too short for the regression.
VarFit var_ls_filter(const Eigen::MatrixXd& observations, int order);

}  // namespace difftrack
