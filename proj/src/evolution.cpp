#include "difftrack/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "difftrack/meanfield.hpp"

namespace difftrack {

namespace {

void check_growth_args(double p, int k, int size) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("evolution: attachment probability must lie in [0, 1]");
    }
    if (k < 1) throw std::invalid_argument("evolution: clock index must be >= 1");
    if (size < 1) throw std::invalid_argument("evolution: size must be >= 1");
    if (size >= 2 && (2.0 - p) * (size - 1) / (2.0 * k) > 1.0) {
        std::ostringstream err;
        err << "evolution: growth step (2-p)d/(2k) exceeds 1 at degree " << size - 1
            << " for k = " << k << "; raise k or shrink size";
        throw std::invalid_argument(err.str());
    }
}

}  // namespace

Eigen::MatrixXd evolution_matrix(double p, int k, int size) {
    check_growth_args(p, k, size);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(size, size);
    for (int d = 1; d < size; ++d) {
        const double c = (2.0 - p) * d / (2.0 * k);
        h(d - 1, d - 1) = 1.0 - c;
        h(d - 1, d) = c;
    }
    h(size - 1, size - 1) = 1.0;
    return h;
}

EvolutionPath evolve_distribution(const Eigen::VectorXd& rho0, double p, int k_start, int k_end) {
    const int size = static_cast<int>(rho0.size());
    if (k_end < k_start) throw std::invalid_argument("evolution: k_end < k_start");
    check_growth_args(p, k_start, size);  // the smallest clock is the binding one
    if (rho0.minCoeff() < 0.0 || std::abs(rho0.sum() - 1.0) > 1e-9) {
        throw std::invalid_argument("evolution: rho0 is not a probability vector");
    }

    const int steps = k_end - k_start + 1;
    EvolutionPath path;
    path.degrees.resize(size);
    for (int i = 0; i < size; ++i) path.degrees[i] = i + 1;
    path.rho.resize(steps + 1, size);
    path.rho.row(0) = rho0.transpose();

    Eigen::VectorXd cur = rho0;
    Eigen::VectorXd next(size);
    for (int j = 0; j < steps; ++j) {
        const int k = k_start + j;
        for (int i = size - 1; i >= 0; --i) {
            const int d = i + 1;
            const double keep = (d < size) ? 1.0 - (2.0 - p) * d / (2.0 * k) : 1.0;
            double v = keep * cur(i);
            if (i > 0) v += (2.0 - p) * (d - 1) / (2.0 * k) * cur(i - 1);
            next(i) = v;
        }
        cur = next;
        path.rho.row(j + 1) = cur.transpose();
    }
    return path;
}

EvolutionPath evolve_distribution(const DegreeDistribution& rho0, double p, int k_start,
                                  int k_end) {
    rho0.validate();
    const int size = rho0.degrees.back();
    Eigen::VectorXd dense = Eigen::VectorXd::Zero(size);
    for (int i = 0; i < rho0.dim(); ++i) dense(rho0.degrees[i] - 1) = rho0.probs[i];
    return evolve_distribution(dense, p, k_start, k_end);
}

namespace {

DominanceResult prefix_dominates(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                 bool cumulative, double tol) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("dominance: vectors differ in length");
    }
    const int n = static_cast<int>(a.size());
    DominanceResult out;
    out.holds = true;
    double fa = 0.0, fb = 0.0;  // prefix sums
    double ga = 0.0, gb = 0.0;  // cumulative prefix sums
    for (int i = 0; i + 1 < n; ++i) {
        fa += a(i);
        fb += b(i);
        ga += fa;
        gb += fb;
        const double lhs = cumulative ? ga : fa;
        const double rhs = cumulative ? gb : fb;
        if (lhs > rhs + tol) {
            out.holds = false;
            out.first_violation = i;
            return out;
        }
    }
    return out;
}

}  // namespace

DominanceResult first_order_dominates(const Eigen::VectorXd& rho_a,
                                      const Eigen::VectorXd& rho_b) {
    return prefix_dominates(rho_a, rho_b, false, 0.0);
}

DominanceResult second_order_dominates(const Eigen::VectorXd& rho_a,
                                       const Eigen::VectorXd& rho_b) {
    return prefix_dominates(rho_a, rho_b, true, 0.0);
}

DominanceResult rowwise_dominates(const Eigen::MatrixXd& h_a, const Eigen::MatrixXd& h_b) {
    if (h_a.rows() != h_b.rows() || h_a.cols() != h_b.cols()) {
        throw std::invalid_argument("rowwise_dominates: shape mismatch");
    }
    const double tol = 16.0 * std::numeric_limits<double>::epsilon();
    DominanceResult out;
    out.holds = true;
    for (int r = 0; r < h_a.rows(); ++r) {
        DominanceResult row = prefix_dominates(h_a.row(r).transpose(), h_b.row(r).transpose(),
                                               false, tol);
        if (!row.holds) {
            out.holds = false;
            out.first_violation = r;
            return out;
        }
    }
    return out;
}

ThresholdResult diffusion_threshold_closed_form(const DegreeDistribution& rho,
                                                const TransitionKernel& kernel) {
    rho.validate();
    if (kernel.max_degree() < rho.degrees.back()) {
        throw std::invalid_argument("threshold: kernel does not cover the degree labels");
    }
    double num = 0.0, den = 0.0;
    for (int i = 0; i < rho.dim(); ++i) {
        const int l = rho.degrees[i];
        num += l * rho.probs[i];
        den += static_cast<double>(l) * l * rho.probs[i] * kernel.p21[l][1];
    }
    ThresholdResult out;
    if (den <= 0.0) {
        out.infinite = true;
        out.lambda_star = std::numeric_limits<double>::infinity();
        out.note = "no transmission at single-contact exposure";
        return out;
    }
    out.lambda_star = num / den;
    return out;
}

ThresholdResult diffusion_threshold_empirical(const DegreeDistribution& rho,
                                              const TransitionKernel& kernel,
                                              const Eigen::VectorXd& x0_small,
                                              const EmpiricalThresholdConfig& cfg) {
    const DegreeDistribution support = rho.restricted_to_support();
    if (x0_small.size() != support.dim()) {
        throw std::invalid_argument("threshold: x0 dimension does not match the support");
    }
    if (x0_small.minCoeff() <= 0.0 || x0_small.maxCoeff() > 0.05) {
        throw std::invalid_argument("threshold: x0 must be entrywise in (0, 0.05]");
    }
    if (cfg.m < 1 || cfg.theta_pos <= 0.0 || cfg.rel_tol <= 0.0) {
        throw std::invalid_argument("threshold: invalid bisection configuration");
    }

    double max_inc = 0.0;
    for (int l : support.degrees) {
        for (double v : kernel.p21[l]) max_inc = std::max(max_inc, v);
    }
    ThresholdResult out;
    if (max_inc <= 0.0) {
        out.infinite = true;
        out.lambda_star = std::numeric_limits<double>::infinity();
        out.note = "kernel has no infection transitions";
        return out;
    }

    const PolynomialDynamics base = build_dynamics(kernel.with_lambda(1.0), support, cfg.m);
    auto endemic = [&](double lam) {
        PolynomialDynamics dyn = base;
        dyn.lambda = lam;
        for (auto& row : dyn.c_inc) {
            for (double& v : row) v *= lam;
        }
        for (auto& row : dyn.b_inc) {
            for (double& v : row) v *= lam;
        }
        AsymptoticState a = asymptotic_state(dyn, x0_small);
        return a.x.lpNorm<Eigen::Infinity>() > cfg.theta_pos;
    };

    double hi = cfg.lambda_max > 0.0 ? cfg.lambda_max : cfg.m / max_inc;
    if (!endemic(hi)) {
        out.infinite = true;
        out.lambda_star = std::numeric_limits<double>::infinity();
        out.note = "no endemic state up to the bracket top " + std::to_string(hi);
        return out;
    }
    double lo = 0.0;
    while (hi - lo > cfg.rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (endemic(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    out.lambda_star = 0.5 * (lo + hi);
    return out;
}

namespace {

double q_curve(const DegreeDistribution& rho, const TransitionKernel& kernel, double alpha) {
    double acc = 0.0;
    double mean_degree = 0.0;
    for (int i = 0; i < rho.dim(); ++i) {
        const int l = rho.degrees[i];
        double g = 0.0;
        double binom = 1.0;  // C(l, a), updated incrementally
        for (int a = 0; a <= l; ++a) {
            g += kernel.p21[l][a] * binom * std::pow(alpha, a) * std::pow(1.0 - alpha, l - a);
            binom = binom * (l - a) / (a + 1);
        }
        g *= kernel.lambda;
        acc += l * rho.probs[i] * g / (1.0 + g);
        mean_degree += l * rho.probs[i];
    }
    return acc / mean_degree;
}

}  // namespace

double q_slope_at_zero(const DegreeDistribution& rho, const TransitionKernel& kernel, double h) {
    rho.validate();
    if (kernel.max_degree() < rho.degrees.back()) {
        throw std::invalid_argument("q_slope_at_zero: kernel does not cover the degree labels");
    }
    if (!(h > 0.0)) throw std::invalid_argument("q_slope_at_zero: step must be positive");
    auto central = [&](double step) {
        return (q_curve(rho, kernel, step) - q_curve(rho, kernel, -step)) / (2.0 * step);
    };
    const double d1 = central(h);
    const double d2 = central(0.5 * h);
    return (4.0 * d2 - d1) / 3.0;
}

}  // namespace difftrack
