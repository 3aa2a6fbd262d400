#include "difftrack/meanfield.hpp"

#include <cmath>
#include <stdexcept>

#include "difftrack/io_util.hpp"
#include "json.hpp"

namespace difftrack {

namespace {

// g(alpha) = sum_a c[a] alpha^a (1-alpha)^(l-a); c includes the binomial
// coefficient. All c are nonnegative, so direct accumulation is stable.
double bernstein_value(const std::vector<double>& c, double alpha) {
    int l = static_cast<int>(c.size()) - 1;
    double beta = 1.0 - alpha;
    double acc = 0.0;
    double ap = 1.0;
    std::vector<double> bp(l + 1);
    bp[l] = 1.0;
    for (int j = l - 1; j >= 0; --j) bp[j] = bp[j + 1] * beta;
    for (int a = 0; a <= l; ++a) {
        acc += c[a] * ap * bp[a];
        ap *= alpha;
    }
    return acc;
}

double bernstein_deriv(const std::vector<double>& c, double alpha) {
    int l = static_cast<int>(c.size()) - 1;
    double beta = 1.0 - alpha;
    double acc = 0.0;
    for (int a = 0; a <= l; ++a) {
        double term = 0.0;
        if (a > 0) term += a * std::pow(alpha, a - 1) * std::pow(beta, l - a);
        if (l - a > 0) term -= (l - a) * std::pow(alpha, a) * std::pow(beta, l - a - 1);
        acc += c[a] * term;
    }
    return acc;
}

// Expand sum_a c[a] s^a (1-s)^(l-a) into powers of s. Coefficients whose
// summands cancel to rounding noise are trimmed to exactly zero so flat rate
// rows collapse to constants.
std::vector<double> power_basis(const std::vector<double>& c) {
    int l = static_cast<int>(c.size()) - 1;
    std::vector<double> b(l + 1, 0.0), mag(l + 1, 0.0);
    std::vector<std::vector<double>> binom(l + 1, std::vector<double>(l + 1, 0.0));
    for (int i = 0; i <= l; ++i) {
        binom[i][0] = 1.0;
        for (int j = 1; j <= i; ++j)
            binom[i][j] = binom[i - 1][j - 1] + (j <= i - 1 ? binom[i - 1][j] : 0.0);
    }
    for (int a = 0; a <= l; ++a) {
        // (1-s)^(l-a) = sum_t C(l-a,t) (-s)^t
        for (int t = 0; t <= l - a; ++t) {
            double term = c[a] * binom[l - a][t] * ((t % 2) ? -1.0 : 1.0);
            b[a + t] += term;
            mag[a + t] += std::abs(term);
        }
    }
    for (int j = 0; j <= l; ++j)
        if (std::abs(b[j]) <= 1e-12 * mag[j]) b[j] = 0.0;
    return b;
}

int poly_degree(const std::vector<double>& b) {
    for (int j = static_cast<int>(b.size()) - 1; j >= 0; --j)
        if (b[j] != 0.0) return j;
    return 0;
}

}  // namespace

double PolynomialDynamics::g_inc(int i, double alpha) const { return bernstein_value(c_inc[i], alpha); }
double PolynomialDynamics::g_dec(int i, double alpha) const { return bernstein_value(c_dec[i], alpha); }
double PolynomialDynamics::g_inc_deriv(int i, double alpha) const { return bernstein_deriv(c_inc[i], alpha); }
double PolynomialDynamics::g_dec_deriv(int i, double alpha) const { return bernstein_deriv(c_dec[i], alpha); }

int PolynomialDynamics::total_degree() const {
    int deg = 1;
    for (int i = 0; i < dim(); ++i) {
        int dg = std::max(poly_degree(b_inc[i]), poly_degree(b_dec[i]));
        deg = std::max(deg, dg + 1);  // the x(l) factor adds one
    }
    return deg;
}

PolynomialDynamics build_dynamics(const TransitionKernel& k, const DegreeDistribution& rho, int m) {
    rho.validate();
    k.validate();
    if (m < 1) throw std::invalid_argument("dynamics: step divisor must be >= 1");
    if (rho.degrees.back() > k.max_degree())
        throw std::invalid_argument("dynamics: kernel does not cover degree " +
                                    std::to_string(rho.degrees.back()));
    PolynomialDynamics dyn;
    dyn.degrees = rho.degrees;
    dyn.lambda = k.lambda;
    dyn.m = m;
    dyn.rho.resize(rho.dim());
    for (int i = 0; i < rho.dim(); ++i) {
        if (rho.probs[i] <= 0.0)
            throw std::invalid_argument("dynamics: zero-probability degree " +
                                        std::to_string(rho.degrees[i]) +
                                        "; restrict to support first");
        dyn.rho[i] = rho.probs[i];
    }
    Eigen::VectorXd lw(rho.dim());
    for (int i = 0; i < rho.dim(); ++i) lw[i] = rho.degrees[i] * dyn.rho[i];
    dyn.phi = lw / lw.sum();

    std::vector<std::vector<double>> binom;
    int lmax = rho.degrees.back();
    binom.assign(lmax + 1, std::vector<double>(lmax + 1, 0.0));
    for (int i = 0; i <= lmax; ++i) {
        binom[i][0] = 1.0;
        for (int j = 1; j <= i; ++j)
            binom[i][j] = binom[i - 1][j - 1] + (j <= i - 1 ? binom[i - 1][j] : 0.0);
    }
    dyn.c_inc.resize(rho.dim());
    dyn.c_dec.resize(rho.dim());
    dyn.b_inc.resize(rho.dim());
    dyn.b_dec.resize(rho.dim());
    for (int i = 0; i < rho.dim(); ++i) {
        int l = rho.degrees[i];
        dyn.c_inc[i].resize(l + 1);
        dyn.c_dec[i].resize(l + 1);
        for (int a = 0; a <= l; ++a) {
            dyn.c_inc[i][a] = k.lambda * k.p21[l][a] * binom[l][a];
            dyn.c_dec[i][a] = k.lambda * k.p12[l][a] * binom[l][a];
        }
        dyn.b_inc[i] = power_basis(dyn.c_inc[i]);
        dyn.b_dec[i] = power_basis(dyn.c_dec[i]);
    }
    return dyn;
}

MeanFieldStep mean_field_step(const PolynomialDynamics& dyn, const Eigen::VectorXd& x) {
    if (x.size() != dyn.dim()) throw std::invalid_argument("mean-field step: size mismatch");
    double alpha = dyn.alpha_of(x);
    MeanFieldStep out;
    out.x.resize(dyn.dim());
    double inv_m = 1.0 / dyn.m;
    for (int i = 0; i < dyn.dim(); ++i) {
        double gi = dyn.g_inc(i, alpha);
        double gd = dyn.g_dec(i, alpha);
        out.x[i] = x[i] + inv_m * ((1.0 - x[i]) * gi - x[i] * gd);
        if (out.x[i] < 0.0 || out.x[i] > 1.0) out.out_of_range = true;
    }
    return out;
}

Eigen::MatrixXd jacobian(const PolynomialDynamics& dyn, const Eigen::VectorXd& x) {
    if (x.size() != dyn.dim()) throw std::invalid_argument("jacobian: size mismatch");
    double alpha = dyn.alpha_of(x);
    double inv_m = 1.0 / dyn.m;
    Eigen::MatrixXd j(dyn.dim(), dyn.dim());
    for (int i = 0; i < dyn.dim(); ++i) {
        double gi = dyn.g_inc(i, alpha);
        double gd = dyn.g_dec(i, alpha);
        double gid = dyn.g_inc_deriv(i, alpha);
        double gdd = dyn.g_dec_deriv(i, alpha);
        double through_alpha = inv_m * ((1.0 - x[i]) * gid - x[i] * gdd);
        for (int c = 0; c < dyn.dim(); ++c) j(i, c) = through_alpha * dyn.phi[c];
        j(i, i) += 1.0 - inv_m * (gi + gd);
    }
    return j;
}

MeanFieldTrajectory simulate_mean_field(const PolynomialDynamics& dyn, const Eigen::VectorXd& x0,
                                        int horizon) {
    if (horizon < 0) throw std::invalid_argument("mean-field simulate: negative horizon");
    MeanFieldTrajectory traj;
    traj.degrees = dyn.degrees;
    traj.x.resize(horizon + 1, dyn.dim());
    traj.x.row(0) = x0.transpose();
    Eigen::VectorXd x = x0;
    for (int t = 1; t <= horizon; ++t) {
        auto step = mean_field_step(dyn, x);
        x = step.x;
        traj.out_of_range = traj.out_of_range || step.out_of_range;
        traj.x.row(t) = x.transpose();
    }
    return traj;
}

AsymptoticState asymptotic_state(const PolynomialDynamics& dyn, const Eigen::VectorXd& x0,
                                 double tol, long max_iter) {
    AsymptoticState out;
    Eigen::VectorXd x = x0;
    for (long it = 0; it < max_iter; ++it) {
        auto step = mean_field_step(dyn, x);
        double delta = (step.x - x).lpNorm<Eigen::Infinity>();
        x = step.x;
        if (delta < tol) {
            out.converged = true;
            out.iterations = it + 1;
            break;
        }
    }
    if (!out.converged) out.iterations = max_iter;
    out.x = x;
    return out;
}

double DenseTensors::evaluate_row(int row, const Eigen::VectorXd& x) const {
    if (x.size() != dim) throw std::invalid_argument("tensors: size mismatch");
    double acc = 0.0;
    for (int k = 0; k < static_cast<int>(a.size()); ++k) {
        std::size_t block = 1;
        for (int t = 0; t < k; ++t) block *= dim;
        const double* base = a[k].data() + static_cast<std::size_t>(row) * block;
        for (std::size_t off = 0; off < block; ++off) {
            double prod = base[off];
            if (prod != 0.0) {
                std::size_t rem = off;
                for (int t = k - 1; t >= 0; --t) {
                    prod *= x[rem % dim];
                    rem /= dim;
                }
                acc += prod;
            }
        }
    }
    return acc;
}

Eigen::VectorXd DenseTensors::evaluate(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(dim);
    for (int r = 0; r < dim; ++r) out[r] = evaluate_row(r, x);
    return out;
}

DenseTensors dense_tensors(const PolynomialDynamics& dyn, std::size_t capacity) {
    DenseTensors t;
    t.dim = dyn.dim();
    t.order = dyn.total_degree();
    std::size_t total = 0;
    std::vector<std::size_t> sizes(t.order + 1);
    const std::size_t dim_sz = static_cast<std::size_t>(t.dim);
    for (int k = 0; k <= t.order; ++k) {
        std::size_t sz = dim_sz;
        for (int i = 0; i < k; ++i) {
            if (sz > capacity / dim_sz)
                throw std::length_error("tensors: dense storage for order " + std::to_string(k) +
                                        " exceeds capacity " + std::to_string(capacity));
            sz *= dim_sz;
        }
        sizes[k] = sz;
        total += sz;
        if (total > capacity)
            throw std::length_error("tensors: dense storage needs " + std::to_string(total) +
                                    " doubles, capacity " + std::to_string(capacity));
    }
    t.a.resize(t.order + 1);
    for (int k = 0; k <= t.order; ++k) t.a[k].assign(sizes[k], 0.0);

    double inv_m = 1.0 / dyn.m;
    int d = t.dim;
    // scatter coef * phi(m1)...phi(mj) over all j-tuples, with an optional
    // leading x_i factor
    auto scatter = [&](int row, bool with_xi, int j, double coef) {
        if (coef == 0.0) return;
        int k = j + (with_xi ? 1 : 0);
        std::vector<int> idx(j, 0);
        while (true) {
            double w = coef;
            std::size_t off = 0;
            if (with_xi) off = row;  // first index is the x_i factor
            for (int tpos = 0; tpos < j; ++tpos) {
                w *= dyn.phi[idx[tpos]];
                off = off * d + idx[tpos];
            }
            t.a[k][static_cast<std::size_t>(row) * (sizes[k] / d) + off] += w;
            int tpos = j - 1;
            while (tpos >= 0 && ++idx[tpos] == d) idx[tpos--] = 0;
            if (tpos < 0) break;
        }
    };
    for (int i = 0; i < d; ++i) {
        scatter(i, true, 0, 1.0);  // identity part
        for (int j = 0; j < static_cast<int>(dyn.b_inc[i].size()); ++j)
            scatter(i, false, j, inv_m * dyn.b_inc[i][j]);
        for (int j = 0; j < static_cast<int>(dyn.b_inc[i].size()); ++j) {
            double w = dyn.b_inc[i][j] + dyn.b_dec[i][j];
            scatter(i, true, j, -inv_m * w);
        }
    }
    return t;
}

void save_mean_field_trajectory(const MeanFieldTrajectory& t, const std::string& path) {
    std::string out = "t,degree,xbar\n";
    for (int row = 0; row < t.x.rows(); ++row)
        for (std::size_t i = 0; i < t.degrees.size(); ++i)
            out += std::to_string(row) + "," + std::to_string(t.degrees[i]) + "," +
                   format_double(t.x(row, i)) + "\n";
    write_file_atomic(path, out);
}

void save_dynamics_json(const PolynomialDynamics& dyn, const std::string& path) {
    nlohmann::json j;
    j["degrees"] = dyn.degrees;
    j["rho"] = std::vector<double>(dyn.rho.data(), dyn.rho.data() + dyn.dim());
    j["phi"] = std::vector<double>(dyn.phi.data(), dyn.phi.data() + dyn.dim());
    j["lambda"] = dyn.lambda;
    j["m"] = dyn.m;
    j["c_inc"] = dyn.c_inc;
    j["c_dec"] = dyn.c_dec;
    write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace difftrack
