#include "difftrack/filter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "difftrack/evolution.hpp"
#include "difftrack/io_util.hpp"
#include "difftrack/rng.hpp"

namespace difftrack {

namespace {

// E[u^p v^q s^r] for jointly Gaussian (u, v, s), p, q <= 2, r <= rmax,
// by Stein's lemma applied to the first variable with a nonzero exponent.
class MomentTable {
public:
    MomentTable(const Eigen::Vector3d& mu, const Eigen::Matrix3d& sigma, int rmax)
        : rr_(rmax + 1), m_(3 * 3 * rr_, 0.0) {
        for (int p = 0; p < 3; ++p) {
            for (int q = 0; q < 3; ++q) {
                for (int r = 0; r < rr_; ++r) {
                    double v = 0.0;
                    if (p == 0 && q == 0 && r == 0) {
                        v = 1.0;
                    } else if (p > 0) {
                        v = mu(0) * at(p - 1, q, r);
                        if (p >= 2) v += (p - 1) * sigma(0, 0) * at(p - 2, q, r);
                        if (q >= 1) v += q * sigma(0, 1) * at(p - 1, q - 1, r);
                        if (r >= 1) v += r * sigma(0, 2) * at(p - 1, q, r - 1);
                    } else if (q > 0) {
                        v = mu(1) * at(0, q - 1, r);
                        if (q >= 2) v += (q - 1) * sigma(1, 1) * at(0, q - 2, r);
                        if (r >= 1) v += r * sigma(1, 2) * at(0, q - 1, r - 1);
                    } else {
                        v = mu(2) * at(0, 0, r - 1);
                        if (r >= 2) v += (r - 1) * sigma(2, 2) * at(0, 0, r - 2);
                    }
                    at(p, q, r) = v;
                }
            }
        }
    }

    double operator()(int p, int q, int r) const { return m_[(p * 3 + q) * rr_ + r]; }

private:
    double& at(int p, int q, int r) { return m_[(p * 3 + q) * rr_ + r]; }

    int rr_;
    std::vector<double> m_;
};

struct Term {
    int d = 0;
    int j = 0;
    double c = 0.0;
};

std::vector<Term> row_terms(const PolyRow& row) {
    std::vector<Term> terms;
    for (int d = 0; d < row.coef.rows(); ++d) {
        for (int j = 0; j < row.coef.cols(); ++j) {
            if (row.coef(d, j) != 0.0) terms.push_back({d, j, row.coef(d, j)});
        }
    }
    return terms;
}

int row_degree(const std::vector<Term>& terms) {
    int deg = 0;
    for (const Term& t : terms) deg = std::max(deg, t.d + t.j);
    return deg;
}

}  // namespace

MomentResult gaussian_poly_moments(const std::vector<PolyRow>& rows, const Eigen::VectorXd& w,
                                   const GaussianBelief& belief, int max_total_degree) {
    const int n = static_cast<int>(rows.size());
    if (n == 0) throw std::invalid_argument("gaussian_poly_moments: no rows");
    if (belief.mean.size() != w.size() || belief.cov.rows() != w.size() ||
        belief.cov.cols() != w.size()) {
        throw std::invalid_argument("gaussian_poly_moments: belief/w dimension mismatch");
    }

    std::vector<std::vector<Term>> terms(n);
    for (int i = 0; i < n; ++i) {
        const PolyRow& row = rows[i];
        if (row.index < 0 || row.index >= w.size()) {
            throw std::invalid_argument("gaussian_poly_moments: row index out of range");
        }
        if (row.coef.rows() != 2) {
            throw std::invalid_argument("gaussian_poly_moments: coef must have two rows");
        }
        terms[i] = row_terms(row);
        const int deg = row_degree(terms[i]);
        if (deg > max_total_degree) {
            std::ostringstream err;
            err << "gaussian_poly_moments: row " << i << " has total degree " << deg
                << ", above the supported maximum " << max_total_degree;
            throw std::length_error(err.str());
        }
    }

    const Eigen::VectorXd cw = belief.cov * w;  // Cov(x, s)
    const double s_mean = w.dot(belief.mean);
    const double s_var = w.dot(cw);

    Eigen::VectorXd mean(n);
    Eigen::MatrixXd second(n, n);
    for (int i = 0; i < n; ++i) {
        const int ui = rows[i].index;
        for (int k = i; k < n; ++k) {
            const int uk = rows[k].index;
            int rmax = 0;
            for (const Term& t : terms[i]) rmax = std::max(rmax, t.j);
            int rk = 0;
            for (const Term& t : terms[k]) rk = std::max(rk, t.j);
            rmax += rk;

            Eigen::Vector3d mu;
            Eigen::Matrix3d sig;
            mu << belief.mean(ui), belief.mean(uk), s_mean;
            sig << belief.cov(ui, ui), belief.cov(ui, uk), cw(ui), belief.cov(ui, uk),
                belief.cov(uk, uk), cw(uk), cw(ui), cw(uk), s_var;
            const bool same = (ui == uk);
            MomentTable table(mu, sig, rmax);

            double acc = 0.0;
            for (const Term& a : terms[i]) {
                for (const Term& b : terms[k]) {
                    const double coef = a.c * b.c;
                    acc += same ? coef * table(a.d + b.d, 0, a.j + b.j)
                               : coef * table(a.d, b.d, a.j + b.j);
                }
            }
            second(i, k) = acc;
            second(k, i) = acc;

            if (k == i) {
                double m1 = 0.0;
                for (const Term& a : terms[i]) m1 += a.c * table(a.d, 0, a.j);
                mean(i) = m1;
            }
        }
    }

    MomentResult out;
    out.mean = mean;
    out.cov = second - mean * mean.transpose();
    out.cov = ((out.cov + out.cov.transpose()) * 0.5).eval();
    return out;
}

std::vector<PolyRow> dynamics_rows(const PolynomialDynamics& dyn) {
    std::vector<PolyRow> rows(dyn.dim());
    const double inv_m = 1.0 / dyn.m;
    for (int i = 0; i < dyn.dim(); ++i) {
        const auto& bi = dyn.b_inc[i];
        const auto& bd = dyn.b_dec[i];
        const int deg = static_cast<int>(bi.size()) - 1;
        PolyRow row;
        row.index = i;
        row.coef = Eigen::MatrixXd::Zero(2, deg + 1);
        row.coef(1, 0) = 1.0;
        for (int j = 0; j <= deg; ++j) {
            row.coef(0, j) += inv_m * bi[j];
            row.coef(1, j) -= inv_m * (bi[j] + bd[j]);
        }
        rows[i] = std::move(row);
    }
    return rows;
}

MomentResult gaussian_poly_moments(const PolynomialDynamics& dyn, const GaussianBelief& belief,
                                   int max_total_degree) {
    return gaussian_poly_moments(dynamics_rows(dyn), dyn.phi, belief, max_total_degree);
}

FilterState predict(const PolynomialDynamics& dyn, const FilterState& prior,
                    const Eigen::MatrixXd* process_noise) {
    if (prior.xhat.size() != dyn.dim()) {
        throw std::invalid_argument("predict: state dimension mismatch");
    }
    MomentResult mr = gaussian_poly_moments(dyn, {prior.xhat, prior.cov});
    FilterState out;
    out.xhat = std::move(mr.mean);
    out.cov = std::move(mr.cov);
    if (process_noise != nullptr) {
        if (process_noise->rows() != dyn.dim() || process_noise->cols() != dyn.dim()) {
            throw std::invalid_argument("predict: process noise dimension mismatch");
        }
        out.cov += *process_noise;
        out.cov = ((out.cov + out.cov.transpose()) * 0.5).eval();
    }
    return out;
}

FilterState update(const FilterState& prior, const Observation& obs) {
    const int n = static_cast<int>(prior.xhat.size());
    const int p = static_cast<int>(obs.y.size());
    if (obs.c.rows() != p || obs.c.cols() != n || obs.r.rows() != p || obs.r.cols() != p) {
        throw std::invalid_argument("update: observation dimension mismatch");
    }
    if (p == 0) return prior;  // nothing observed this step

    const Eigen::MatrixXd ch = obs.c * prior.cov;                        // C H
    const Eigen::MatrixXd s = ch * obs.c.transpose() + obs.r;            // innovation covariance
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        ((s + s.transpose()) * 0.5).eval());
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e12) {
        std::ostringstream err;
        err << "update: innovation covariance is numerically singular (min eigenvalue " << lo
            << ", condition " << (lo > 0.0 ? hi / lo : std::nan("")) << ")";
        throw std::runtime_error(err.str());
    }

    const Eigen::MatrixXd k = s.llt().solve(ch).transpose();  // H C' S^-1
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - k * obs.c;

    FilterState out;
    out.xhat = prior.xhat + k * (obs.y - obs.c * prior.xhat);
    out.cov = a * prior.cov * a.transpose() + k * obs.r * k.transpose();
    out.cov = ((out.cov + out.cov.transpose()) * 0.5).eval();
    return out;
}

TrackResult track(const PolynomialDynamics& dyn, const std::vector<Observation>& observations,
                  const FilterState& init, const Eigen::MatrixXd* truth,
                  const Eigen::MatrixXd* process_noise) {
    const int horizon = static_cast<int>(observations.size());
    if (truth != nullptr &&
        (truth->rows() < horizon + 1 || truth->cols() != init.xhat.size())) {
        throw std::invalid_argument("track: truth must have horizon+1 rows of state dimension");
    }

    TrackResult out;
    out.states.reserve(horizon + 1);
    out.states.push_back(init);
    if (truth != nullptr) {
        out.mse.reserve(horizon + 1);
        out.mse.push_back((init.xhat - truth->row(0).transpose()).squaredNorm());
    }
    FilterState cur = init;
    for (int t = 0; t < horizon; ++t) {
        cur = update(predict(dyn, cur, process_noise), observations[t]);
        out.states.push_back(cur);
        if (truth != nullptr) {
            out.mse.push_back((cur.xhat - truth->row(t + 1).transpose()).squaredNorm());
        }
    }
    return out;
}

void save_filter_log(const TrackResult& result, const std::vector<Observation>& observations,
                     const std::vector<int>& degrees, const Eigen::MatrixXd* truth,
                     const std::string& path) {
    const int dim = static_cast<int>(degrees.size());
    std::string out = "t,degree,xhat,h_ll,y,mse\n";
    for (std::size_t t = 0; t < result.states.size(); ++t) {
        const FilterState& fs = result.states[t];
        const Observation* obs =
            (t >= 1 && t <= observations.size()) ? &observations[t - 1] : nullptr;
        for (int i = 0; i < dim; ++i) {
            out += std::to_string(t);
            out += ',';
            out += std::to_string(degrees[i]);
            out += ',';
            out += format_double(fs.xhat(i));
            out += ',';
            out += format_double(fs.cov(i, i));
            out += ',';
            if (obs != nullptr) {
                for (std::size_t r = 0; r < obs->degrees.size(); ++r) {
                    if (obs->degrees[r] == degrees[i]) {
                        out += format_double(obs->y(static_cast<int>(r)));
                        break;
                    }
                }
            }
            out += ',';
            if (truth != nullptr && static_cast<Eigen::Index>(t) < truth->rows()) {
                const double e = fs.xhat(i) - (*truth)(static_cast<Eigen::Index>(t), i);
                out += format_double(e * e);
            }
            out += '\n';
        }
    }
    write_file_atomic(path, out);
}

Eigen::VectorXd hmm_update(const Eigen::VectorXd& belief, const Eigen::MatrixXd& transition,
                           const Eigen::VectorXd& likelihood) {
    const int n = static_cast<int>(belief.size());
    if (transition.rows() != n || transition.cols() != n || likelihood.size() != n) {
        throw std::invalid_argument("hmm_update: dimension mismatch");
    }
    Eigen::VectorXd post = likelihood.cwiseProduct(transition.transpose() * belief);
    const double z = post.sum();
    if (!(z > 0.0)) {
        throw std::runtime_error("hmm_update: posterior normalizer is zero");
    }
    return post / z;
}

namespace {

// Likelihood of observing mode z when the hidden mode is each degree
// 1..size: a Gaussian in the label distance, discretized over the labels.
Eigen::VectorXd mode_likelihood(int z, int size, double sigma) {
    Eigen::VectorXd lik(size);
    for (int i = 0; i < size; ++i) {
        const double d = (i + 1) - z;
        lik(i) = std::exp(-d * d / (2.0 * sigma * sigma));
    }
    return lik;
}

int argmax_label(const Eigen::VectorXd& v) {
    int best = 0;
    v.maxCoeff(&best);
    return best + 1;
}

}  // namespace

TwoTimescaleResult two_timescale_track(const TwoTimescaleConfig& cfg) {
    const int size = static_cast<int>(cfg.rho0.size());
    if (size < 2) throw std::invalid_argument("two_timescale_track: need at least two classes");
    if (!cfg.p_of_alpha) throw std::invalid_argument("two_timescale_track: p_of_alpha not set");
    if (cfg.slow_steps < 1) throw std::invalid_argument("two_timescale_track: slow_steps < 1");
    if (cfg.fast_x0.size() != size) {
        throw std::invalid_argument("two_timescale_track: fast_x0 dimension mismatch");
    }
    if (cfg.kernel.max_degree() < size) {
        throw std::invalid_argument("two_timescale_track: kernel does not cover the classes");
    }
    if (std::abs(cfg.rho0.sum() - 1.0) > 1e-9 || cfg.rho0.minCoeff() <= 0.0) {
        throw std::invalid_argument(
            "two_timescale_track: rho0 must be strictly positive and sum to 1");
    }

    std::vector<int> degrees(size);
    for (int i = 0; i < size; ++i) degrees[i] = i + 1;
    auto make_dyn = [&](const Eigen::VectorXd& rho) {
        DegreeDistribution dd;
        dd.degrees = degrees;
        dd.probs.assign(rho.data(), rho.data() + size);
        dd.absorbing_bucket = true;
        return build_dynamics(cfg.kernel, dd, cfg.fast_m);
    };
    auto clamp01 = [](double v) { return std::min(1.0, std::max(0.0, v)); };

    Rng rng(cfg.seed);
    const double r_diag = std::max(cfg.fast_r, kMinObservationVariance);
    const Eigen::MatrixXd c_full = Eigen::MatrixXd::Identity(size, size);
    const Eigen::MatrixXd r_full = r_diag * Eigen::MatrixXd::Identity(size, size);

    Eigen::VectorXd rho_true = cfg.rho0;
    Eigen::VectorXd rho_hat = cfg.rho0;
    Eigen::VectorXd belief = cfg.rho0;
    Eigen::VectorXd x_true = cfg.fast_x0;
    Eigen::VectorXd x_hat = cfg.fast_x0;
    auto link_prob = [&](const Eigen::VectorXd& rho, const Eigen::VectorXd& x) {
        double num = 0.0, den = 0.0;
        for (int i = 0; i < size; ++i) {
            num += degrees[i] * rho(i) * x(i);
            den += degrees[i] * rho(i);
        }
        return clamp01(num / den);
    };
    double alpha_true = link_prob(rho_true, x_true);
    double alpha_hat = link_prob(rho_hat, x_hat);

    TwoTimescaleResult result;
    result.records.reserve(cfg.slow_steps);
    int matches = 0;

    for (int k = 0; k < cfg.slow_steps; ++k) {
        const int clock = cfg.k_start + k;
        const double p_true = clamp01(cfg.p_of_alpha(alpha_true));
        const double p_hat = clamp01(cfg.p_of_alpha(alpha_hat));
        const Eigen::MatrixXd h_true = cfg.static_network
                                           ? Eigen::MatrixXd::Identity(size, size).eval()
                                           : evolution_matrix(p_true, clock, size);
        const Eigen::MatrixXd h_hat = cfg.static_network
                                          ? Eigen::MatrixXd::Identity(size, size).eval()
                                          : evolution_matrix(p_hat, clock, size);
        rho_true = (h_true.transpose() * rho_true).eval();
        rho_hat = (h_hat.transpose() * rho_hat).eval();

        // Fast scale: the true mean-field runs on the true distribution; the
        // filter runs its polynomial model on the estimated one, corrected by
        // noisy observations of the true trajectory.
        PolynomialDynamics dyn_true = make_dyn(rho_true);
        PolynomialDynamics dyn_hat = make_dyn(rho_hat);
        MeanFieldTrajectory traj = simulate_mean_field(dyn_true, x_true, cfg.fast_horizon);

        std::vector<Observation> obs(cfg.fast_horizon);
        for (int t = 0; t < cfg.fast_horizon; ++t) {
            Eigen::VectorXd y = traj.x.row(t + 1).transpose();
            if (cfg.fast_r > 0.0) {
                for (int i = 0; i < size; ++i) y(i) += normal(rng, 0.0, std::sqrt(cfg.fast_r));
            }
            obs[t].y = std::move(y);
            obs[t].c = c_full;
            obs[t].r = r_full;
            obs[t].degrees = degrees;
        }
        FilterState init{x_hat, cfg.init_cov * Eigen::MatrixXd::Identity(size, size)};
        TrackResult tr = track(dyn_hat, obs, init);

        x_true = traj.x.row(cfg.fast_horizon).transpose();
        x_hat = tr.states.back().xhat;

        const int true_mode = argmax_label(rho_true.cwiseProduct(x_true));
        const int mode_obs = argmax_label(rho_hat.cwiseProduct(x_hat));
        belief = hmm_update(belief, h_hat, mode_likelihood(mode_obs, size, cfg.sigma_z));
        const int belief_mode = argmax_label(belief);
        if (belief_mode == true_mode) ++matches;

        alpha_true = link_prob(rho_true, x_true);
        alpha_hat = link_prob(rho_hat, x_hat);

        TwoTimescaleRecord rec;
        rec.k = clock;
        rec.p = p_true;
        rec.true_mode = true_mode;
        rec.mode_obs = mode_obs;
        rec.belief_mode = belief_mode;
        rec.alpha_inf = alpha_true;
        rec.belief = belief;
        result.records.push_back(std::move(rec));
    }
    result.mode_match_rate = static_cast<double>(matches) / cfg.slow_steps;
    return result;
}

void save_hmm_log(const TwoTimescaleResult& result, const std::string& path) {
    std::string out = "k,state,prob,mode_obs\n";
    for (const TwoTimescaleRecord& rec : result.records) {
        for (int i = 0; i < rec.belief.size(); ++i) {
            out += std::to_string(rec.k);
            out += ',';
            out += std::to_string(i + 1);
            out += ',';
            out += format_double(rec.belief(i));
            out += ',';
            out += std::to_string(rec.mode_obs);
            out += '\n';
        }
    }
    write_file_atomic(path, out);
}

}  // namespace difftrack
