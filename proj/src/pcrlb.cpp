#include "difftrack/pcrlb.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "difftrack/io_util.hpp"
#include "difftrack/rng.hpp"

namespace difftrack {

namespace {

void check_config(const PolynomialDynamics& dyn, const PcrlbConfig& cfg) {
    const int n = dyn.dim();
    if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("pcrlb: epsilon must be positive");
    if (cfg.n_trajectories < 1) throw std::invalid_argument("pcrlb: need >= 1 trajectory");
    if (cfg.horizon < 1) throw std::invalid_argument("pcrlb: horizon must be >= 1");
    if (cfg.c.cols() != n || cfg.r.rows() != cfg.c.rows() || cfg.r.cols() != cfg.c.rows()) {
        throw std::invalid_argument("pcrlb: observation matrices have inconsistent shapes");
    }
    if (cfg.x0_mean.size() != n || cfg.x0_cov.rows() != n || cfg.x0_cov.cols() != n) {
        throw std::invalid_argument("pcrlb: initial state moments have the wrong dimension");
    }
}

Eigen::MatrixXd sqrt_factor(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    const Eigen::MatrixXd jittered =
        cov + 1e-15 * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
    Eigen::LLT<Eigen::MatrixXd> retry(jittered);
    if (retry.info() != Eigen::Success) {
        throw std::runtime_error("pcrlb: initial covariance is not positive semidefinite");
    }
    return retry.matrixL();
}

// trajectories[s] holds rows 0..horizon of one perturbed state path.
std::vector<Eigen::MatrixXd> simulate_perturbed(const PolynomialDynamics& dyn,
                                                const PcrlbConfig& cfg, Rng& rng) {
    const int n = dyn.dim();
    const Eigen::MatrixXd l0 = sqrt_factor(cfg.x0_cov);
    const double sd = std::sqrt(cfg.epsilon);
    std::vector<Eigen::MatrixXd> trajectories(cfg.n_trajectories);
    Eigen::VectorXd z(n);
    for (int s = 0; s < cfg.n_trajectories; ++s) {
        Eigen::MatrixXd& x = trajectories[s];
        x.resize(cfg.horizon + 1, n);
        for (int i = 0; i < n; ++i) z(i) = normal(rng);
        x.row(0) = (cfg.x0_mean + l0 * z).transpose();
        for (int t = 0; t < cfg.horizon; ++t) {
            Eigen::VectorXd next = mean_field_step(dyn, x.row(t).transpose()).x;
            for (int i = 0; i < n; ++i) next(i) += sd * normal(rng);
            x.row(t + 1) = next.transpose();
        }
    }
    return trajectories;
}

FisherSequence fisher_recursion(const PolynomialDynamics& dyn, const PcrlbConfig& cfg,
                                const Eigen::MatrixXd& j0,
                                const std::vector<Eigen::MatrixXd>& trajectories) {
    const int n = dyn.dim();
    const double inv_eps = 1.0 / cfg.epsilon;
    const Eigen::MatrixXd rinv_c = cfg.r.llt().solve(cfg.c);
    const Eigen::MatrixXd d22 =
        inv_eps * Eigen::MatrixXd::Identity(n, n) + cfg.c.transpose() * rinv_c;

    FisherSequence seq;
    seq.j.reserve(cfg.horizon + 1);
    seq.trace_bound.reserve(cfg.horizon + 1);
    Eigen::MatrixXd j = ((j0 + j0.transpose()) * 0.5).eval();

    auto record = [&](const Eigen::MatrixXd& jn, int step) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jn);
        if (eig.eigenvalues().minCoeff() <= 0.0) {
            std::ostringstream err;
            err << "pcrlb: information matrix lost positive definiteness at step " << step
                << " (min eigenvalue " << eig.eigenvalues().minCoeff() << ")";
            throw std::runtime_error(err.str());
        }
        seq.j.push_back(jn);
        seq.trace_bound.push_back(eig.eigenvalues().cwiseInverse().sum());
    };
    record(j, 0);

    for (int t = 0; t < cfg.horizon; ++t) {
        Eigen::MatrixXd ftf = Eigen::MatrixXd::Zero(n, n);
        Eigen::MatrixXd ft = Eigen::MatrixXd::Zero(n, n);
        for (const Eigen::MatrixXd& x : trajectories) {
            const Eigen::MatrixXd f = jacobian(dyn, x.row(t).transpose());
            ftf += f.transpose() * f;
            ft += f.transpose();
        }
        const double w = inv_eps / trajectories.size();
        const Eigen::MatrixXd d11 = w * ftf;
        const Eigen::MatrixXd d12 = -w * ft;

        const Eigen::MatrixXd inner = j + d11;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(inner);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
            std::ostringstream err;
            err << "pcrlb: J + D11 is singular at step " << t;
            throw std::runtime_error(err.str());
        }
        j = d22 - d12.transpose() * ldlt.solve(d12);
        j = ((j + j.transpose()) * 0.5).eval();
        record(j, t + 1);
    }
    return seq;
}

}  // namespace

FisherSequence pcrlb_run(const PolynomialDynamics& dyn, const PcrlbConfig& cfg,
                         const Eigen::MatrixXd& j0, std::uint64_t seed) {
    check_config(dyn, cfg);
    if (j0.rows() != dyn.dim() || j0.cols() != dyn.dim()) {
        throw std::invalid_argument("pcrlb: j0 has the wrong dimension");
    }
    Rng rng(seed);
    const std::vector<Eigen::MatrixXd> trajectories = simulate_perturbed(dyn, cfg, rng);
    return fisher_recursion(dyn, cfg, j0, trajectories);
}

MseBoundReport mse_vs_bound_report(const PolynomialDynamics& dyn, const PcrlbConfig& cfg,
                                   const FilterState& init, std::uint64_t seed) {
    check_config(dyn, cfg);
    if (init.xhat.size() != dyn.dim()) {
        throw std::invalid_argument("pcrlb: filter init has the wrong dimension");
    }
    PcrlbConfig run = cfg;
    run.x0_mean = init.xhat;
    run.x0_cov = init.cov;

    Rng rng(seed);
    const std::vector<Eigen::MatrixXd> trajectories = simulate_perturbed(dyn, run, rng);
    const Eigen::MatrixXd j0 = init.cov.llt().solve(
        Eigen::MatrixXd::Identity(dyn.dim(), dyn.dim()));
    const FisherSequence seq = fisher_recursion(dyn, run, j0, trajectories);

    const int n = dyn.dim();
    const int p = static_cast<int>(run.c.rows());
    const Eigen::MatrixXd lr = sqrt_factor(run.r);
    const Eigen::MatrixXd q = run.epsilon * Eigen::MatrixXd::Identity(n, n);
    std::vector<int> degrees = dyn.degrees;

    Eigen::MatrixXd sq_err = Eigen::MatrixXd::Zero(run.horizon + 1, run.n_trajectories);
    Eigen::VectorXd noise(p);
    for (int s = 0; s < run.n_trajectories; ++s) {
        const Eigen::MatrixXd& x = trajectories[s];
        FilterState cur = init;
        sq_err(0, s) = (cur.xhat - x.row(0).transpose()).squaredNorm();
        for (int t = 0; t < run.horizon; ++t) {
            for (int i = 0; i < p; ++i) noise(i) = normal(rng);
            Observation obs;
            obs.y = run.c * x.row(t + 1).transpose() + lr * noise;
            obs.c = run.c;
            obs.r = run.r;
            obs.degrees = degrees;
            cur = update(predict(dyn, cur, &q), obs);
            sq_err(t + 1, s) = (cur.xhat - x.row(t + 1).transpose()).squaredNorm();
        }
    }

    MseBoundReport report;
    report.trace_bound = seq.trace_bound;
    report.trace_mse.resize(run.horizon + 1);
    report.mse_se.resize(run.horizon + 1);
    const double root_s = std::sqrt(static_cast<double>(run.n_trajectories));
    for (int t = 0; t <= run.horizon; ++t) {
        const double mean = sq_err.row(t).mean();
        report.trace_mse[t] = mean;
        if (run.n_trajectories > 1) {
            const double var = (sq_err.row(t).array() - mean).square().sum() /
                               (run.n_trajectories - 1);
            report.mse_se[t] = std::sqrt(var) / root_s;
        }
    }
    return report;
}

void save_pcrlb_report(const MseBoundReport& report, const std::string& network_label,
                       const std::string& path) {
    std::string out = "n,trace_bound,trace_mse,network_label\n";
    for (std::size_t t = 0; t < report.trace_bound.size(); ++t) {
        out += std::to_string(t);
        out += ',';
        out += format_double(report.trace_bound[t]);
        out += ',';
        out += t < report.trace_mse.size() ? format_double(report.trace_mse[t]) : "";
        out += ',';
        out += network_label;
        out += '\n';
    }
    write_file_atomic(path, out);
}

}  // namespace difftrack
