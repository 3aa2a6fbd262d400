#include "difftrack/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/zeta.hpp>
#include <nlohmann/json.hpp>

#include "difftrack/io_util.hpp"

namespace difftrack {

double kolmogorov_q(double x) {
    if (x < 1e-3) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += sign * term;
        if (term < 1e-12) break;
        sign = -sign;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("ks_two_sample: empty sample");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    const double ne = na * nb / (na + nb);
    const double root = std::sqrt(ne);
    KsResult out;
    out.statistic = d;
    out.p_value = kolmogorov_q((root + 0.12 + 0.11 / root) * d);
    return out;
}

KsResult ks_two_sample(const std::vector<int>& a, const std::vector<int>& b) {
    return ks_two_sample(std::vector<double>(a.begin(), a.end()),
                         std::vector<double>(b.begin(), b.end()));
}

namespace {

// Hurwitz zeta at integer shift: zeta(s, q) = zeta(s) - sum_{k<q} k^-s.
double hurwitz_zeta_int(double s, int q) {
    double z = boost::math::zeta(s);
    for (int k = 1; k < q; ++k) z -= std::pow(static_cast<double>(k), -s);
    return z;
}

double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                          double tol) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - r * (hi - lo);
    double x2 = lo + r * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

FitReport fit_power_law_discrete(const std::vector<int>& values, int l_min) {
    if (l_min < 1) throw std::invalid_argument("fit_power_law_discrete: l_min must be >= 1");
    if (values.empty()) throw std::invalid_argument("fit_power_law_discrete: empty sample");
    double log_sum = 0.0;
    double shifted_sum = 0.0;
    int max_value = l_min;
    for (int v : values) {
        if (v < l_min) {
            throw std::invalid_argument("fit_power_law_discrete: value below l_min");
        }
        log_sum += std::log(static_cast<double>(v));
        shifted_sum += v - l_min;
        max_value = std::max(max_value, v);
    }
    const double n = static_cast<double>(values.size());

    auto neg_loglik = [&](double gamma) {
        return gamma * log_sum + n * std::log(hurwitz_zeta_int(gamma, l_min));
    };
    const double gamma_hat = golden_section_min(neg_loglik, 1.05, 12.0, 1e-8);
    const double ll_pl = -neg_loglik(gamma_hat);

    // Discrete exponential on the same support; its rate MLE is closed form.
    double ll_exp = ll_pl;  // degenerate all-at-l_min sample: call the models tied
    const double mean_shift = shifted_sum / n;
    if (mean_shift > 0.0) {
        const double beta = std::log1p(1.0 / mean_shift);
        ll_exp = n * std::log(1.0 - std::exp(-beta)) - beta * shifted_sum;
    }

    FitReport report;
    report.exponent = gamma_hat;
    report.llr_vs_exponential = ll_pl - ll_exp;
    report.n = static_cast<long>(values.size());
    report.l_min = l_min;
    report.small_sample = values.size() < 50;

    // One-sample KS distance between the empirical CDF and the fitted law.
    std::vector<long> counts(max_value - l_min + 1, 0);
    for (int v : values) ++counts[v - l_min];
    const double z = hurwitz_zeta_int(gamma_hat, l_min);
    double emp = 0.0, fit = 0.0, d = 0.0;
    for (int v = l_min; v <= max_value; ++v) {
        emp += counts[v - l_min] / n;
        fit += std::pow(static_cast<double>(v), -gamma_hat) / z;
        d = std::max(d, std::abs(emp - fit));
    }
    report.ks_statistic = d;
    const double root = std::sqrt(n);
    report.p_value = kolmogorov_q((root + 0.12 + 0.11 / root) * d);
    return report;
}

void save_fit_report(const FitReport& report, const std::string& path) {
    nlohmann::json j;
    j["exponent"] = report.exponent;
    j["llr_vs_exponential"] = report.llr_vs_exponential;
    j["ks_statistic"] = report.ks_statistic;
    j["p_value"] = report.p_value;
    j["n"] = report.n;
    j["l_min"] = report.l_min;
    j["small_sample"] = report.small_sample;
    write_file_atomic(path, j.dump(2) + "\n");
}

std::vector<DeviationRow> deviation_table(const Eigen::MatrixXd& model,
                                          const Eigen::MatrixXd& data,
                                          const std::vector<int>& degrees,
                                          const std::vector<long>& class_counts) {
    if (model.rows() != data.rows() || model.cols() != data.cols()) {
        throw std::invalid_argument("deviation_table: trajectory shapes differ");
    }
    if (static_cast<int>(degrees.size()) != model.cols() ||
        class_counts.size() != degrees.size()) {
        throw std::invalid_argument("deviation_table: class labels/counts mismatch");
    }
    const Eigen::MatrixXd diff = model - data;
    const double t = static_cast<double>(model.rows());

    std::vector<DeviationRow> rows;
    auto emit = [&](const std::string& label, const std::vector<int>& cols) {
        if (cols.empty()) return;
        double w_total = 0.0, sq = 0.0, ab = 0.0, mx = 0.0;
        for (int c : cols) {
            const double w = static_cast<double>(class_counts[c]);
            w_total += w;
            sq += w * diff.col(c).squaredNorm() / t;
            ab += w * diff.col(c).cwiseAbs().sum() / t;
            mx = std::max(mx, diff.col(c).cwiseAbs().maxCoeff());
        }
        if (w_total <= 0.0) return;
        rows.push_back({label, sq / w_total, ab / w_total, mx});
    };

    std::vector<int> deg1, deg2, deg3plus;
    for (int c = 0; c < static_cast<int>(degrees.size()); ++c) {
        if (degrees[c] == 1) {
            deg1.push_back(c);
        } else if (degrees[c] == 2) {
            deg2.push_back(c);
        } else if (degrees[c] >= 3) {
            deg3plus.push_back(c);
        }
    }
    emit("1", deg1);
    emit("2", deg2);
    emit("3+", deg3plus);
    return rows;
}

void save_deviation_table(const std::vector<DeviationRow>& rows, const std::string& path) {
    std::string out = "degree,avg_sq,avg_abs,max_abs\n";
    for (const DeviationRow& r : rows) {
        out += r.label;
        out += ',';
        out += format_double(r.avg_sq);
        out += ',';
        out += format_double(r.avg_abs);
        out += ',';
        out += format_double(r.max_abs);
        out += '\n';
    }
    write_file_atomic(path, out);
}

Eigen::MatrixXd moving_average_filter(const Eigen::MatrixXd& observations, int window) {
    if (window < 1) throw std::invalid_argument("moving_average_filter: window must be >= 1");
    Eigen::MatrixXd out(observations.rows(), observations.cols());
    for (int t = 0; t < observations.rows(); ++t) {
        const int lo = std::max(0, t - window + 1);
        out.row(t) = observations.middleRows(lo, t - lo + 1).colwise().mean();
    }
    return out;
}

VarFit var_ls_filter(const Eigen::MatrixXd& observations, int order) {
    if (order < 1) throw std::invalid_argument("var_ls_filter: order must be >= 1");
    const int t_len = static_cast<int>(observations.rows());
    const int dim = static_cast<int>(observations.cols());
    const int n_rows = t_len - order;
    const int n_pred = order * dim + 1;
    if (n_rows < n_pred) {
        std::ostringstream err;
        err << "var_ls_filter: " << t_len << " rows cannot identify a VAR(" << order
            << ") in dimension " << dim;
        throw std::invalid_argument(err.str());
    }

    Eigen::MatrixXd x(n_rows, n_pred);
    Eigen::MatrixXd y(n_rows, dim);
    for (int t = order; t < t_len; ++t) {
        for (int j = 0; j < order; ++j) {
            x.block(t - order, j * dim, 1, dim) = observations.row(t - 1 - j);
        }
        x(t - order, order * dim) = 1.0;
        y.row(t - order) = observations.row(t);
    }
    const Eigen::MatrixXd beta = x.colPivHouseholderQr().solve(y);  // n_pred x dim

    VarFit fit;
    fit.coef.resize(order);
    for (int j = 0; j < order; ++j) {
        fit.coef[j] = beta.middleRows(j * dim, dim).transpose();
    }
    fit.intercept = beta.row(order * dim).transpose();
    fit.estimates = observations;
    for (int t = order; t < t_len; ++t) {
        Eigen::VectorXd pred = fit.intercept;
        for (int j = 0; j < order; ++j) {
            pred += fit.coef[j] * observations.row(t - 1 - j).transpose();
        }
        fit.estimates.row(t) = pred.transpose();
    }
    return fit;
}

}  // namespace difftrack
