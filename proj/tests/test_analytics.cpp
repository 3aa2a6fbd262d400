#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "difftrack/analytics.hpp"
#include "test_support.hpp"

using namespace difftrack;

TEST_SUITE("analytics") {

TEST_CASE("kolmogorov survival function matches tabulated values") {
    CHECK(kolmogorov_q(0.0) == 1.0);
    CHECK(kolmogorov_q(0.5) == doctest::Approx(0.9639452436).epsilon(1e-6));
    CHECK(kolmogorov_q(1.0) == doctest::Approx(0.2699996717).epsilon(1e-6));
    CHECK(kolmogorov_q(2.0) == doctest::Approx(0.0006709252).epsilon(1e-4));
    CHECK(kolmogorov_q(0.3) > kolmogorov_q(0.6));
    CHECK(kolmogorov_q(0.6) > kolmogorov_q(1.2));
    CHECK(kolmogorov_q(8.0) < 1e-12);
}

TEST_CASE("two-sample KS hand values") {
    const KsResult same = ks_two_sample(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3});
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == doctest::Approx(1.0));

    const KsResult apart =
        ks_two_sample(std::vector<double>{1, 2, 3}, std::vector<double>{10, 11, 12});
    CHECK(apart.statistic == 1.0);

    const KsResult half = ks_two_sample(std::vector<double>{1.0, 2.0}, std::vector<double>{1.5});
    CHECK(half.statistic == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(ks_two_sample(std::vector<double>{}, std::vector<double>{1.0}),
                    std::invalid_argument);
}

TEST_CASE("KS statistic is invariant under monotone relabeling") {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(0.5, 4.0);
    std::vector<double> a(40), b(25);
    for (double& v : a) v = u(rng);
    for (double& v : b) v = u(rng);
    const KsResult raw = ks_two_sample(a, b);
    auto cube = [](double v) { return v * v * v; };
    std::transform(a.begin(), a.end(), a.begin(), cube);
    std::transform(b.begin(), b.end(), b.begin(), cube);
    const KsResult cubed = ks_two_sample(a, b);
    CHECK(raw.statistic == cubed.statistic);
    CHECK(raw.p_value == cubed.p_value);
}

TEST_CASE("integer overload agrees with the double overload") {
    const std::vector<int> a{1, 1, 2, 3, 5}, b{2, 2, 3, 4};
    const std::vector<double> ad(a.begin(), a.end()), bd(b.begin(), b.end());
    const KsResult ri = ks_two_sample(a, b);
    const KsResult rd = ks_two_sample(ad, bd);
    CHECK(ri.statistic == rd.statistic);
    CHECK(ri.p_value == rd.p_value);
}

TEST_CASE("power-law fit recovers the generating exponent") {
    std::mt19937_64 rng(2718);
    const std::vector<int> sample = testutil::power_law_sample(30000, 2.5, 1, 3000, rng);
    const FitReport report = fit_power_law_discrete(sample, 1);
    CHECK(report.exponent == doctest::Approx(2.5).epsilon(0.02));
    CHECK(report.llr_vs_exponential > 0.0);
    CHECK(report.ks_statistic < 0.02);
    CHECK(report.n == 30000);
    CHECK(report.l_min == 1);
    CHECK_FALSE(report.small_sample);
}

TEST_CASE("geometric tails favor the exponential alternative") {
    std::mt19937_64 rng(99);
    std::geometric_distribution<int> geo(0.4);
    std::vector<int> sample(20000);
    for (int& v : sample) v = 1 + geo(rng);
    const FitReport report = fit_power_law_discrete(sample, 1);
    CHECK(report.llr_vs_exponential < 0.0);
}

TEST_CASE("fit flags small samples and rejects bad input") {
    const std::vector<int> tiny{1, 2, 1, 3, 1, 1, 2, 5, 1, 2};
    CHECK(fit_power_law_discrete(tiny, 1).small_sample);
    CHECK_THROWS_AS(fit_power_law_discrete(tiny, 0), std::invalid_argument);
    CHECK_THROWS_AS(fit_power_law_discrete(tiny, 2), std::invalid_argument);
    CHECK_THROWS_AS(fit_power_law_discrete({}, 1), std::invalid_argument);
}

TEST_CASE("fit report serializes its fields") {
    testutil::TempDir td;
    FitReport report;
    report.exponent = 2.25;
    report.llr_vs_exponential = 12.5;
    report.ks_statistic = 0.015;
    report.p_value = 0.4;
    report.n = 1234;
    report.l_min = 2;
    save_fit_report(report, td.file("fit.json"));
    const std::string text = testutil::read_text(td.file("fit.json"));
    CHECK(text.find("\"exponent\"") != std::string::npos);
    CHECK(text.find("2.25") != std::string::npos);
    CHECK(text.find("1234") != std::string::npos);
}

TEST_CASE("deviation table on identical trajectories is zero") {
    const Eigen::MatrixXd traj = Eigen::MatrixXd::Random(10, 3).cwiseAbs();
    const auto rows = deviation_table(traj, traj, {1, 2, 3}, {5, 4, 2});
    REQUIRE(rows.size() == 3);
    for (const DeviationRow& r : rows) {
        CHECK(r.avg_sq == 0.0);
        CHECK(r.avg_abs == 0.0);
        CHECK(r.max_abs == 0.0);
    }
    CHECK(rows[0].label == "1");
    CHECK(rows[1].label == "2");
    CHECK(rows[2].label == "3+");
}

TEST_CASE("constant offsets produce exact deviation moments") {
    Eigen::MatrixXd data = Eigen::MatrixXd::Constant(6, 2, 0.4);
    Eigen::MatrixXd model = data;
    model.col(0).array() += 0.1;
    model.col(1).array() += 0.2;
    const auto rows = deviation_table(model, data, {3, 4}, {1, 3});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].label == "3+");
    CHECK(rows[0].avg_abs == doctest::Approx(0.175).epsilon(1e-12));
    CHECK(rows[0].avg_sq == doctest::Approx(0.0325).epsilon(1e-12));
    CHECK(rows[0].max_abs == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("deviation table rejects misaligned inputs") {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 2);
    const Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 2);
    CHECK_THROWS_AS(deviation_table(a, b, {1, 2}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(deviation_table(a, a, {1, 2, 3}, {1, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(deviation_table(a, a, {1, 2}, {1}), std::invalid_argument);
}

TEST_CASE("deviation table writes labeled rows") {
    testutil::TempDir td;
    const auto rows = deviation_table(Eigen::MatrixXd::Zero(3, 1), Eigen::MatrixXd::Zero(3, 1),
                                      {2}, {7});
    save_deviation_table(rows, td.file("dev.csv"));
    const std::string text = testutil::read_text(td.file("dev.csv"));
    CHECK(text.rfind("degree,avg_sq,avg_abs,max_abs", 0) == 0);
    CHECK(text.find("\n2,") != std::string::npos);
}

TEST_CASE("moving average hand values") {
    Eigen::MatrixXd obs(3, 1);
    obs << 0.0, 3.0, 6.0;
    const Eigen::MatrixXd ma1 = moving_average_filter(obs, 1);
    CHECK((ma1 - obs).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXd ma2 = moving_average_filter(obs, 2);
    CHECK(ma2(0, 0) == doctest::Approx(0.0));
    CHECK(ma2(1, 0) == doctest::Approx(1.5));
    CHECK(ma2(2, 0) == doctest::Approx(4.5));
    const Eigen::MatrixXd big = moving_average_filter(obs, 10);
    CHECK(big(2, 0) == doctest::Approx(3.0));
    CHECK_THROWS_AS(moving_average_filter(obs, 0), std::invalid_argument);
}

TEST_CASE("moving average of a constant series is that constant") {
    const Eigen::MatrixXd obs = Eigen::MatrixXd::Constant(20, 3, 0.7);
    const Eigen::MatrixXd ma = moving_average_filter(obs, 5);
    CHECK((ma.array() - 0.7).abs().maxCoeff() < 1e-14);
}

TEST_CASE("least-squares VAR(1) recovers the transition matrix") {
    Eigen::MatrixXd a(2, 2);
    a << 0.6, 0.1, -0.2, 0.5;
    Eigen::VectorXd c(2);
    c << 0.3, -0.1;
    std::mt19937_64 rng(777);
    std::normal_distribution<double> noise(0.0, 0.05);
    const int t_len = 8000;
    Eigen::MatrixXd obs(t_len, 2);
    obs.row(0) << 0.5, 0.2;
    for (int t = 1; t < t_len; ++t) {
        Eigen::Vector2d next = a * obs.row(t - 1).transpose() + c;
        next(0) += noise(rng);
        next(1) += noise(rng);
        obs.row(t) = next.transpose();
    }
    const VarFit fit = var_ls_filter(obs, 1);
    REQUIRE(fit.coef.size() == 1);
    CHECK((fit.coef[0] - a).cwiseAbs().maxCoeff() < 0.02);
    CHECK((fit.intercept - c).cwiseAbs().maxCoeff() < 0.02);
    REQUIRE(fit.estimates.rows() == t_len);
    CHECK((fit.estimates.row(0) - obs.row(0)).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::Vector2d pred = fit.coef[0] * obs.row(9).transpose() + fit.intercept;
    CHECK((fit.estimates.row(10).transpose() - pred).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("VAR fit validates its inputs") {
    const Eigen::MatrixXd tiny = Eigen::MatrixXd::Zero(3, 2);
    CHECK_THROWS_AS(var_ls_filter(tiny, 2), std::invalid_argument);
    CHECK_THROWS_AS(var_ls_filter(tiny, 0), std::invalid_argument);
    const VarFit two = var_ls_filter(Eigen::MatrixXd::Random(40, 2), 2);
    CHECK(two.coef.size() == 2);
}

}  // TEST_SUITE
