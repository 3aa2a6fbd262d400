#include <doctest.h>

#include <cmath>
#include <vector>

#include "difftrack/meanfield.hpp"
#include "test_support.hpp"

using namespace difftrack;

namespace {

// Binomial mixture of the infection rates, evaluated directly.
double g_direct(const std::vector<double>& rates, double lambda, int l, double alpha) {
    double total = 0.0;
    for (int a = 0; a <= l; ++a) {
        double binom = 1.0;
        for (int i = 0; i < a; ++i) binom = binom * (l - i) / (i + 1);
        total += rates[a] * binom * std::pow(alpha, a) * std::pow(1.0 - alpha, l - a);
    }
    return lambda * total;
}

Eigen::VectorXd random_interior_state(int dim, Rng& rng) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = 0.05 + 0.9 * uniform01(rng);
    return x;
}

}  // namespace

TEST_SUITE("meanfield") {

TEST_CASE("build_dynamics validates rho and kernel coverage") {
    const TransitionKernel k = TransitionKernel::random_stochastic(3, 1.0, 5);
    CHECK_THROWS(build_dynamics(k, testutil::make_rho({1, 2}, {1.0, 0.0}), 1));
    CHECK_THROWS(build_dynamics(k, testutil::make_rho({1, 4}, {0.5, 0.5}), 1));
    const PolynomialDynamics dyn = build_dynamics(k, testutil::make_rho({1, 3}, {0.5, 0.5}), 2);
    CHECK(dyn.dim() == 2);
    CHECK(dyn.m == 2);
    CHECK(dyn.total_degree() == 4);  // x * alpha^3 term from the degree-3 class
}

TEST_CASE("flat single-class rates balance at one half") {
    const PolynomialDynamics dyn =
        build_dynamics(testutil::flat_kernel(1, 0.6, 0.6), testutil::make_rho({1}, {1.0}), 4);
    Eigen::VectorXd x(1);
    x << 0.5;
    CHECK(mean_field_step(dyn, x).x(0) == doctest::Approx(0.5));
    x << 0.2;
    const AsymptoticState fp = asymptotic_state(dyn, x);
    CHECK(fp.converged);
    CHECK(fp.x(0) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("binomial and power-basis rate mixtures agree") {
    const TransitionKernel k = TransitionKernel::random_stochastic(5, 0.7, 31);
    const DegreeDistribution rho =
        testutil::make_rho({1, 2, 3, 4, 5}, {0.3, 0.25, 0.2, 0.15, 0.1});
    const PolynomialDynamics dyn = build_dynamics(k, rho, 1);
    for (double alpha : {0.0, 0.3, 0.77, 1.0}) {
        for (int i = 0; i < dyn.dim(); ++i) {
            const int l = dyn.degrees[i];
            CHECK(dyn.g_inc(i, alpha) ==
                  doctest::Approx(g_direct(k.p21[l], k.lambda, l, alpha)).epsilon(1e-10));
            CHECK(dyn.g_dec(i, alpha) ==
                  doctest::Approx(g_direct(k.p12[l], k.lambda, l, alpha)).epsilon(1e-10));
            double pw_inc = 0.0, pw_dec = 0.0;
            for (std::size_t j = 0; j < dyn.b_inc[i].size(); ++j) {
                pw_inc += dyn.b_inc[i][j] * std::pow(alpha, static_cast<double>(j));
                pw_dec += dyn.b_dec[i][j] * std::pow(alpha, static_cast<double>(j));
            }
            CHECK(pw_inc == doctest::Approx(dyn.g_inc(i, alpha)).epsilon(1e-9));
            CHECK(pw_dec == doctest::Approx(dyn.g_dec(i, alpha)).epsilon(1e-9));
        }
    }
}

TEST_CASE("flat rates collapse the power basis to a constant") {
    const PolynomialDynamics dyn =
        build_dynamics(testutil::flat_kernel(4, 0.5, 0.25), testutil::make_rho({4}, {1.0}), 1);
    REQUIRE(dyn.b_inc[0].size() >= 1);
    CHECK(dyn.b_inc[0][0] == doctest::Approx(0.5));
    for (std::size_t j = 1; j < dyn.b_inc[0].size(); ++j) CHECK(dyn.b_inc[0][j] == 0.0);
    for (std::size_t j = 1; j < dyn.b_dec[0].size(); ++j) CHECK(dyn.b_dec[0][j] == 0.0);
}

TEST_CASE("alpha matches the link probability and the step matches its formula") {
    const TransitionKernel k = TransitionKernel::random_stochastic(4, 0.9, 13);
    const DegreeDistribution rho = testutil::make_rho({1, 2, 4}, {0.5, 0.3, 0.2});
    const PolynomialDynamics dyn = build_dynamics(k, rho, 3);
    Rng rng(8);
    const Eigen::VectorXd x = random_interior_state(3, rng);
    const double alpha = dyn.alpha_of(x);
    CHECK(alpha == doctest::Approx(infected_link_probability(rho, x)).epsilon(1e-12));
    const MeanFieldStep step = mean_field_step(dyn, x);
    for (int i = 0; i < 3; ++i) {
        const double expect = x(i) + (1.0 / 3.0) * ((1.0 - x(i)) * dyn.g_inc(i, alpha) -
                                                    x(i) * dyn.g_dec(i, alpha));
        CHECK(step.x(i) == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK_FALSE(step.out_of_range);
}

TEST_CASE("leaving the unit box sets the range flag") {
    const PolynomialDynamics dyn =
        build_dynamics(testutil::flat_kernel(1, 1.0, 0.0, 2.0), testutil::make_rho({1}, {1.0}), 1);
    Eigen::VectorXd x(1);
    x << 0.0;
    const MeanFieldStep step = mean_field_step(dyn, x);
    CHECK(step.out_of_range);
    CHECK(step.x(0) == doctest::Approx(2.0));
}

TEST_CASE("jacobian matches central finite differences") {
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const int max_deg = 2 + uniform_int(rng, 0, 3);
        const TransitionKernel k =
            TransitionKernel::random_stochastic(max_deg, 0.5 + 0.5 * uniform01(rng), 100 + trial);
        Eigen::VectorXd probs = Eigen::VectorXd::Zero(max_deg);
        std::vector<int> degrees;
        for (int l = 1; l <= max_deg; ++l) {
            degrees.push_back(l);
            probs(l - 1) = 0.1 + uniform01(rng);
        }
        probs /= probs.sum();
        const PolynomialDynamics dyn = build_dynamics(
            k, testutil::make_rho(degrees, std::vector<double>(probs.data(),
                                                               probs.data() + max_deg)),
            1 + uniform_int(rng, 0, 3));
        const Eigen::VectorXd x = random_interior_state(dyn.dim(), rng);
        const Eigen::MatrixXd jac = jacobian(dyn, x);
        const double h = 1e-6;
        double worst = 0.0;
        for (int j = 0; j < dyn.dim(); ++j) {
            Eigen::VectorXd xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            const Eigen::VectorXd col =
                (mean_field_step(dyn, xp).x - mean_field_step(dyn, xm).x) / (2.0 * h);
            worst = std::max(worst, (col - jac.col(j)).cwiseAbs().maxCoeff());
        }
        CHECK(worst / std::max(1.0, jac.cwiseAbs().maxCoeff()) < 1e-6);
    }
}

TEST_CASE("trajectories stay in the unit box for valid step probabilities") {
    const TransitionKernel k = TransitionKernel::random_stochastic(5, 0.8, 41);
    const DegreeDistribution rho = testutil::make_rho({1, 2, 3, 4, 5},
                                                      {0.2, 0.2, 0.2, 0.2, 0.2});
    const PolynomialDynamics dyn = build_dynamics(k, rho, 1);
    Rng rng(42);
    const MeanFieldTrajectory traj =
        simulate_mean_field(dyn, random_interior_state(5, rng), 200);
    CHECK(traj.x.rows() == 201);
    CHECK_FALSE(traj.out_of_range);
    CHECK(traj.x.minCoeff() >= 0.0);
    CHECK(traj.x.maxCoeff() <= 1.0);
}

TEST_CASE("asymptotic states are fixed points") {
    const TransitionKernel k = TransitionKernel::random_stochastic(4, 0.9, 55);
    const DegreeDistribution rho = testutil::make_rho({1, 2, 3, 4}, {0.4, 0.3, 0.2, 0.1});
    const PolynomialDynamics dyn = build_dynamics(k, rho, 2);
    Eigen::VectorXd x0 = Eigen::VectorXd::Constant(4, 0.3);
    const AsymptoticState fp = asymptotic_state(dyn, x0, 1e-12);
    CHECK(fp.converged);
    CHECK((mean_field_step(dyn, fp.x).x - fp.x).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("dense tensors reproduce the per-degree step") {
    const TransitionKernel k = TransitionKernel::random_stochastic(4, 0.6, 61);
    const DegreeDistribution rho = testutil::make_rho({1, 2, 4}, {0.5, 0.25, 0.25});
    const PolynomialDynamics dyn = build_dynamics(k, rho, 2);
    const DenseTensors tensors = dense_tensors(dyn);
    CHECK(tensors.dim == 3);
    CHECK(tensors.order == dyn.total_degree());
    for (int i = 0; i < 3; ++i) {
        const int l = dyn.degrees[i];
        CHECK(tensors.a[0][i] == doctest::Approx(dyn.lambda * k.p21[l][0] / dyn.m).epsilon(1e-12));
    }
    Rng rng(62);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXd x = random_interior_state(3, rng);
        const Eigen::VectorXd via_tensors = tensors.evaluate(x);
        const Eigen::VectorXd via_step = mean_field_step(dyn, x).x;
        CHECK((via_tensors - via_step).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("oversized dense tensors raise a capacity error") {
    const TransitionKernel k = TransitionKernel::random_stochastic(30, 0.5, 63);
    std::vector<int> degrees;
    std::vector<double> probs;
    for (int l = 1; l <= 30; ++l) {
        degrees.push_back(l);
        probs.push_back(1.0 / 30.0);
    }
    const PolynomialDynamics dyn = build_dynamics(k, testutil::make_rho(degrees, probs), 1);
    CHECK_THROWS_AS(dense_tensors(dyn), std::length_error);
}

TEST_CASE("trajectory and dynamics files are written with stable headers") {
    testutil::TempDir td;
    const PolynomialDynamics dyn =
        build_dynamics(testutil::flat_kernel(2, 0.5, 0.5), testutil::make_rho({1, 2}, {0.5, 0.5}), 2);
    Eigen::VectorXd x0(2);
    x0 << 0.1, 0.9;
    save_mean_field_trajectory(simulate_mean_field(dyn, x0, 3), td.file("mf.csv"));
    CHECK(testutil::read_text(td.file("mf.csv")).rfind("t,degree,xbar", 0) == 0);
    save_dynamics_json(dyn, td.file("dyn.json"));
    const std::string json = testutil::read_text(td.file("dyn.json"));
    CHECK(json.find("\"lambda\"") != std::string::npos);
    CHECK(json.find("\"c_inc\"") != std::string::npos);
}

}  // TEST_SUITE
