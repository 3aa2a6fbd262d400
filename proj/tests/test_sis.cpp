#include <doctest.h>

#include <cmath>
#include <vector>

#include "difftrack/sis.hpp"
#include "test_support.hpp"

using namespace difftrack;

namespace {

Graph star(int leaves) {
    std::vector<std::pair<int, int>> e;
    for (int i = 1; i <= leaves; ++i) e.push_back({0, i});
    return Graph::from_edges(leaves + 1, e);
}

// Infect exactly the listed nodes.
InfectionState state_of(int n, std::vector<int> infected) {
    InfectionState s = InfectionState::all_susceptible(n);
    for (int i : infected) s.infected[i] = 1;
    return s;
}

}  // namespace

TEST_SUITE("sis") {

TEST_CASE("kernel construction and validation") {
    TransitionKernel k = TransitionKernel::zero(3, 0.5);
    CHECK(k.max_degree() == 3);
    CHECK(k.max_rate() == 0.0);
    CHECK_NOTHROW(k.validate());
    k.p21[2][1] = 0.7;
    CHECK(k.max_rate() == 0.7);
    CHECK(k.step_probabilities_valid());
    k.p12[3][0] = 1.5;
    CHECK_THROWS(k.validate());
    k.p12[3][0] = 0.5;
    const TransitionKernel k3 = k.with_lambda(3.0);
    CHECK(k3.lambda == 3.0);
    CHECK_FALSE(k3.step_probabilities_valid());

    const TransitionKernel r = TransitionKernel::random_stochastic(5, 1.0, 42);
    CHECK_NOTHROW(r.validate());
    for (int l = 1; l <= 5; ++l) {
        REQUIRE(r.p21[l].size() == static_cast<std::size_t>(l + 1));
        for (int a = 0; a <= l; ++a) {
            CHECK(r.p21[l][a] >= 0.0);
            CHECK(r.p21[l][a] < 1.0);
        }
    }
}

TEST_CASE("kernel file round trip") {
    testutil::TempDir td;
    const TransitionKernel k = TransitionKernel::random_stochastic(4, 1.0, 7);
    save_kernel(k, td.file("k.csv"));
    const TransitionKernel back = load_kernel(td.file("k.csv"), 0.25);
    CHECK(back.lambda == 0.25);
    REQUIRE(back.max_degree() == 4);
    for (int l = 1; l <= 4; ++l)
        for (int a = 0; a <= l; ++a) {
            CHECK(back.p21[l][a] == doctest::Approx(k.p21[l][a]).epsilon(1e-10));
            CHECK(back.p12[l][a] == doctest::Approx(k.p12[l][a]).epsilon(1e-10));
        }
}

TEST_CASE("zero kernel never flips and full kernel swaps every node") {
    const Graph g = star(4);
    Rng rng(1);
    InfectionState s = state_of(5, {0, 2});
    CHECK(step_agents(g, TransitionKernel::zero(4), s, rng).empty());
    CHECK(s.count() == 2);

    InfectionState full = state_of(5, {0, 2});
    const auto flips = step_agents(g, testutil::flat_kernel(4, 1.0, 1.0), full, rng);
    CHECK(flips.size() == 5);
    CHECK(full.infected == state_of(5, {1, 3, 4}).infected);
}

TEST_CASE("updates are synchronous: a two-state blinker on a star") {
    const Graph g = star(5);
    TransitionKernel k = TransitionKernel::zero(5);
    for (int l = 1; l <= 5; ++l) {
        for (int a = 0; a <= l; ++a) {
            k.p21[l][a] = a >= 1 ? 1.0 : 0.0;
            k.p12[l][a] = 1.0;
        }
    }
    Rng rng(3);
    InfectionState s = state_of(6, {0});
    step_agents(g, k, s, rng);
    CHECK(s.infected == state_of(6, {1, 2, 3, 4, 5}).infected);
    step_agents(g, k, s, rng);
    CHECK(s.infected == state_of(6, {0}).infected);
}

TEST_CASE("per-node flip frequencies match lambda * rate") {
    const Graph g = star(4);
    const TransitionKernel k = TransitionKernel::random_stochastic(4, 0.8, 19);
    const InfectionState base = state_of(5, {0, 1});
    std::vector<double> expected(5);
    expected[0] = k.lambda * k.p12[4][1];  // infected center, one infected leaf
    expected[1] = k.lambda * k.p12[1][1];  // infected leaf, infected center
    expected[2] = expected[3] = expected[4] = k.lambda * k.p21[1][1];

    const int trials = 20000;
    std::vector<long> hits(5, 0);
    Rng rng(99);
    for (int t = 0; t < trials; ++t) {
        InfectionState s = base;
        for (int i : step_agents(g, k, s, rng)) ++hits[i];
    }
    for (int u = 0; u < 5; ++u) {
        const double freq = static_cast<double>(hits[u]) / trials;
        const double se = std::sqrt(expected[u] * (1.0 - expected[u]) / trials);
        CHECK(std::abs(freq - expected[u]) < 4.0 * se + 1e-9);
    }
}

TEST_CASE("invalid step probabilities and short kernels are rejected") {
    const Graph g = star(2);
    Rng rng(1);
    InfectionState s = state_of(3, {0});
    CHECK_THROWS(step_agents(g, testutil::flat_kernel(2, 1.0, 1.0, 1.2), s, rng));
    CHECK_THROWS(step_agents(g, testutil::flat_kernel(1, 0.5, 0.5), s, rng));
}

TEST_CASE("isolated nodes never transition") {
    const Graph g = Graph::from_edges(3, {{0, 1}});
    Rng rng(5);
    InfectionState s = state_of(3, {0, 2});
    step_agents(g, testutil::flat_kernel(1, 0.0, 1.0), s, rng);
    CHECK(s.infected == state_of(3, {2}).infected);
}

TEST_CASE("per-degree infected fractions") {
    const Graph g = star(5);
    const InfectionState s = state_of(6, {0, 3});
    const Eigen::VectorXd x = infected_fraction_by_degree(g, s, {1, 5});
    CHECK(x(0) == doctest::Approx(0.2));
    CHECK(x(1) == doctest::Approx(1.0));
    CHECK_THROWS(infected_fraction_by_degree(g, s, {2}));
}

TEST_CASE("infected link probability weights classes by degree") {
    const DegreeDistribution rho = testutil::make_rho({1, 2}, {2.0 / 3.0, 1.0 / 3.0});
    Eigen::VectorXd x(2);
    x << 0.25, 0.5;
    CHECK(infected_link_probability(rho, x) == doctest::Approx(3.0 / 8.0));
}

TEST_CASE("initial state sampling respects the rate") {
    Rng rng(2);
    CHECK(InfectionState::random(100, 0.0, rng).count() == 0);
    CHECK(InfectionState::random(100, 1.0, rng).count() == 100);
    const int c = InfectionState::random(20000, 0.3, rng).count();
    CHECK(std::abs(c / 20000.0 - 0.3) < 0.02);
}

TEST_CASE("trajectories record per-class fractions from the initial step") {
    const Graph g = generate_erdos_renyi(400, 2.0, 21, 6);
    const TransitionKernel k = TransitionKernel::random_stochastic(6, 0.5, 22);
    Rng rng(23);
    const InfectionState init = InfectionState::random(400, 0.4, rng);
    const SisTrajectory traj = simulate_sis(g, k, init, 50, 77);
    CHECK(traj.x.rows() == 51);
    CHECK(traj.x.cols() == static_cast<int>(traj.degrees.size()));
    const Eigen::VectorXd x0 = infected_fraction_by_degree(g, init, traj.degrees);
    CHECK((traj.x.row(0).transpose() - x0).cwiseAbs().maxCoeff() == 0.0);
    for (int t = 0; t <= 50; ++t) {
        CHECK(traj.x.row(t).minCoeff() >= 0.0);
        CHECK(traj.x.row(t).maxCoeff() <= 1.0);
    }
    const SisTrajectory again = simulate_sis(g, k, init, 50, 77);
    CHECK((traj.x - again.x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("trajectory file round trips through save") {
    testutil::TempDir td;
    const Graph g = star(3);
    const SisTrajectory traj = simulate_sis(g, testutil::flat_kernel(3, 0.5, 0.5),
                                            state_of(4, {0, 1}), 5, 11);
    save_trajectory(traj, td.file("traj.csv"));
    const std::string text = testutil::read_text(td.file("traj.csv"));
    CHECK(text.rfind("t,degree,x", 0) == 0);
}

}  // TEST_SUITE
