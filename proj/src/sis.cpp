#include "difftrack/sis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "difftrack/io_util.hpp"

namespace difftrack {

double TransitionKernel::max_rate() const {
    double m = 0.0;
    for (int l = 1; l <= max_degree(); ++l) {
        for (double v : p12[l]) m = std::max(m, v);
        for (double v : p21[l]) m = std::max(m, v);
    }
    return m;
}

void TransitionKernel::validate() const {
    if (lambda < 0.0) throw std::invalid_argument("kernel: negative lambda");
    if (p12.size() != p21.size() || p12.size() < 2)
        throw std::invalid_argument("kernel: table shape mismatch");
    for (int l = 1; l <= max_degree(); ++l) {
        if (static_cast<int>(p12[l].size()) != l + 1 || static_cast<int>(p21[l].size()) != l + 1)
            throw std::invalid_argument("kernel: row for degree " + std::to_string(l) +
                                        " must have " + std::to_string(l + 1) + " entries");
        for (double v : p12[l])
            if (v < 0.0 || v > 1.0) throw std::invalid_argument("kernel: rate outside [0,1]");
        for (double v : p21[l])
            if (v < 0.0 || v > 1.0) throw std::invalid_argument("kernel: rate outside [0,1]");
    }
}

bool TransitionKernel::step_probabilities_valid() const {
    return lambda * max_rate() <= 1.0 + 1e-15;
}

TransitionKernel TransitionKernel::zero(int max_degree, double lambda) {
    if (max_degree < 1) throw std::invalid_argument("kernel: max degree must be >= 1");
    TransitionKernel k;
    k.lambda = lambda;
    k.p12.resize(max_degree + 1);
    k.p21.resize(max_degree + 1);
    for (int l = 1; l <= max_degree; ++l) {
        k.p12[l].assign(l + 1, 0.0);
        k.p21[l].assign(l + 1, 0.0);
    }
    return k;
}

TransitionKernel TransitionKernel::random_stochastic(int max_degree, double lambda,
                                                     std::uint64_t seed) {
    auto k = zero(max_degree, lambda);
    Rng rng(seed);
    for (int l = 1; l <= max_degree; ++l) {
        for (int a = 0; a <= l; ++a) {
            k.p12[l][a] = uniform01(rng);
            k.p21[l][a] = uniform01(rng);
        }
    }
    return k;
}

TransitionKernel TransitionKernel::with_lambda(double new_lambda) const {
    TransitionKernel k = *this;
    k.lambda = new_lambda;
    return k;
}

void save_kernel(const TransitionKernel& k, const std::string& path) {
    std::string out = "l,a,p12,p21\n";
    for (int l = 1; l <= k.max_degree(); ++l)
        for (int a = 0; a <= l; ++a)
            out += std::to_string(l) + "," + std::to_string(a) + "," + format_double(k.p12[l][a]) +
                   "," + format_double(k.p21[l][a]) + "\n";
    write_file_atomic(path, out);
}

TransitionKernel load_kernel(const std::string& path, double lambda) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line) || line != "l,a,p12,p21")
        throw std::runtime_error(path + ":1: expected 'l,a,p12,p21' header");
    int line_no = 1;
    int max_l = 0;
    struct Row {
        int l, a;
        double p12, p21;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 4)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 4 columns");
        try {
            Row r{std::stoi(cells[0]), std::stoi(cells[1]), std::stod(cells[2]), std::stod(cells[3])};
            if (r.l < 1 || r.a < 0 || r.a > r.l) throw std::invalid_argument("index");
            rows.push_back(r);
            max_l = std::max(max_l, r.l);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
        }
    }
    if (max_l == 0) throw std::runtime_error(path + ": no kernel rows");
    auto k = TransitionKernel::zero(max_l, lambda);
    std::vector<std::vector<bool>> seen(max_l + 1);
    for (int l = 1; l <= max_l; ++l) seen[l].assign(l + 1, false);
    for (const auto& r : rows) {
        k.p12[r.l][r.a] = r.p12;
        k.p21[r.l][r.a] = r.p21;
        seen[r.l][r.a] = true;
    }
    for (int l = 1; l <= max_l; ++l)
        for (int a = 0; a <= l; ++a)
            if (!seen[l][a])
                throw std::runtime_error(path + ": missing entry for l=" + std::to_string(l) +
                                         " a=" + std::to_string(a));
    k.validate();
    return k;
}

int InfectionState::count() const {
    int c = 0;
    for (auto v : infected) c += v;
    return c;
}

InfectionState InfectionState::all_susceptible(int n) {
    return InfectionState{std::vector<std::uint8_t>(n, 0)};
}

InfectionState InfectionState::random(int n, double q, Rng& rng) {
    InfectionState s = all_susceptible(n);
    for (int i = 0; i < n; ++i) s.infected[i] = uniform01(rng) < q ? 1 : 0;
    return s;
}

std::vector<int> step_agents(const Graph& g, const TransitionKernel& k, InfectionState& s, Rng& rng) {
    if (static_cast<int>(s.infected.size()) != g.node_count())
        throw std::invalid_argument("step: state size mismatch");
    if (k.max_degree() < g.max_degree())
        throw std::invalid_argument("step: kernel does not cover graph degrees");
    double pmax = k.lambda * k.max_rate();
    if (pmax > 1.0 + 1e-15) throw std::invalid_argument("step: lambda*rate exceeds 1");
    pmax = std::min(pmax, 1.0);
    std::vector<int> flips;
    if (pmax <= 0.0) return flips;

    // Each node flips with probability lambda*rate(l,a) <= pmax. Candidate
    // nodes are drawn by geometric skipping at rate pmax, then thinned by
    // rate/pmax, which reproduces independent per-node Bernoulli draws while
    // touching O(n * pmax) nodes. Flips are applied after the scan so every
    // neighbor count refers to the start-of-step state.
    const double log1mp = std::log1p(-pmax);
    int m = 0;
    int n = g.node_count();
    while (m < n) {
        if (pmax < 1.0) {
            double u = uniform01(rng);
            double skip = std::floor(std::log1p(-u) / log1mp);
            if (skip >= static_cast<double>(n - m)) break;
            m += static_cast<int>(skip);
        }
        int l = g.degree(m);
        if (l > 0) {
            int a = 0;
            for (const int* it = g.neighbors_begin(m); it != g.neighbors_end(m); ++it)
                a += s.infected[*it];
            double rate = s.infected[m] ? k.p12[l][a] : k.p21[l][a];
            double accept = k.lambda * rate / pmax;
            if (accept >= 1.0 || uniform01(rng) < accept) flips.push_back(m);
        }
        ++m;
    }
    for (int i : flips) s.infected[i] ^= 1;
    return flips;
}

Eigen::VectorXd infected_fraction_by_degree(const Graph& g, const InfectionState& s,
                                            const std::vector<int>& degrees) {
    Eigen::VectorXd x(degrees.size());
    for (std::size_t i = 0; i < degrees.size(); ++i) {
        const auto& nodes = g.nodes_of_degree(degrees[i]);
        if (nodes.empty())
            throw std::invalid_argument("infected fraction: no nodes of degree " +
                                        std::to_string(degrees[i]));
        int c = 0;
        for (int m : nodes) c += s.infected[m];
        x[i] = static_cast<double>(c) / nodes.size();
    }
    return x;
}

double infected_link_probability(const DegreeDistribution& rho, const Eigen::VectorXd& x) {
    if (x.size() != rho.dim()) throw std::invalid_argument("link probability: size mismatch");
    double num = 0.0, den = 0.0;
    for (int i = 0; i < rho.dim(); ++i) {
        num += rho.degrees[i] * rho.probs[i] * x[i];
        den += rho.degrees[i] * rho.probs[i];
    }
    if (den <= 0.0) throw std::invalid_argument("link probability: zero mean degree");
    return num / den;
}

SisTrajectory simulate_sis(const Graph& g, const TransitionKernel& k, const InfectionState& init,
                           int horizon, std::uint64_t seed) {
    if (horizon < 0) throw std::invalid_argument("simulate: negative horizon");
    SisTrajectory traj;
    for (int l = 1; l <= g.max_degree(); ++l)
        if (!g.nodes_of_degree(l).empty()) traj.degrees.push_back(l);
    if (traj.degrees.empty()) throw std::invalid_argument("simulate: all nodes isolated");

    // Class sizes are fixed, so per-class counts are maintained incrementally.
    std::vector<int> class_of(g.node_count(), -1), class_size(traj.degrees.size(), 0);
    for (std::size_t i = 0; i < traj.degrees.size(); ++i) {
        for (int m : g.nodes_of_degree(traj.degrees[i])) class_of[m] = static_cast<int>(i);
        class_size[i] = static_cast<int>(g.nodes_of_degree(traj.degrees[i]).size());
    }
    std::vector<int> infected_count(traj.degrees.size(), 0);
    InfectionState s = init;
    for (int m = 0; m < g.node_count(); ++m)
        if (s.infected[m] && class_of[m] >= 0) ++infected_count[class_of[m]];

    traj.x.resize(horizon + 1, traj.degrees.size());
    auto record = [&](int t) {
        for (std::size_t i = 0; i < traj.degrees.size(); ++i)
            traj.x(t, i) = static_cast<double>(infected_count[i]) / class_size[i];
    };
    record(0);
    Rng rng(seed);
    for (int t = 1; t <= horizon; ++t) {
        for (int m : step_agents(g, k, s, rng)) {
            if (class_of[m] >= 0) infected_count[class_of[m]] += s.infected[m] ? 1 : -1;
        }
        record(t);
    }
    return traj;
}

void save_trajectory(const SisTrajectory& t, const std::string& path) {
    std::string out = "t,degree,x\n";
    for (int row = 0; row < t.x.rows(); ++row)
        for (std::size_t i = 0; i < t.degrees.size(); ++i)
            out += std::to_string(row) + "," + std::to_string(t.degrees[i]) + "," +
                   format_double(t.x(row, i)) + "\n";
    write_file_atomic(path, out);
}

}  // namespace difftrack
