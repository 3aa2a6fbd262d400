#include "difftrack/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "difftrack/io_util.hpp"

namespace difftrack {

namespace {

// Drops the rows listed in `missing` (indices into state space) from C/y/R.
void finalize_rows(Observation& obs, int state_dim, const std::vector<int>& row_state,
                   const std::vector<double>& y, const std::vector<double>& rdiag,
                   const std::vector<int>& sizes, const std::vector<int>& row_degrees) {
    int rows = static_cast<int>(row_state.size());
    obs.y.resize(rows);
    obs.c = Eigen::MatrixXd::Zero(rows, state_dim);
    obs.r = Eigen::MatrixXd::Zero(rows, rows);
    obs.degrees = row_degrees;
    obs.sample_sizes = sizes;
    for (int i = 0; i < rows; ++i) {
        obs.y[i] = y[i];
        obs.c(i, row_state[i]) = 1.0;
        obs.r(i, i) = rdiag[i];
    }
}

}  // namespace

Observation uniform_sample(const Graph& g, const InfectionState& s,
                           const std::vector<int>& state_degrees, const std::vector<int>& gamma,
                           std::uint64_t seed) {
    if (gamma.size() != state_degrees.size())
        throw std::invalid_argument("uniform sample: gamma size mismatch");
    Rng rng(seed);
    Observation obs;
    std::vector<int> row_state, sizes, row_degrees;
    std::vector<double> y, rdiag;
    for (std::size_t i = 0; i < state_degrees.size(); ++i) {
        const auto& nodes = g.nodes_of_degree(state_degrees[i]);
        if (nodes.empty()) {
            obs.missing_degrees.push_back(state_degrees[i]);
            continue;
        }
        if (gamma[i] < 1)
            throw std::invalid_argument("uniform sample: gamma must be >= 1 for degree " +
                                        std::to_string(state_degrees[i]));
        int cls = static_cast<int>(nodes.size());
        double xhat;
        double var;
        if (gamma[i] >= cls) {  // census: exact count, no sampling noise
            int c = 0;
            for (int m : nodes) c += s.infected[m];
            xhat = static_cast<double>(c) / cls;
            var = kMinObservationVariance;
        } else {
            int c = 0;
            for (int t = 0; t < gamma[i]; ++t) c += s.infected[nodes[uniform_int(rng, 0, cls - 1)]];
            xhat = static_cast<double>(c) / gamma[i];
            var = std::max(xhat * (1.0 - xhat) / gamma[i], kMinObservationVariance);
        }
        row_state.push_back(static_cast<int>(i));
        row_degrees.push_back(state_degrees[i]);
        sizes.push_back(std::min(gamma[i], cls));
        y.push_back(xhat);
        rdiag.push_back(var);
    }
    finalize_rows(obs, static_cast<int>(state_degrees.size()), row_state, y, rdiag, sizes,
                  row_degrees);
    return obs;
}

Observation rds_sample(const Graph& g, const InfectionState& s,
                       const std::vector<int>& state_degrees, const WalkConfig& cfg,
                       std::uint64_t seed) {
    if (cfg.walk_length <= cfg.burn_in || cfg.burn_in < 0)
        throw std::invalid_argument("rds: need walk_length > burn_in >= 0");
    if (cfg.num_batches < 2) throw std::invalid_argument("rds: need at least 2 batches");
    if (!cfg.edge_weights.empty() &&
        cfg.edge_weights.size() != static_cast<std::size_t>(g.edge_count()))
        throw std::invalid_argument("rds: edge weight count mismatch");

    Rng rng(seed);
    int start = cfg.start_node;
    if (start < 0) {
        do {
            start = uniform_int(rng, 0, g.node_count() - 1);
        } while (g.degree(start) == 0);
    }
    if (start >= g.node_count() || g.degree(start) == 0)
        throw std::invalid_argument("rds: invalid start node");

    // Per-slot weights aligned with the CSR adjacency.
    std::unordered_map<std::uint64_t, double> wmap;
    if (!cfg.edge_weights.empty()) {
        const auto& edges = g.edges();
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (cfg.edge_weights[e] <= 0.0) throw std::invalid_argument("rds: weights must be positive");
            auto [u, v] = edges[e];
            wmap[(static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(v)] =
                cfg.edge_weights[e];
        }
    }
    auto edge_weight = [&](int u, int v) {
        if (cfg.edge_weights.empty()) return 1.0;
        if (u > v) std::swap(u, v);
        return wmap.at((static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(v));
    };
    std::vector<double> strength(g.node_count(), 0.0);
    for (auto [u, v] : g.edges()) {
        double w = edge_weight(u, v);
        strength[u] += w;
        strength[v] += w;
    }

    // Structure warnings: walk confined to the start component; bipartite
    // components make the chain periodic.
    Observation obs;
    {
        std::vector<int> color(g.node_count(), -1);
        std::queue<int> q;
        color[start] = 0;
        q.push(start);
        int reached = 0;
        bool bipartite = true;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            ++reached;
            for (const int* it = g.neighbors_begin(u); it != g.neighbors_end(u); ++it) {
                if (color[*it] < 0) {
                    color[*it] = 1 - color[u];
                    q.push(*it);
                } else if (color[*it] == color[u]) {
                    bipartite = false;
                }
            }
        }
        int non_isolated = g.node_count() - g.isolated_count();
        obs.warning_disconnected = reached < non_isolated;
        obs.warning_bipartite = bipartite;
    }

    int kept = cfg.walk_length - cfg.burn_in;
    std::vector<int> visits(kept);
    int node = start;
    for (int t = 0; t < cfg.walk_length; ++t) {
        if (t >= cfg.burn_in) visits[t - cfg.burn_in] = node;
        // move
        if (cfg.edge_weights.empty()) {
            int deg = g.degree(node);
            node = g.neighbors_begin(node)[uniform_int(rng, 0, deg - 1)];
        } else {
            double total = strength[node];
            double u = uniform01(rng) * total;
            double acc = 0.0;
            int next = -1;
            for (const int* it = g.neighbors_begin(node); it != g.neighbors_end(node); ++it) {
                acc += edge_weight(node, *it);
                if (u <= acc) {
                    next = *it;
                    break;
                }
            }
            node = next < 0 ? *(g.neighbors_end(node) - 1) : next;
        }
    }

    double total_strength = 0.0;
    for (double v : strength) total_strength += v;

    std::vector<int> row_state, sizes, row_degrees;
    std::vector<double> y, rdiag;
    int batch_len = kept / cfg.num_batches;
    for (std::size_t i = 0; i < state_degrees.size(); ++i) {
        int l = state_degrees[i];
        double num = 0.0, den = 0.0;
        int n_vis = 0;
        std::vector<double> bnum(cfg.num_batches, 0.0), bden(cfg.num_batches, 0.0);
        for (int t = 0; t < kept; ++t) {
            int m = visits[t];
            if (g.degree(m) != l) continue;
            double w = total_strength / strength[m];  // 1/pi up to a common factor
            num += w * s.infected[m];
            den += w;
            ++n_vis;
            int b = std::min(t / std::max(batch_len, 1), cfg.num_batches - 1);
            bnum[b] += w * s.infected[m];
            bden[b] += w;
        }
        if (n_vis == 0) {
            obs.missing_degrees.push_back(l);
            continue;
        }
        std::vector<double> bmeans;
        for (int b = 0; b < cfg.num_batches; ++b)
            if (bden[b] > 0.0) bmeans.push_back(bnum[b] / bden[b]);
        if (bmeans.size() < 2) {
            obs.missing_degrees.push_back(l);
            continue;
        }
        double mean = 0.0;
        for (double v : bmeans) mean += v;
        mean /= bmeans.size();
        double var = 0.0;
        for (double v : bmeans) var += (v - mean) * (v - mean);
        var /= (bmeans.size() - 1);
        var /= bmeans.size();  // variance of the batch-mean average
        row_state.push_back(static_cast<int>(i));
        row_degrees.push_back(l);
        sizes.push_back(n_vis);
        y.push_back(num / den);
        rdiag.push_back(std::max(var, kMinObservationVariance));
    }
    finalize_rows(obs, static_cast<int>(state_degrees.size()), row_state, y, rdiag, sizes,
                  row_degrees);
    return obs;
}

Observation observe(const Graph& g, const InfectionState& s, const std::vector<int>& state_degrees,
                    const ObserveConfig& cfg, std::uint64_t seed) {
    Observation obs;
    if (cfg.method == "uniform") {
        obs = uniform_sample(g, s, state_degrees, cfg.gamma, seed);
    } else if (cfg.method == "rds") {
        obs = rds_sample(g, s, state_degrees, cfg.walk, seed);
    } else {
        throw std::invalid_argument("observe: unknown method '" + cfg.method + "'");
    }
    if (cfg.fixed_r >= 0.0)
        obs.r = cfg.fixed_r * Eigen::MatrixXd::Identity(obs.y.size(), obs.y.size());
    return obs;
}

Observation synthetic_uniform_observation(const Eigen::VectorXd& x, const std::vector<int>& degrees,
                                          const std::vector<int>& gamma, Rng& rng) {
    if (x.size() != static_cast<int>(gamma.size()) || x.size() != static_cast<int>(degrees.size()))
        throw std::invalid_argument("synthetic observation: size mismatch");
    Observation obs;
    int dim = static_cast<int>(x.size());
    obs.y.resize(dim);
    obs.c = Eigen::MatrixXd::Identity(dim, dim);
    obs.r = Eigen::MatrixXd::Zero(dim, dim);
    obs.degrees = degrees;
    obs.sample_sizes = gamma;
    for (int i = 0; i < dim; ++i) {
        if (gamma[i] < 1) throw std::invalid_argument("synthetic observation: gamma must be >= 1");
        std::binomial_distribution<int> bin(gamma[i], std::clamp(x[i], 0.0, 1.0));
        double xhat = static_cast<double>(bin(rng)) / gamma[i];
        obs.y[i] = xhat;
        obs.r(i, i) = std::max(xhat * (1.0 - xhat) / gamma[i], kMinObservationVariance);
    }
    return obs;
}

Observation gaussian_observation(const Eigen::VectorXd& x, const std::vector<int>& degrees,
                                 const Eigen::MatrixXd& c, const Eigen::MatrixXd& r, Rng& rng) {
    if (c.cols() != x.size() || c.rows() != r.rows() || r.rows() != r.cols())
        throw std::invalid_argument("gaussian observation: shape mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(r);
    if (llt.info() != Eigen::Success) {
        Eigen::MatrixXd jitter = r + 1e-15 * Eigen::MatrixXd::Identity(r.rows(), r.cols());
        llt.compute(jitter);
        if (llt.info() != Eigen::Success)
            throw std::invalid_argument("gaussian observation: R not positive semidefinite");
    }
    Eigen::VectorXd z(r.rows());
    for (int i = 0; i < z.size(); ++i) z[i] = normal(rng);
    Observation obs;
    obs.y = c * x + llt.matrixL() * z;
    obs.c = c;
    obs.r = r;
    obs.degrees = degrees;
    obs.sample_sizes.assign(degrees.size(), 0);
    return obs;
}

void save_observations(const std::vector<Observation>& obs, const std::string& path) {
    std::string out = "t,degree,y,r_ll,gamma\n";
    for (std::size_t t = 0; t < obs.size(); ++t) {
        const auto& o = obs[t];
        for (int i = 0; i < o.y.size(); ++i)
            out += std::to_string(t) + "," + std::to_string(o.degrees[i]) + "," +
                   format_double(o.y[i]) + "," + format_double(o.r(i, i)) + "," +
                   std::to_string(o.sample_sizes[i]) + "\n";
    }
    write_file_atomic(path, out);
}

}  // namespace difftrack
