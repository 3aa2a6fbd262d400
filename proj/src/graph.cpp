#include "difftrack/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "difftrack/io_util.hpp"
#include "difftrack/rng.hpp"

namespace difftrack {

namespace {

std::uint64_t edge_key(int u, int v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(v);
}

}  // namespace

Graph Graph::from_edges(int n_nodes, std::vector<std::pair<int, int>> edges) {
    if (n_nodes < 0) throw std::invalid_argument("graph: negative node count");
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(edges.size() * 2);
    for (auto& [u, v] : edges) {
        if (u < 0 || v < 0 || u >= n_nodes || v >= n_nodes)
            throw std::invalid_argument("graph: edge endpoint out of range");
        if (u == v) throw std::invalid_argument("graph: self-loop not allowed");
        if (u > v) std::swap(u, v);
        if (!seen.insert(edge_key(u, v)).second)
            throw std::invalid_argument("graph: duplicate edge");
    }
    std::sort(edges.begin(), edges.end());

    Graph g;
    g.n_ = n_nodes;
    g.edges_ = std::move(edges);
    std::vector<int> deg(n_nodes, 0);
    for (auto [u, v] : g.edges_) {
        ++deg[u];
        ++deg[v];
    }
    g.offsets_.assign(n_nodes + 1, 0);
    for (int i = 0; i < n_nodes; ++i) g.offsets_[i + 1] = g.offsets_[i] + deg[i];
    g.neighbors_.resize(g.offsets_[n_nodes]);
    std::vector<int> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (auto [u, v] : g.edges_) {
        g.neighbors_[cursor[u]++] = v;
        g.neighbors_[cursor[v]++] = u;
    }
    g.max_degree_ = deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
    g.by_degree_.assign(g.max_degree_ + 1, {});
    for (int i = 0; i < n_nodes; ++i) g.by_degree_[deg[i]].push_back(i);
    g.isolated_ = static_cast<int>(g.by_degree_[0].size());
    return g;
}

double DegreeDistribution::prob_of(int degree) const {
    auto it = std::lower_bound(degrees.begin(), degrees.end(), degree);
    if (it == degrees.end() || *it != degree) return 0.0;
    return probs[it - degrees.begin()];
}

double DegreeDistribution::mean_degree() const {
    double m = 0.0;
    for (int i = 0; i < dim(); ++i) m += degrees[i] * probs[i];
    return m;
}

DegreeDistribution DegreeDistribution::restricted_to_support() const {
    DegreeDistribution out;
    out.absorbing_bucket = absorbing_bucket;
    for (int i = 0; i < dim(); ++i) {
        if (probs[i] > 0.0) {
            out.degrees.push_back(degrees[i]);
            out.probs.push_back(probs[i]);
        }
    }
    if (out.degrees.empty()) throw std::invalid_argument("degree distribution: empty support");
    return out;
}

void DegreeDistribution::validate() const {
    if (degrees.size() != probs.size() || degrees.empty())
        throw std::invalid_argument("degree distribution: shape mismatch");
    double sum = 0.0;
    for (int i = 0; i < dim(); ++i) {
        if (degrees[i] < 1) throw std::invalid_argument("degree distribution: labels must be >= 1");
        if (i > 0 && degrees[i] <= degrees[i - 1])
            throw std::invalid_argument("degree distribution: labels must be strictly increasing");
        if (probs[i] < 0.0) throw std::invalid_argument("degree distribution: negative probability");
        sum += probs[i];
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("degree distribution: probabilities sum to " + std::to_string(sum));
}

DegreeDistribution degree_distribution(const Graph& g) {
    if (g.node_count() == 0) throw std::invalid_argument("degree distribution: empty graph");
    int active = g.node_count() - g.isolated_count();
    if (active == 0) throw std::invalid_argument("degree distribution: all nodes isolated");
    DegreeDistribution d;
    for (int l = 1; l <= g.max_degree(); ++l) {
        const std::size_t count = g.nodes_of_degree(l).size();
        if (count == 0) continue;
        d.degrees.push_back(l);
        d.probs.push_back(static_cast<double>(count) / active);
    }
    return d;
}

namespace {

// Stub matching over a fixed degree sequence. Re-shuffles on self-loop or
// duplicate collisions; after `max_rounds` falls back to degree-preserving
// pair swaps on the defective matching.
Graph configuration_model(const std::vector<int>& degree_seq, Rng& rng) {
    int n = static_cast<int>(degree_seq.size());
    std::vector<int> stubs;
    for (int i = 0; i < n; ++i) stubs.insert(stubs.end(), degree_seq[i], i);
    if (stubs.size() % 2 != 0) throw std::logic_error("configuration model: odd stub count");

    const int max_rounds = 200;
    std::vector<std::pair<int, int>> pairs(stubs.size() / 2);
    for (int round = 0; round < max_rounds; ++round) {
        std::shuffle(stubs.begin(), stubs.end(), rng);
        std::unordered_set<std::uint64_t> seen;
        seen.reserve(pairs.size() * 2);
        bool clean = true;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            int u = stubs[2 * i], v = stubs[2 * i + 1];
            pairs[i] = {u, v};
            if (u == v || !seen.insert(edge_key(u, v)).second) clean = false;
        }
        if (clean) return Graph::from_edges(n, pairs);
    }

    // Swap repair: exchange partners between a defective pair and a random
    // pair until the matching is simple. Degrees are untouched.
    auto is_defect = [&](std::size_t i, const std::unordered_set<std::uint64_t>& multi) {
        auto [u, v] = pairs[i];
        return u == v || multi.count(edge_key(u, v)) > 0;
    };
    std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
    for (long attempt = 0; attempt < 200000; ++attempt) {
        std::unordered_set<std::uint64_t> once, multi;
        for (auto [u, v] : pairs) {
            if (u != v && !once.insert(edge_key(u, v)).second) multi.insert(edge_key(u, v));
        }
        std::vector<std::size_t> defects;
        for (std::size_t i = 0; i < pairs.size(); ++i)
            if (is_defect(i, multi)) defects.push_back(i);
        if (defects.empty()) return Graph::from_edges(n, pairs);
        for (std::size_t i : defects) {
            std::size_t j = pick(rng);
            std::swap(pairs[i].second, pairs[j].second);
        }
    }
    throw std::runtime_error("configuration model: could not reach a simple matching");
}

std::vector<int> sample_degree_sequence(int n, const std::vector<double>& weights, Rng& rng) {
    // weights[i] is the mass of degree i+1
    std::discrete_distribution<int> law(weights.begin(), weights.end());
    std::vector<int> deg(n);
    long sum = 0;
    for (int i = 0; i < n; ++i) {
        deg[i] = law(rng) + 1;
        sum += deg[i];
    }
    while (sum % 2 != 0) {  // resample one node's degree to fix stub parity
        int i = uniform_int(rng, 0, n - 1);
        sum -= deg[i];
        deg[i] = law(rng) + 1;
        sum += deg[i];
    }
    return deg;
}

}  // namespace

Graph generate_erdos_renyi(int n_nodes, double lambda, std::uint64_t seed, int max_degree) {
    if (n_nodes < 2) throw std::invalid_argument("erdos-renyi: need at least 2 nodes");
    if (lambda <= 0.0) throw std::invalid_argument("erdos-renyi: lambda must be positive");
    if (max_degree < 0) throw std::invalid_argument("erdos-renyi: negative degree cap");

    // Poisson masses for degrees >= 1; term for degree l is lambda^l/l!.
    std::vector<double> weights;
    double term = lambda;  // l = 1
    double total_tail = std::expm1(lambda);
    double cum = 0.0;
    for (int l = 1; l <= (max_degree > 0 ? max_degree : 4096); ++l) {
        weights.push_back(term);
        cum += term;
        if (max_degree == 0 && (total_tail - cum) / total_tail < 1e-9) break;
        term *= lambda / (l + 1);
    }

    Rng rng(seed);
    auto deg = sample_degree_sequence(n_nodes, weights, rng);
    return configuration_model(deg, rng);
}

Graph generate_scale_free(int n_nodes, double gamma, int max_degree, std::uint64_t seed) {
    if (n_nodes < 2) throw std::invalid_argument("scale-free: need at least 2 nodes");
    if (gamma <= 1.0) throw std::invalid_argument("scale-free: gamma must exceed 1");
    if (max_degree < 1) throw std::invalid_argument("scale-free: degree cap must be >= 1");

    std::vector<double> weights(max_degree);
    for (int l = 1; l <= max_degree; ++l) weights[l - 1] = std::pow(l, -gamma);

    Rng rng(seed);
    auto deg = sample_degree_sequence(n_nodes, weights, rng);
    return configuration_model(deg, rng);
}

PaMultigraph generate_preferential_attachment(double p, const Graph& seed_graph, int steps,
                                              std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("preferential attachment: p outside [0,1]");
    if (steps < 0) throw std::invalid_argument("preferential attachment: negative step count");
    if (seed_graph.edge_count() == 0)
        throw std::invalid_argument("preferential attachment: seed graph has no edges");

    PaMultigraph g;
    g.n = seed_graph.node_count();
    g.edges = seed_graph.edges();
    std::vector<int> stubs;  // node id repeated once per incident edge end
    stubs.reserve(2 * (seed_graph.edge_count() + steps));
    for (auto [u, v] : g.edges) {
        stubs.push_back(u);
        stubs.push_back(v);
    }

    Rng rng(seed);
    auto pick_by_degree = [&]() { return stubs[uniform_int(rng, 0, static_cast<int>(stubs.size()) - 1)]; };
    for (int s = 0; s < steps; ++s) {
        if (uniform01(rng) < p) {
            int w = pick_by_degree();
            int u = g.n++;
            g.edges.emplace_back(u, w);
            stubs.push_back(u);
            stubs.push_back(w);
        } else {
            int u = pick_by_degree();
            int v = pick_by_degree();
            g.edges.emplace_back(u, v);
            stubs.push_back(u);
            stubs.push_back(v);
        }
    }
    return g;
}

Graph PaMultigraph::simple_projection() const {
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::pair<int, int>> simple;
    for (auto [u, v] : edges) {
        if (u == v) continue;
        if (seen.insert(edge_key(u, v)).second) simple.emplace_back(u, v);
    }
    return Graph::from_edges(n, simple);
}

void save_edge_list(const Graph& g, const std::string& path) {
    std::string out = "# nodes=" + std::to_string(g.node_count()) + "\n";
    for (auto [u, v] : g.edges()) out += std::to_string(u) + " " + std::to_string(v) + "\n";
    write_file_atomic(path, out);
}

Graph load_edge_list(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# nodes=", 0) != 0)
        throw std::runtime_error(path + ":1: expected '# nodes=M' header");
    int n = 0;
    try {
        n = std::stoi(line.substr(8));
    } catch (const std::exception&) {
        throw std::runtime_error(path + ":1: malformed node count");
    }
    std::vector<std::pair<int, int>> edges;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        int u, v;
        if (!(ss >> u >> v))
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed edge row");
        std::string rest;
        if (ss >> rest)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": trailing tokens");
        edges.emplace_back(u, v);
    }
    try {
        return Graph::from_edges(n, std::move(edges));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void save_degree_distribution(const DegreeDistribution& d, const std::string& path) {
    std::string out = "degree,prob\n";
    for (int i = 0; i < d.dim(); ++i)
        out += std::to_string(d.degrees[i]) + "," + format_double(d.probs[i]) + "\n";
    write_file_atomic(path, out);
}

DegreeDistribution load_degree_distribution(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line) || line != "degree,prob")
        throw std::runtime_error(path + ":1: expected 'degree,prob' header");
    DegreeDistribution d;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 2)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 2 columns");
        try {
            d.degrees.push_back(std::stoi(cells[0]));
            d.probs.push_back(std::stod(cells[1]));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
        }
    }
    d.validate();
    return d;
}

}  // namespace difftrack
