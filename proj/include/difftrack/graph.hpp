#pragma once

// Undirected simple graphs over dense integer node ids, degree distributions,
// and the random-graph generators used by the diffusion experiments.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace difftrack {

class Graph {
public:
    // Validates: ids in [0, n), no self-loops, no duplicate edges.
    static Graph from_edges(int n_nodes, std::vector<std::pair<int, int>> edges);

    int node_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    int degree(int node) const { return offsets_[node + 1] - offsets_[node]; }
    int max_degree() const { return max_degree_; }
    int isolated_count() const { return isolated_; }

    const int* neighbors_begin(int node) const { return neighbors_.data() + offsets_[node]; }
    const int* neighbors_end(int node) const { return neighbors_.data() + offsets_[node + 1]; }

    // Nodes of the given degree, 0 <= d <= max_degree().
    const std::vector<int>& nodes_of_degree(int d) const { return by_degree_[d]; }

private:
    int n_ = 0;
    int max_degree_ = 0;
    int isolated_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<int> offsets_;
    std::vector<int> neighbors_;
    std::vector<std::vector<int>> by_degree_;
};

struct DegreeDistribution {
    // Parallel arrays: strictly increasing degree labels (>= 1) and their
    // probabilities. Probabilities sum to 1 within 1e-9.
    std::vector<int> degrees;
    std::vector<double> probs;
    // When set, the last label stands for "that degree or larger".
    bool absorbing_bucket = false;

    int dim() const { return static_cast<int>(degrees.size()); }
    double prob_of(int degree) const;
    double mean_degree() const;
    DegreeDistribution restricted_to_support() const;
    void validate() const;
};

// Empirical distribution over the degree classes present in the graph
// (degrees >= 1, empty classes omitted); isolated nodes are excluded and
// available via g.isolated_count(). Errors when every node is isolated.
DegreeDistribution degree_distribution(const Graph& g);

// Configuration-model graph with degrees drawn iid from a truncated Poisson
// law on {1..cap}; cap = 0 picks the smallest cap with tail mass < 1e-9.
Graph generate_erdos_renyi(int n_nodes, double lambda, std::uint64_t seed, int max_degree = 0);

// Configuration-model graph with degrees drawn iid proportional to l^-gamma
// on {1..max_degree}.
Graph generate_scale_free(int n_nodes, double gamma, int max_degree, std::uint64_t seed);

// Growth model trace: with probability p a new vertex attaches to a
// degree-proportional endpoint, otherwise an edge is added between two
// endpoints chosen independently in proportion to degree. Multi-edges and
// self-loops are kept (a self-loop counts twice toward its endpoint degree).
struct PaMultigraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;

    int edge_count() const { return static_cast<int>(edges.size()); }
    // Drops self-loops and collapses multi-edges.
    Graph simple_projection() const;
};

PaMultigraph generate_preferential_attachment(double p, const Graph& seed_graph, int steps,
                                              std::uint64_t seed);

// Text format: "# nodes=M" header followed by one "u v" line per edge.
void save_edge_list(const Graph& g, const std::string& path);
Graph load_edge_list(const std::string& path);

// CSV with header "degree,prob".
void save_degree_distribution(const DegreeDistribution& d, const std::string& path);
DegreeDistribution load_degree_distribution(const std::string& path);

}  // namespace difftrack
