#pragma once

// Ingestion of tweet-style diffusion logs (JSON lines with fields ts, user,
// mentions, text), mention-graph construction, binned infection time series
// under a per-bin recovery probability, and empirical transition-rate
// extraction for model fitting.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "difftrack/graph.hpp"
#include "difftrack/sis.hpp"

namespace difftrack {

struct DiffusionEvent {
    std::int64_t ts = 0;  // epoch milliseconds
    std::string user;
    std::vector<std::string> mentions;
    bool tagged = false;
};

struct IngestResult {
    std::vector<DiffusionEvent> events;  // tagged events, timestamp-sorted
    long total_lines = 0;
    bool empty_warning = false;
};

// Case-insensitive substring filter on the text field; an empty filter
// keeps every event. Malformed lines error with their line number.
IngestResult ingest_events(const std::string& path, const std::string& hashtag_filter);

struct MentionGraph {
    Graph graph;
    std::vector<std::string> users;  // node id -> user id
    std::unordered_map<std::string, int> id_of;
};

// Undirected simple graph with an edge wherever one user mentions another;
// posters that never mention and are never mentioned stay isolated.
MentionGraph build_mention_graph(const std::vector<DiffusionEvent>& events);

struct InfectionTimeSeries {
    std::int64_t bin_width = 60000;
    std::int64_t first_bin_start = 0;  // epoch ms of bin 0
    // states[bin][node]: 1 = infected at the end of that bin.
    std::vector<std::vector<std::uint8_t>> states;
    std::vector<int> degrees;  // degree classes present in the graph
    Eigen::MatrixXd x;         // per-bin infected fraction per degree class
};

// A node is infected in every bin where it posts; between bins an infected
// node turns susceptible with probability delta (recovery is applied before
// the bin's posts re-seed). delta = 0 is deterministic.
InfectionTimeSeries extract_infection_series(const std::vector<DiffusionEvent>& events,
                                             const MentionGraph& mg, double delta,
                                             std::int64_t bin_width, std::uint64_t seed);

struct EmpiricalRates {
    // lambda = 1; p21/p12 hold the per-(degree, infected-neighbor-count)
    // transition frequencies observed between consecutive bins.
    TransitionKernel kernel;
    std::vector<std::vector<long>> exposure_inc;  // susceptible node-bins per (l, a)
    std::vector<std::vector<long>> exposure_dec;  // infected node-bins per (l, a)
};

// Cells with zero exposure keep rate 0; their exposure count marks them
// missing. Needs at least two bins.
EmpiricalRates empirical_transition_rates(const InfectionTimeSeries& series,
                                          const MentionGraph& mg);

// Degrees of the infected nodes (degree >= 1) at one bin.
std::vector<int> infected_degree_sample(const InfectionTimeSeries& series,
                                        const MentionGraph& mg, int bin);

// CSV with header "bin,degree,x".
void save_infection_series(const InfectionTimeSeries& series, const std::string& path);
// CSV with header "l,a,p_hat,count" (infection side; count is the exposure).
void save_empirical_rates(const EmpiricalRates& rates, const std::string& path);

}  // namespace difftrack
