#include "difftrack/empirics.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "difftrack/io_util.hpp"
#include "difftrack/rng.hpp"

namespace difftrack {

namespace {

std::string lowered(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

IngestResult ingest_events(const std::string& path, const std::string& hashtag_filter) {
    std::ifstream in = open_input(path);
    const std::string needle = lowered(hashtag_filter);

    IngestResult result;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++result.total_lines;

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            std::ostringstream err;
            err << path << ":" << line_no << ": invalid JSON: " << e.what();
            throw std::runtime_error(err.str());
        }

        DiffusionEvent ev;
        try {
            ev.ts = j.at("ts").get<std::int64_t>();
            ev.user = j.at("user").get<std::string>();
            if (j.contains("mentions")) {
                ev.mentions = j["mentions"].get<std::vector<std::string>>();
            }
        } catch (const nlohmann::json::exception& e) {
            std::ostringstream err;
            err << path << ":" << line_no << ": bad event fields: " << e.what();
            throw std::runtime_error(err.str());
        }
        if (ev.ts < 0) {
            std::ostringstream err;
            err << path << ":" << line_no << ": negative timestamp";
            throw std::runtime_error(err.str());
        }
        if (ev.user.empty()) {
            std::ostringstream err;
            err << path << ":" << line_no << ": empty user";
            throw std::runtime_error(err.str());
        }

        const std::string text = j.contains("text") ? j["text"].get<std::string>() : "";
        ev.tagged = needle.empty() || lowered(text).find(needle) != std::string::npos;
        if (ev.tagged) result.events.push_back(std::move(ev));
    }

    std::stable_sort(result.events.begin(), result.events.end(),
                     [](const DiffusionEvent& a, const DiffusionEvent& b) { return a.ts < b.ts; });
    result.empty_warning = result.events.empty();
    return result;
}

MentionGraph build_mention_graph(const std::vector<DiffusionEvent>& events) {
    if (events.empty()) {
        throw std::invalid_argument("build_mention_graph: no events");
    }
    MentionGraph mg;
    auto node_of = [&mg](const std::string& user) {
        auto [it, inserted] = mg.id_of.try_emplace(user, static_cast<int>(mg.users.size()));
        if (inserted) mg.users.push_back(user);
        return it->second;
    };

    std::set<std::pair<int, int>> edge_set;
    for (const DiffusionEvent& ev : events) {
        const int u = node_of(ev.user);
        for (const std::string& m : ev.mentions) {
            const int v = node_of(m);
            if (u == v) continue;
            edge_set.insert({std::min(u, v), std::max(u, v)});
        }
    }
    mg.graph = Graph::from_edges(static_cast<int>(mg.users.size()),
                                 {edge_set.begin(), edge_set.end()});
    return mg;
}

InfectionTimeSeries extract_infection_series(const std::vector<DiffusionEvent>& events,
                                             const MentionGraph& mg, double delta,
                                             std::int64_t bin_width, std::uint64_t seed) {
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw std::invalid_argument("extract_infection_series: delta must lie in [0, 1]");
    }
    if (bin_width < 1) {
        throw std::invalid_argument("extract_infection_series: bin width must be positive");
    }
    if (events.empty()) {
        throw std::invalid_argument("extract_infection_series: no events");
    }

    std::int64_t ts_min = events.front().ts, ts_max = events.front().ts;
    for (const DiffusionEvent& ev : events) {
        ts_min = std::min(ts_min, ev.ts);
        ts_max = std::max(ts_max, ev.ts);
    }
    const std::int64_t first_bin = ts_min / bin_width;
    const int n_bins = static_cast<int>(ts_max / bin_width - first_bin) + 1;
    const int n = mg.graph.node_count();

    std::vector<std::vector<int>> posters(n_bins);
    for (const DiffusionEvent& ev : events) {
        const auto it = mg.id_of.find(ev.user);
        if (it == mg.id_of.end()) {
            throw std::invalid_argument("extract_infection_series: event user not in graph: " +
                                        ev.user);
        }
        posters[static_cast<int>(ev.ts / bin_width - first_bin)].push_back(it->second);
    }

    InfectionTimeSeries series;
    series.bin_width = bin_width;
    series.first_bin_start = first_bin * bin_width;
    series.states.assign(n_bins, std::vector<std::uint8_t>(n, 0));

    Rng rng(seed);
    std::vector<std::uint8_t> cur(n, 0);
    for (int b = 0; b < n_bins; ++b) {
        if (b > 0 && delta > 0.0) {
            for (int u = 0; u < n; ++u) {
                if (cur[u] == 1 && uniform01(rng) < delta) cur[u] = 0;
            }
        }
        for (int u : posters[b]) cur[u] = 1;
        series.states[b] = cur;
    }

    for (int d = 1; d <= mg.graph.max_degree(); ++d) {
        if (!mg.graph.nodes_of_degree(d).empty()) series.degrees.push_back(d);
    }
    series.x.resize(n_bins, static_cast<int>(series.degrees.size()));
    for (int b = 0; b < n_bins; ++b) {
        for (std::size_t c = 0; c < series.degrees.size(); ++c) {
            const std::vector<int>& nodes = mg.graph.nodes_of_degree(series.degrees[c]);
            long infected = 0;
            for (int u : nodes) infected += series.states[b][u];
            series.x(b, static_cast<int>(c)) =
                static_cast<double>(infected) / static_cast<double>(nodes.size());
        }
    }
    return series;
}

EmpiricalRates empirical_transition_rates(const InfectionTimeSeries& series,
                                          const MentionGraph& mg) {
    const int n_bins = static_cast<int>(series.states.size());
    if (n_bins < 2) {
        throw std::invalid_argument("empirical_transition_rates: need at least two bins");
    }
    const int max_l = std::max(1, mg.graph.max_degree());

    EmpiricalRates rates;
    rates.kernel = TransitionKernel::zero(max_l, 1.0);
    rates.exposure_inc.resize(max_l + 1);
    rates.exposure_dec.resize(max_l + 1);
    std::vector<std::vector<long>> flips_inc(max_l + 1), flips_dec(max_l + 1);
    for (int l = 1; l <= max_l; ++l) {
        rates.exposure_inc[l].assign(l + 1, 0);
        rates.exposure_dec[l].assign(l + 1, 0);
        flips_inc[l].assign(l + 1, 0);
        flips_dec[l].assign(l + 1, 0);
    }

    const int n = mg.graph.node_count();
    for (int b = 0; b + 1 < n_bins; ++b) {
        const std::vector<std::uint8_t>& cur = series.states[b];
        const std::vector<std::uint8_t>& next = series.states[b + 1];
        for (int u = 0; u < n; ++u) {
            const int l = mg.graph.degree(u);
            if (l == 0) continue;
            int a = 0;
            for (const int* it = mg.graph.neighbors_begin(u); it != mg.graph.neighbors_end(u);
                 ++it) {
                a += cur[*it];
            }
            if (cur[u] == 0) {
                ++rates.exposure_inc[l][a];
                if (next[u] == 1) ++flips_inc[l][a];
            } else {
                ++rates.exposure_dec[l][a];
                if (next[u] == 0) ++flips_dec[l][a];
            }
        }
    }

    for (int l = 1; l <= max_l; ++l) {
        for (int a = 0; a <= l; ++a) {
            if (rates.exposure_inc[l][a] > 0) {
                rates.kernel.p21[l][a] =
                    static_cast<double>(flips_inc[l][a]) / rates.exposure_inc[l][a];
            }
            if (rates.exposure_dec[l][a] > 0) {
                rates.kernel.p12[l][a] =
                    static_cast<double>(flips_dec[l][a]) / rates.exposure_dec[l][a];
            }
        }
    }
    return rates;
}

std::vector<int> infected_degree_sample(const InfectionTimeSeries& series,
                                        const MentionGraph& mg, int bin) {
    if (bin < 0 || bin >= static_cast<int>(series.states.size())) {
        throw std::invalid_argument("infected_degree_sample: bin out of range");
    }
    std::vector<int> out;
    const std::vector<std::uint8_t>& state = series.states[bin];
    for (int u = 0; u < mg.graph.node_count(); ++u) {
        if (state[u] == 1 && mg.graph.degree(u) >= 1) out.push_back(mg.graph.degree(u));
    }
    return out;
}

void save_infection_series(const InfectionTimeSeries& series, const std::string& path) {
    std::string out = "bin,degree,x\n";
    for (int b = 0; b < series.x.rows(); ++b) {
        for (std::size_t c = 0; c < series.degrees.size(); ++c) {
            out += std::to_string(b);
            out += ',';
            out += std::to_string(series.degrees[c]);
            out += ',';
            out += format_double(series.x(b, static_cast<int>(c)));
            out += '\n';
        }
    }
    write_file_atomic(path, out);
}

void save_empirical_rates(const EmpiricalRates& rates, const std::string& path) {
    std::string out = "l,a,p_hat,count\n";
    for (int l = 1; l <= rates.kernel.max_degree(); ++l) {
        for (int a = 0; a <= l; ++a) {
            out += std::to_string(l);
            out += ',';
            out += std::to_string(a);
            out += ',';
            out += format_double(rates.kernel.p21[l][a]);
            out += ',';
            out += std::to_string(rates.exposure_inc[l][a]);
            out += '\n';
        }
    }
    write_file_atomic(path, out);
}

}  // namespace difftrack
