#pragma once

// Batch experiment driver behind the CLI: each command reads a config
// document, validates it (also the --dry-run path), computes, and writes
// its artifacts atomically into the output directory. Runs are
// deterministic given config and seed.

#include <cstdint>
#include <string>

namespace difftrack {

struct CliOptions {
    std::string command;
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;  // --seed overrides the config's seed
    bool dry_run = false;
};

// Commands: generate, simulate, meanfield, track, pcrlb, evolve, threshold,
// ingest, fit, report. Returns the process exit status; errors are printed
// to stderr as one-line JSON.
int run_command(const CliOptions& opts);

}  // namespace difftrack
