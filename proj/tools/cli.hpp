#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rarinf/designs.hpp"
#include "rarinf/error.hpp"
#include "rarinf/intervals.hpp"
#include "rarinf/types.hpp"

namespace rarinf::cli {

enum ExitCode : int { ok = 0, config_error = 2, degenerate = 3, solver_failure = 4 };

// Maps an error kind onto the process exit code.
int exit_code(ErrorKind kind);

// Everything a run needs. Filled from --config JSON first, then flags.
struct RunConfig {
    std::string command;
    std::string design = "rpw";
    int alpha = 1;
    int beta = 1;
    int n = 0;
    std::optional<int> block;
    std::optional<double> p1, p2;
    std::optional<int> s1, s2, n1;
    // per-arm level
    double level = 0.975;
    std::string method = "cond";
    std::string mode = "exact";
    int replicates = 10000;
    std::uint64_t seed = 20240101;
    int min_bc = 500;
    int threads = 0;
    int count = 1;
    std::string table;
    std::string out;
    std::string format;

    DesignSpec design_spec() const;
    ProbPair probabilities() const;
    Outcome outcome() const;
    CiSpec ci_spec() const;
    // Fills table-derived fields and checks command-specific requirements.
    // Throws Config.
    void validate();
};

// Merges a JSON config document into `cfg`. Unknown keys are rejected.
void apply_config_json(RunConfig& cfg, const std::string& text);

// Default thread count: RARINF_THREADS if set, else all hardware threads.
int default_threads();

// Entry point; writes results to --out or `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_simulate(const RunConfig& cfg, std::ostream& out);
int cmd_dist(const RunConfig& cfg, std::ostream& out);
int cmd_estimate(const RunConfig& cfg, std::ostream& out);
int cmd_ci(const RunConfig& cfg, std::ostream& out);
int cmd_study(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_figure(const RunConfig& cfg, std::ostream& out);
int cmd_fluoxetine(const RunConfig& cfg, std::ostream& out);

}  // namespace rarinf::cli
