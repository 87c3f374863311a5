#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "digca/sim.hpp"

namespace digca {

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Experiment-level configuration: the cross product of seeds × degrees ×
// problem instances, each run on the same generated (or supplied) script.
struct ExperimentConfig {
    std::vector<uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<int> maxOutDegrees = {3, 5, 6};
    int addEvents = 100;
    int changeEvents = 10;
    int removeEvents = 10;
    double interEventDelay = 5.0;
    ExecutionOrder algorithm = ExecutionOrder::TopDown;
    bool baselineRestart = false;
    bool faultContainment = true;
    int problems = 5;
    uint64_t masterSeed = 1;
    std::string outDir = "out";
    std::optional<std::string> scriptPath;
    SimTimers timers;
    DelayRange delay;
    double finalTail = 40.0;
};

// Flag-level overrides collected by the executable; empty/absent means "not
// given on the command line".
struct CliOverrides {
    std::vector<uint64_t> seeds;
    std::vector<int> maxOutDegrees;
    std::optional<std::string> algorithm;
    bool baselineRestart = false;
    std::optional<std::string> out;
    std::optional<std::string> scriptPath;
};

// Defaults, overlaid by the config file (when given), overlaid by the flags.
// Unknown or ill-typed file keys and invalid final values raise ConfigError.
ExperimentConfig resolveConfig(const std::optional<std::string>& configFile,
                               const CliOverrides& cli);

// File half of resolveConfig, exposed for tests: apply one JSON config file.
void applyConfigFile(const std::string& path, ExperimentConfig& cfg);

// Invariant checks on a fully resolved config (degree ≥ 1, removeEvents ≤
// addEvents, positive periods, …). Raises ConfigError.
void validateConfig(const ExperimentConfig& cfg);

ExecutionOrder parseAlgorithm(const std::string& name);  // "topdown" | "bottomup" | "none"
std::string algorithmName(ExecutionOrder order);

// The benchmark script: `adds` agent arrivals (ids 0, 1, …), then `changes`
// constraint changes, then `removes` departures, spaced `gap` apart starting
// at t=0. Change and remove targets are wildcards resolved at run time from
// the per-run seed.
std::vector<EnvironmentEvent> generateScript(int adds, int changes, int removes, double gap);

struct RunOutcome {
    std::string name;  // file stem: algorithm, mode, degree, problem, seed
    int maxOutDegree = 0;
    int problem = 0;
    uint64_t seed = 0;
    RunResult result;
};

struct ExperimentResult {
    std::vector<RunOutcome> runs;
    std::string summaryCsv;
    bool anyViolations = false;
};

// Run every (degree, problem, seed) combination; `progress` (when given)
// receives one line per finished run.
ExperimentResult runExperiment(const ExperimentConfig& cfg, std::ostream* progress = nullptr);

// Mean/std of total messages and final cost per (algorithm, mode, degree)
// group, as CSV. Exposed so tests can recompute it from raw run results.
std::string summarizeCsv(const std::vector<RunOutcome>& runs);

// Write one .jsonl file per run plus summary.csv under outDir (created if
// missing). Returns the paths written.
std::vector<std::string> writeExperimentFiles(const ExperimentResult& result,
                                              const std::string& outDir);

}  // namespace digca
