#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "digca/dcop.hpp"
#include "digca/monitor.hpp"
#include "digca/policies.hpp"
#include "digca/solvers.hpp"

namespace digca {

// Simulated-seconds periods for the per-agent timers. Chosen so several
// connect rounds and at least two keep-alives fit into the default 5 s gap
// between environment events.
struct SimTimers {
    double connectPeriod = 1.0;
    double announceWaitPeriod = 0.2;
    double stateTimeout = 2.0;
    double keepAlivePeriod = 0.5;
    double inspectPeriod = 1.5;
    double settleDelay = 0.3;  // debounce window between a solver trigger and the run
};

// Per-message network delay, drawn uniformly.
struct DelayRange {
    double lo = 0.01;
    double hi = 0.1;
};

struct SimConfig {
    PolicyConfig policy;
    SolverConfig solver;
    DomainConfig domain;
    SimTimers timers;
    DelayRange delay;

    // Tear the whole hierarchy down after every environment event and let the
    // agents rebuild from scratch (the classical full-restart baseline).
    // Keep-alive and inspection timers stay off: nothing outlives an event.
    bool baselineRestart = false;

    int initialAgents = 0;    // spawned at t=0 with ids 0..n-1, before any script event
    double finalTail = 40.0;  // quiet observation window after the last event

    uint64_t problemSeed = 1;  // domains and constraint coefficients
    uint64_t runSeed = 1;      // delays, timer phases, random event payloads
};

struct AgentOutcome {
    AgentId id;
    ActivityState state = ActivityState::Inactive;
    std::optional<AgentId> parent;
    std::optional<double> stateDeadline;  // armed while an adoption reply is pending
    int childCount = 0;
    double value = 0.0;
};

struct RunResult {
    // One serialized record per snapshot plus a trailing run record; joined by
    // jsonl(). Byte-stable for a given (config, script, seeds).
    std::vector<std::string> records;
    std::string jsonl() const;

    uint64_t enqueued = 0;
    uint64_t delivered = 0;
    uint64_t dropped = 0;
    uint64_t undelivered = 0;  // still in flight when the run ended
    uint64_t totalMessages = 0;
    uint64_t solverMessages = 0;
    std::map<std::string, uint64_t> messagesByKind;
    std::map<std::string, uint64_t> warnings;
    std::map<std::string, uint64_t> triggers;
    std::vector<std::string> violations;

    bool stabilized = false;
    double stabilizeAt = 0.0;
    double lastEventAt = 0.0;
    double endAt = 0.0;
    uint64_t hierarchyChanges = 0;

    double finalCost = 0.0;
    int finalTreeCount = 0;
    int finalMaxDepth = 0;
    std::vector<AgentOutcome> finalAgents;
    std::map<PairKey, Coefficients> finalEdges;
};

// Execute the script under the config: a deterministic pure function of its
// arguments. Environment events land interEventDelay apart as timestamped in
// the script; a metrics snapshot is taken just before each following event and
// a final one after the quiet tail. Script violations (removing an absent
// agent, changing a nonexistent edge) throw ScriptError.
RunResult runSimulation(const SimConfig& cfg, const std::vector<EnvironmentEvent>& script);

}  // namespace digca
