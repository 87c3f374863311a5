#pragma once

#include <optional>
#include <vector>

#include "digca/agent.hpp"

namespace digca {

struct SolverConfig {
    ExecutionOrder order = ExecutionOrder::TopDown;
    bool faultContainment = true;   // suppress cost tables that did not change
    double tolerance = 1e-9;        // "did not change" / "value changed" threshold
    bool analyticRefinement = true; // top-down: add the closed-form candidate
};

// One constraint edge as seen from one endpoint. The quadratic is
// a·x² + b·x·y + c·y² with x belonging to the lower-indexed endpoint, so this
// endpoint's squared term uses `a` when selfIsLow and `c` otherwise.
struct IncidentEdge {
    Coefficients k;
    bool selfIsLow = false;
    std::optional<double> neighborValue;  // set iff the other endpoint's value is known
};

// Stationary point of the total cost in our own value over the edges whose
// neighbor value is known: v* = -Σβ / (2Σα) with α the squared-term
// coefficient and β = b·neighborValue per edge, clamped to [lo, hi]. Returns
// nothing when Σα ≤ 0 (no interior minimum; compare the interval bounds
// instead). Edges with unknown neighbor value are skipped.
std::optional<double> analyticRefine(const std::vector<IncidentEdge>& edges, double lo,
                                     double hi);

// Greedy local choice: minimize the summed cost over edges with known neighbor
// values, picking from the domain samples plus (when `refine`) the analytic
// candidate — or the interval bounds when the quadratic has no interior
// minimum. With no known neighbor value, fall back to the sample minimizing
// the agent's own squared-term total (first sample when there are no edges at
// all). Ties keep the earliest candidate.
double topDownChoose(const std::vector<double>& samples, double lo, double hi,
                     const std::vector<IncidentEdge>& edges, bool refine);

// Cost table for the parent: for each parent sample p, the cheapest value of
// the subtree rooted here given the parent plays p, minimizing over our own
// samples with child tables added in. Child tables must be keyed by our own
// samples. `selfIsLow` orients the parent edge (normally false: parents have
// the lower index).
UtilTable buildUtilTable(const std::vector<double>& parentSamples,
                         const std::vector<double>& ownSamples, const Coefficients& parentEdge,
                         bool selfIsLow, const std::vector<const UtilTable*>& childTables);

// Value decision from a cost table. With a parent value: the recorded best own
// value for it (nearest key when absent — `usedNearest` reports that). Without
// (root): the best-own value of the cheapest row, earliest row on ties.
double chooseValueFromUtil(const UtilTable& table, std::optional<double> parentValue,
                           bool* usedNearest = nullptr);

// Fault containment: forward a rebuilt table only when no table was sent
// before or some entry moved by more than tol.
bool shouldPropagate(const std::optional<UtilTable>& previousSent, const UtilTable& next,
                     double tol);

// Debounced solver entry point: dispatches on cfg.order. Top-down chooses a
// value against known neighbor values and sends it to the children; bottom-up
// advances the cost-table propagation (requesting the parent's samples first
// when unknown, deferring while child tables are missing).
void runSolver(Agent& self, AgentHost& host, const SolverConfig& cfg);

// Immediate handling of a solver message (no debounce): domain-sample
// request/reply, cost table from a child, or a value decision from the parent.
// Senders that are not the expected relation are counted as warnings and
// ignored.
void receiveSolverPayload(Agent& self, AgentHost& host, AgentId from, const SolverData& data,
                          const SolverConfig& cfg);

}  // namespace digca
