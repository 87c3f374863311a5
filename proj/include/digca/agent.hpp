#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "digca/dcop.hpp"
#include "digca/types.hpp"

namespace digca {

// Why an agent's paired solver was asked to run. ChildAdded fires on the new
// child when its parent confirms (bottom-up orders), ParentAssigned on the
// parent when the child acknowledges (top-down orders); the other two fire on
// any order.
enum class TriggerReason { ChildAdded, ParentAssigned, NeighborRemoved, ConstraintChanged };

const char* triggerReasonName(TriggerReason r);

// Liveness register: who we heard a KeepAlive from since the last inspection.
struct KeepAliveRegister {
    std::set<AgentId> heardFrom;
};

// Per-agent solver scratch state. Owned by the agent, touched only inside its
// own message/timer handling.
struct SolverState {
    std::map<AgentId, UtilTable> childTables;  // latest cost table per child
    std::vector<double> parentSamples;         // parent's domain samples (empty = unknown)
    bool domainRequestPending = false;
    std::optional<double> knownParentValue;    // last Value heard from the parent
    std::optional<UtilTable> lastBuiltTable;   // most recent table we computed
    std::optional<UtilTable> lastSentTable;    // most recent table the parent saw
    std::optional<double> lastFloodedValue;    // last value pushed to the children
    std::set<AgentId> valueDelivered;          // children that have heard that value
    uint64_t runToken = 0;                     // debounce: only the latest scheduled run fires
};

// Full per-agent state: protocol registers, liveness register, solver state,
// and the agent's share of the problem (domain + current value).
struct Agent {
    AgentId id;
    ActivityState state = ActivityState::Inactive;
    std::optional<AgentId> parent;
    std::set<AgentId> children;
    std::vector<Respondent> respondents;
    std::optional<double> stateDeadline;  // Active-without-parent expiry instant
    ExecutionOrder order = ExecutionOrder::None;
    Domain domain;
    double currentValue = 0.0;  // first domain sample until a solver run replaces it
    KeepAliveRegister keepAlive;
    SolverState solver;

    int childCount() const { return static_cast<int>(children.size()); }
    bool hasParent() const { return parent.has_value(); }

    // Parent (if set) followed by children, ascending ids: a deterministic
    // iteration order for anything that sends one message per neighbor.
    std::vector<AgentId> neighbors() const;
};

// Services the runtime provides to the per-agent handlers. The simulator
// implements this; tests may substitute a recording fake.
class AgentHost {
  public:
    virtual ~AgentHost() = default;

    virtual double now() const = 0;

    // Enqueue a message to one agent / to every live agent except the sender.
    virtual void send(AgentId from, AgentId to, const GraphMessage& msg) = 0;
    virtual void broadcast(AgentId from, const GraphMessage& msg) = 0;

    // Schedule the second phase of a connect attempt (announce wait elapsed).
    virtual void armConnectFinish(AgentId who) = 0;

    // Ask for a debounced solver run; no-op when the agent's order is None.
    virtual void requestSolverRun(AgentId who, TriggerReason reason) = 0;

    // Constraint-edge lifecycle for the pair (a, b); creation samples fresh
    // coefficients, repeated creation of a live edge keeps the existing ones.
    virtual void createEdge(AgentId a, AgentId b) = 0;
    virtual void destroyEdge(AgentId a, AgentId b) = 0;
    virtual const Coefficients* edgeCoefficients(AgentId a, AgentId b) const = 0;

    // Observer hooks: a parent/children register changed; a recoverable
    // anomaly (stale message etc.) was noticed.
    virtual void hierarchyMutated(AgentId who) = 0;
    virtual void countWarning(const char* what) = 0;
};

}  // namespace digca
