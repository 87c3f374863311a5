#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "digca/agent.hpp"
#include "digca/policies.hpp"

namespace digca {

// Omniscient-observer snapshot of the hierarchy registers, captured between
// event-queue steps.
struct HierarchySnapshot {
    double at = 0.0;
    std::set<AgentId> live;
    std::map<AgentId, std::optional<AgentId>> parentOf;
    std::map<AgentId, std::set<AgentId>> childrenOf;
};

// Validity oracle. Always checked: (1) the parent graph is acyclic, (2) every
// parent has a lower index than its child, (3) no child set exceeds the degree
// cap. With atQuiescence additionally: (4) parent and child registers agree
// both ways (transient one-sided entries are legal mid-churn, the liveness
// layer reaps them). Violations are returned as data, not thrown.
std::vector<std::string> validateHierarchy(const HierarchySnapshot& s, const PolicyConfig& cfg,
                                           bool atQuiescence);

// Number of live parentless agents (each roots one tree of the forest).
int treeCount(const HierarchySnapshot& s);

// Agents on the longest root-to-leaf parent chain (0 for an empty snapshot).
int maxDepth(const HierarchySnapshot& s);

struct StabilizationResult {
    bool stabilized = false;
    double at = 0.0;  // first instant after which no register changed
};

// The hierarchy stabilized if the register-change log goes quiet for at least
// quietTail before the end of the observation window; the reported instant is
// the last change (never earlier than the last environment event).
StabilizationResult checkStabilization(const std::vector<double>& changeTimes,
                                       double lastEventAt, double endAt, double quietTail);

// Run-wide accounting: message counters by kind, anomaly counters, solver
// trigger counters, the hierarchy-change log, and recorded violations.
// Mutation-time micro-checks catch ordering/degree breakage at the exact
// message boundary that caused it.
class RunCounters {
  public:
    explicit RunCounters(PolicyConfig policy) : policy_(policy) {}

    void countSend(const GraphMessage& msg);
    void countDelivery() { ++delivered_; }
    void countDrop() { ++dropped_; }
    void countWarning(const char* what) { ++warnings_[what]; }
    void countTrigger(TriggerReason r);

    // Log a parent/children register change and re-check the cheap per-agent
    // invariants right at the mutation.
    void recordMutation(const Agent& agent, double at);

    void recordViolation(double at, const std::string& what);

    uint64_t enqueued() const { return enqueued_; }
    uint64_t delivered() const { return delivered_; }
    uint64_t dropped() const { return dropped_; }
    uint64_t totalMessages() const { return enqueued_; }
    uint64_t solverMessages() const;
    const std::map<std::string, uint64_t>& messagesByKind() const { return byKind_; }
    const std::map<std::string, uint64_t>& warnings() const { return warnings_; }
    const std::map<std::string, uint64_t>& triggers() const { return triggers_; }
    const std::vector<double>& changeTimes() const { return changeTimes_; }
    const std::vector<std::string>& violations() const { return violations_; }

  private:
    PolicyConfig policy_;
    uint64_t enqueued_ = 0;
    uint64_t delivered_ = 0;
    uint64_t dropped_ = 0;
    std::map<std::string, uint64_t> byKind_;
    std::map<std::string, uint64_t> warnings_;
    std::map<std::string, uint64_t> triggers_;
    std::vector<double> changeTimes_;
    std::vector<std::string> violations_;
};

}  // namespace digca
