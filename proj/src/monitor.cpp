#include "digca/monitor.hpp"

#include <algorithm>
#include <cstdio>

namespace digca {

namespace {

std::string describe(AgentId id) { return std::to_string(id.index); }

}  // namespace

std::vector<std::string> validateHierarchy(const HierarchySnapshot& s, const PolicyConfig& cfg,
                                           bool atQuiescence) {
    std::vector<std::string> out;

    // (1) Acyclic parent graph: no parent chain may revisit an agent. Checked
    // by walk length rather than via the ordering rule so the two checks stay
    // independent.
    const size_t biggestChain = s.live.size() + 1;
    for (AgentId start : s.live) {
        AgentId cur = start;
        size_t steps = 0;
        while (true) {
            auto it = s.parentOf.find(cur);
            if (it == s.parentOf.end() || !it->second) break;  // root or reaped away
            cur = *it->second;
            if (++steps > biggestChain) {
                out.push_back("cycle: parent chain from agent " + describe(start) +
                              " does not terminate");
                break;
            }
        }
    }

    // (2) Parent index strictly below the child's.
    for (const auto& [id, parent] : s.parentOf) {
        if (parent && !(parent->index < id.index)) {
            out.push_back("ordering: agent " + describe(id) + " has parent " +
                          describe(*parent));
        }
    }

    // (3) Degree cap.
    for (const auto& [id, kids] : s.childrenOf) {
        if (static_cast<int>(kids.size()) > cfg.maxOutDegree) {
            out.push_back("degree: agent " + describe(id) + " has " +
                          std::to_string(kids.size()) + " children (max " +
                          std::to_string(cfg.maxOutDegree) + ")");
        }
    }

    // (4) Mutual register consistency — only meaningful once in-flight
    // handshakes and pending reaps have drained.
    if (atQuiescence) {
        for (const auto& [id, parent] : s.parentOf) {
            if (!parent) continue;
            auto kids = s.childrenOf.find(*parent);
            if (!s.live.count(*parent) || kids == s.childrenOf.end() ||
                !kids->second.count(id)) {
                out.push_back("consistency: agent " + describe(id) + " claims parent " +
                              describe(*parent) + " which does not list it");
            }
        }
        for (const auto& [id, kids] : s.childrenOf) {
            for (AgentId c : kids) {
                auto p = s.parentOf.find(c);
                if (!s.live.count(c) || p == s.parentOf.end() || !p->second ||
                    *p->second != id) {
                    out.push_back("consistency: agent " + describe(id) + " lists child " +
                                  describe(c) + " which does not claim it");
                }
            }
        }
    }
    return out;
}

int treeCount(const HierarchySnapshot& s) {
    int roots = 0;
    for (AgentId id : s.live) {
        auto it = s.parentOf.find(id);
        if (it == s.parentOf.end() || !it->second) ++roots;
    }
    return roots;
}

int maxDepth(const HierarchySnapshot& s) {
    std::map<AgentId, int> depth;
    int deepest = 0;
    for (AgentId start : s.live) {
        // Walk to a known depth or a root, then unwind.
        std::vector<AgentId> path;
        AgentId cur = start;
        int base = 0;
        while (true) {
            if (auto d = depth.find(cur); d != depth.end()) {
                base = d->second;
                break;
            }
            path.push_back(cur);
            auto it = s.parentOf.find(cur);
            if (it == s.parentOf.end() || !it->second || !s.live.count(*it->second)) {
                base = 0;
                break;
            }
            cur = *it->second;
            if (path.size() > s.live.size()) break;  // cycle; reported by validate
        }
        for (auto r = path.rbegin(); r != path.rend(); ++r) depth[*r] = ++base;
        deepest = std::max(deepest, base);
    }
    return deepest;
}

StabilizationResult checkStabilization(const std::vector<double>& changeTimes,
                                       double lastEventAt, double endAt, double quietTail) {
    double last = lastEventAt;
    for (double t : changeTimes) last = std::max(last, t);
    if (endAt - last >= quietTail) return {true, last};
    return {false, last};
}

void RunCounters::countSend(const GraphMessage& msg) {
    ++enqueued_;
    if (msg.kind == MessageKind::SolverPayload) {
        ++byKind_[std::string("Solver/") + solverMessageKindName(msg.solver.kind)];
    } else {
        ++byKind_[messageKindName(msg.kind)];
    }
}

void RunCounters::countTrigger(TriggerReason r) { ++triggers_[triggerReasonName(r)]; }

void RunCounters::recordMutation(const Agent& agent, double at) {
    changeTimes_.push_back(at);
    // Cheap per-agent invariants, checked at the exact mutation boundary.
    if (agent.parent && !(agent.parent->index < agent.id.index)) {
        recordViolation(at, "ordering: agent " + describe(agent.id) + " has parent " +
                                describe(*agent.parent));
    }
    if (agent.parent && agent.children.count(*agent.parent)) {
        recordViolation(at, "overlap: agent " + describe(agent.id) + " has parent " +
                                describe(*agent.parent) + " also as child");
    }
    if (agent.childCount() > policy_.maxOutDegree) {
        recordViolation(at, "degree: agent " + describe(agent.id) + " has " +
                                std::to_string(agent.childCount()) + " children (max " +
                                std::to_string(policy_.maxOutDegree) + ")");
    }
}

void RunCounters::recordViolation(double at, const std::string& what) {
    char stamp[32];
    snprintf(stamp, sizeof stamp, "t=%.6f ", at);
    violations_.push_back(stamp + what);
}

uint64_t RunCounters::solverMessages() const {
    uint64_t n = 0;
    for (const auto& [kind, count] : byKind_) {
        if (kind.rfind("Solver/", 0) == 0) n += count;
    }
    return n;
}

}  // namespace digca
