#include "digca/protocol.hpp"

#include <algorithm>

namespace digca {

const char* triggerReasonName(TriggerReason r) {
    switch (r) {
        case TriggerReason::ChildAdded: return "ChildAdded";
        case TriggerReason::ParentAssigned: return "ParentAssigned";
        case TriggerReason::NeighborRemoved: return "NeighborRemoved";
        case TriggerReason::ConstraintChanged: return "ConstraintChanged";
    }
    return "?";
}

std::vector<AgentId> Agent::neighbors() const {
    std::vector<AgentId> out;
    out.reserve(children.size() + 1);
    if (parent) out.push_back(*parent);
    out.insert(out.end(), children.begin(), children.end());
    std::sort(out.begin(), out.end());
    return out;
}

Agent initAgent(AgentId id, ExecutionOrder order, Domain domain) {
    Agent a;
    a.id = id;
    a.order = order;
    a.domain = std::move(domain);
    // Defined global cost from the first instant: hold the first sample until
    // a solver run makes a real choice.
    a.currentValue = a.domain.samples.empty() ? 0.0 : a.domain.samples.front();
    return a;
}

void connectTick(Agent& self, AgentHost& host) {
    if (self.state == ActivityState::Inactive && !self.parent) {
        self.respondents.clear();
        host.broadcast(self.id, makeMessage(MessageKind::Announce, self.id));
        host.armConnectFinish(self.id);
    } else if (self.state == ActivityState::Active && !self.parent && self.stateDeadline &&
               host.now() >= *self.stateDeadline) {
        // The accept never came; give up this attempt and retry next tick.
        self.state = ActivityState::Inactive;
        self.stateDeadline.reset();
        self.respondents.clear();
    }
}

void connectFinish(Agent& self, AgentHost& host, const PolicyConfig& cfg, double stateTimeout) {
    if (self.state == ActivityState::Inactive && !self.parent) {
        if (auto target = selectRespondent(self.respondents, cfg)) {
            host.send(self.id, *target, makeMessage(MessageKind::AddMe, self.id));
            self.state = ActivityState::Active;
            self.stateDeadline = host.now() + stateTimeout;
        }
    }
    self.respondents.clear();
}

void receiveAnnounce(Agent& self, AgentHost& host, AgentId from, const PolicyConfig& cfg) {
    if (self.state != ActivityState::Inactive) return;
    if (!phi(self.id, from, self.childCount(), cfg)) return;
    host.send(self.id, from, makeAnnounceResponse(self.id, self.childCount()));
}

void receiveAnnounceResponse(Agent& self, AgentId from, int childCount) {
    if (self.state != ActivityState::Inactive) return;
    for (Respondent& r : self.respondents) {
        if (r.id == from) {
            r.childCount = childCount;  // repeated response: latest count wins
            return;
        }
    }
    self.respondents.push_back(Respondent{from, childCount});
}

void receiveAddMe(Agent& self, AgentHost& host, AgentId from, const PolicyConfig& cfg) {
    // Capacity is re-checked: several AddMe's can race past the response-time
    // check, and only maxOutDegree of them may win.
    if (self.state == ActivityState::Inactive && self.childCount() < cfg.maxOutDegree) {
        self.children.insert(from);
        // Count the new child as heard-from so the next inspection sweep
        // cannot reap it before its first keep-alive arrives.
        self.keepAlive.heardFrom.insert(from);
        host.createEdge(self.id, from);
        host.hierarchyMutated(self.id);
        host.send(self.id, from, makeMessage(MessageKind::ChildAdded, self.id));
    } else {
        host.send(self.id, from, makeMessage(MessageKind::AlreadyActive, self.id));
    }
}

void receiveChildAdded(Agent& self, AgentHost& host, AgentId from) {
    if (self.state != ActivityState::Active || self.parent) return;  // stale accept
    self.parent = from;
    self.state = ActivityState::Inactive;
    self.stateDeadline.reset();
    self.keepAlive.heardFrom.insert(from);
    host.hierarchyMutated(self.id);
    host.send(self.id, from, makeMessage(MessageKind::ParentAssigned, self.id));
    if (self.order == ExecutionOrder::BottomUp) {
        host.requestSolverRun(self.id, TriggerReason::ChildAdded);
    }
}

void receiveAlreadyActive(Agent& self) {
    self.state = ActivityState::Inactive;
    self.stateDeadline.reset();
}

void receiveParentAssigned(Agent& self, AgentHost& host, AgentId from) {
    if (!self.children.count(from)) {
        host.countWarning("parent-assigned-from-non-child");
        return;
    }
    if (self.order == ExecutionOrder::TopDown) {
        host.requestSolverRun(self.id, TriggerReason::ParentAssigned);
    }
}

}  // namespace digca
