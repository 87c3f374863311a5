#include "digca/liveness.hpp"

#include <algorithm>

namespace digca {

void sendKeepAlives(Agent& self, AgentHost& host) {
    for (AgentId n : self.neighbors()) {
        host.send(self.id, n, makeMessage(MessageKind::KeepAlive, self.id));
    }
}

void receiveKeepAlive(Agent& self, AgentId from) { self.keepAlive.heardFrom.insert(from); }

namespace {

// Forget everything the solver cached about a vanished neighbor.
void clearSolverInfoAbout(Agent& self, AgentId gone, bool wasParent) {
    self.solver.childTables.erase(gone);
    self.solver.valueDelivered.erase(gone);  // if the id re-attaches it starts over
    if (wasParent) {
        self.solver.parentSamples.clear();
        self.solver.domainRequestPending = false;
        self.solver.knownParentValue.reset();
        self.solver.lastSentTable.reset();  // the next parent has seen nothing yet
    }
}

}  // namespace

std::vector<AgentId> inspectNeighbors(Agent& self, AgentHost& host) {
    std::vector<AgentId> gone;
    for (AgentId n : self.neighbors()) {
        if (!self.keepAlive.heardFrom.count(n)) gone.push_back(n);
    }
    for (AgentId n : gone) {
        bool wasParent = self.parent && *self.parent == n;
        if (wasParent) {
            self.parent.reset();
            self.state = ActivityState::Inactive;
        } else {
            self.children.erase(n);
        }
        clearSolverInfoAbout(self, n, wasParent);
        std::erase_if(self.respondents, [n](const Respondent& r) { return r.id == n; });
        host.destroyEdge(self.id, n);
        host.hierarchyMutated(self.id);
    }
    self.keepAlive.heardFrom.clear();
    if (!gone.empty()) {
        host.requestSolverRun(self.id, TriggerReason::NeighborRemoved);
    }
    return gone;
}

}  // namespace digca
