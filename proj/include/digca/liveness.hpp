#pragma once

#include "digca/agent.hpp"

namespace digca {

// Failure detection: periodic keep-alives to all neighbors, periodic sweep of
// neighbors that went silent. Works because a removed agent stops sending;
// delivery itself is reliable.

// One KeepAlive to the parent and each child.
void sendKeepAlives(Agent& self, AgentHost& host);

// Record the sender; extraneous senders are harmless (the sweep only looks at
// actual neighbors).
void receiveKeepAlive(Agent& self, AgentId from);

// Drop every neighbor we did not hear from since the last sweep: losing the
// parent re-opens connecting (Inactive, parent unset); losing a child shrinks
// the degree. Everything known about the dropped neighbor goes with it — the
// constraint edge, cached solver tables, respondent entries. Ends by clearing
// the heard-from set; at most one solver run is requested no matter how many
// neighbors were dropped. Returns the dropped ids (ascending).
//
// Call strictly less often than keep-alives are sent, so a live neighbor
// always lands in the heard-from set between sweeps.
std::vector<AgentId> inspectNeighbors(Agent& self, AgentHost& host);

}  // namespace digca
