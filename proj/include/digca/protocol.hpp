#pragma once

#include "digca/agent.hpp"
#include "digca/policies.hpp"

namespace digca {

// Hierarchy-construction state machine. Each procedure is one run-to-completion
// step of a single agent; all effects go through the AgentHost.

Agent initAgent(AgentId id, ExecutionOrder order, Domain domain);

// Periodic connect tick. Inactive + parentless: broadcast an Announce and arm
// the response-collection deadline. Active + parentless with an expired state
// deadline: fall back to Inactive (retry next tick).
void connectTick(Agent& self, AgentHost& host);

// Second phase, at the response-collection deadline: pick a respondent, send
// AddMe, go Active with a state deadline. The respondent list is cleared
// whether or not anyone answered.
void connectFinish(Agent& self, AgentHost& host, const PolicyConfig& cfg, double stateTimeout);

// Answer an Announce from `from` iff currently Inactive and the response
// determinant allows it; the response advertises our child count.
void receiveAnnounce(Agent& self, AgentHost& host, AgentId from, const PolicyConfig& cfg);

// Collect a response while Inactive; one entry per sender, latest child count
// wins.
void receiveAnnounceResponse(Agent& self, AgentId from, int childCount);

// Accept `from` as a child when Inactive and under the degree cap (the cap is
// re-checked here because racing AddMe's can pass the response-time check);
// otherwise turn it away with AlreadyActive.
void receiveAddMe(Agent& self, AgentHost& host, AgentId from, const PolicyConfig& cfg);

// Our AddMe was accepted: adopt `from` as parent, acknowledge with
// ParentAssigned, and (bottom-up orders) ask for a solver run. Stale copies —
// we already have a parent or gave up — are ignored; the sender's dangling
// child entry is reaped by the liveness layer.
void receiveChildAdded(Agent& self, AgentHost& host, AgentId from);

// Our AddMe was turned away: back to Inactive unconditionally, deadline
// cleared; retry at the next connect tick.
void receiveAlreadyActive(Agent& self);

// The child we accepted confirmed the link: (top-down orders) ask for a solver
// run. A sender we do not consider a child is stale: warn and ignore.
void receiveParentAssigned(Agent& self, AgentHost& host, AgentId from);

}  // namespace digca
