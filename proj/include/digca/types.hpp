#pragma once

#include <compare>
#include <cstdint>
#include <vector>

namespace digca {

// Totally ordered agent identifier. Ids are unique for the whole run and are
// never reused, including after removal. Doubles as the variable id (one
// variable per agent).
struct AgentId {
    uint32_t index = 0;
    auto operator<=>(const AgentId&) const = default;
};

enum class ActivityState { Inactive, Active };

// Which protocol message triggers the paired solver.
enum class ExecutionOrder { TopDown, BottomUp, None };

enum class MessageKind {
    Announce,
    AnnounceResponse,
    AddMe,
    ChildAdded,
    AlreadyActive,
    ParentAssigned,
    KeepAlive,
    SolverPayload,
};

const char* messageKindName(MessageKind k);

enum class SolverMessageKind { None, DomainRequest, DomainInfo, Util, Value };

const char* solverMessageKindName(SolverMessageKind k);

// Cost table sent child -> parent. Entry i refers to the parent's i-th domain
// sample: cost[i] is the minimal subtree cost given that parent value, and
// bestOwn[i] is the sender's own value achieving it.
struct UtilTable {
    std::vector<double> parentValues;
    std::vector<double> cost;
    std::vector<double> bestOwn;

    bool empty() const { return parentValues.empty(); }
    // Exact key match; returns size() when absent.
    size_t indexOf(double parentValue) const;
    // Closest key by absolute distance. Table must be non-empty.
    size_t nearestIndex(double parentValue) const;
};

struct SolverData {
    SolverMessageKind kind = SolverMessageKind::None;
    std::vector<double> samples;  // DomainInfo: sender's domain samples
    UtilTable table;              // Util
    double value = 0.0;           // Value: sender's chosen value
};

// Every message names its sender; the transport supplies no other identity.
struct GraphMessage {
    MessageKind kind = MessageKind::Announce;
    AgentId sender;
    int childCount = 0;  // AnnounceResponse: sender's child count at send time
    SolverData solver;   // SolverPayload only
};

GraphMessage makeMessage(MessageKind k, AgentId sender);
GraphMessage makeAnnounceResponse(AgentId sender, int childCount);
GraphMessage makeSolverMessage(AgentId sender, SolverData data);

// One entry of the response list gathered during a connect attempt.
struct Respondent {
    AgentId id;
    int childCount = 0;
    bool operator==(const Respondent&) const = default;
};

}  // namespace digca
