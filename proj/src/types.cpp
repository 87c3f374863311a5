#include "digca/types.hpp"

#include <cmath>

namespace digca {

const char* messageKindName(MessageKind k) {
    switch (k) {
        case MessageKind::Announce: return "Announce";
        case MessageKind::AnnounceResponse: return "AnnounceResponse";
        case MessageKind::AddMe: return "AddMe";
        case MessageKind::ChildAdded: return "ChildAdded";
        case MessageKind::AlreadyActive: return "AlreadyActive";
        case MessageKind::ParentAssigned: return "ParentAssigned";
        case MessageKind::KeepAlive: return "KeepAlive";
        case MessageKind::SolverPayload: return "SolverPayload";
    }
    return "?";
}

const char* solverMessageKindName(SolverMessageKind k) {
    switch (k) {
        case SolverMessageKind::None: return "None";
        case SolverMessageKind::DomainRequest: return "DomainRequest";
        case SolverMessageKind::DomainInfo: return "DomainInfo";
        case SolverMessageKind::Util: return "Util";
        case SolverMessageKind::Value: return "Value";
    }
    return "?";
}

size_t UtilTable::indexOf(double parentValue) const {
    for (size_t i = 0; i < parentValues.size(); ++i) {
        if (parentValues[i] == parentValue) return i;
    }
    return parentValues.size();
}

size_t UtilTable::nearestIndex(double parentValue) const {
    size_t best = 0;
    double bestDist = std::abs(parentValues[0] - parentValue);
    for (size_t i = 1; i < parentValues.size(); ++i) {
        double d = std::abs(parentValues[i] - parentValue);
        if (d < bestDist) {
            best = i;
            bestDist = d;
        }
    }
    return best;
}

GraphMessage makeMessage(MessageKind k, AgentId sender) {
    GraphMessage m;
    m.kind = k;
    m.sender = sender;
    return m;
}

GraphMessage makeAnnounceResponse(AgentId sender, int childCount) {
    GraphMessage m;
    m.kind = MessageKind::AnnounceResponse;
    m.sender = sender;
    m.childCount = childCount;
    return m;
}

GraphMessage makeSolverMessage(AgentId sender, SolverData data) {
    GraphMessage m;
    m.kind = MessageKind::SolverPayload;
    m.sender = sender;
    m.solver = std::move(data);
    return m;
}

}  // namespace digca
