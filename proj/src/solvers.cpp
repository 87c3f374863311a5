#include "digca/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace digca {

namespace {

double selfCoeff(const IncidentEdge& e) { return e.selfIsLow ? e.k.a : e.k.c; }

// Cost of one edge given our value; only meaningful when the neighbor value is
// known.
double assignedEdgeCost(const IncidentEdge& e, double own) {
    return e.selfIsLow ? evalConstraint(e.k, own, *e.neighborValue)
                       : evalConstraint(e.k, *e.neighborValue, own);
}

// Child tables are keyed by our own samples, so the exact lookup is the normal
// path; nearest is a defensive fallback only.
double lookupCost(const UtilTable& t, double ownValue) {
    if (t.empty()) return 0.0;
    size_t idx = t.indexOf(ownValue);
    if (idx == t.parentValues.size()) idx = t.nearestIndex(ownValue);
    return t.cost[idx];
}

}  // namespace

std::optional<double> analyticRefine(const std::vector<IncidentEdge>& edges, double lo,
                                     double hi) {
    double sumAlpha = 0.0;
    double sumBeta = 0.0;
    for (const IncidentEdge& e : edges) {
        if (!e.neighborValue) continue;
        sumAlpha += selfCoeff(e);
        sumBeta += e.k.b * *e.neighborValue;
    }
    if (sumAlpha <= 0.0) return std::nullopt;  // no interior minimum
    return std::clamp(-sumBeta / (2.0 * sumAlpha), lo, hi);
}

double topDownChoose(const std::vector<double>& samples, double lo, double hi,
                     const std::vector<IncidentEdge>& edges, bool refine) {
    if (samples.empty()) return 0.0;

    bool anyAssigned =
        std::any_of(edges.begin(), edges.end(),
                    [](const IncidentEdge& e) { return e.neighborValue.has_value(); });
    if (!anyAssigned) {
        if (edges.empty()) return samples.front();
        // Nothing to coordinate with yet: minimize our own squared-term total.
        double sumSelf = 0.0;
        for (const IncidentEdge& e : edges) sumSelf += selfCoeff(e);
        double best = samples.front();
        double bestCost = sumSelf * best * best;
        for (double v : samples) {
            double c = sumSelf * v * v;
            if (c < bestCost) {
                bestCost = c;
                best = v;
            }
        }
        return best;
    }

    std::vector<double> candidates = samples;
    if (refine) {
        if (auto r = analyticRefine(edges, lo, hi)) {
            candidates.push_back(*r);
        } else {
            // Concave/degenerate quadratic: the interval minimum sits at a bound.
            candidates.push_back(lo);
            candidates.push_back(hi);
        }
    }

    auto totalCost = [&](double v) {
        double c = 0.0;
        for (const IncidentEdge& e : edges) {
            if (e.neighborValue) c += assignedEdgeCost(e, v);
        }
        return c;
    };
    double best = candidates.front();
    double bestCost = totalCost(best);
    for (double v : candidates) {
        double c = totalCost(v);
        if (c < bestCost) {
            bestCost = c;
            best = v;
        }
    }
    return best;
}

UtilTable buildUtilTable(const std::vector<double>& parentSamples,
                         const std::vector<double>& ownSamples, const Coefficients& parentEdge,
                         bool selfIsLow, const std::vector<const UtilTable*>& childTables) {
    UtilTable t;
    t.parentValues = parentSamples;
    t.cost.reserve(parentSamples.size());
    t.bestOwn.reserve(parentSamples.size());
    for (double p : parentSamples) {
        double bestCost = std::numeric_limits<double>::infinity();
        double bestOwn = ownSamples.empty() ? 0.0 : ownSamples.front();
        for (double v : ownSamples) {
            double c = selfIsLow ? evalConstraint(parentEdge, v, p)
                                 : evalConstraint(parentEdge, p, v);
            for (const UtilTable* ct : childTables) c += lookupCost(*ct, v);
            if (c < bestCost) {
                bestCost = c;
                bestOwn = v;
            }
        }
        if (ownSamples.empty()) bestCost = 0.0;
        t.cost.push_back(bestCost);
        t.bestOwn.push_back(bestOwn);
    }
    return t;
}

double chooseValueFromUtil(const UtilTable& table, std::optional<double> parentValue,
                           bool* usedNearest) {
    if (usedNearest) *usedNearest = false;
    if (table.empty()) return 0.0;
    size_t idx = 0;
    if (parentValue) {
        idx = table.indexOf(*parentValue);
        if (idx == table.parentValues.size()) {
            idx = table.nearestIndex(*parentValue);
            if (usedNearest) *usedNearest = true;
        }
    } else {
        for (size_t i = 1; i < table.cost.size(); ++i) {
            if (table.cost[i] < table.cost[idx]) idx = i;
        }
    }
    return table.bestOwn[idx];
}

bool shouldPropagate(const std::optional<UtilTable>& previousSent, const UtilTable& next,
                     double tol) {
    if (!previousSent) return true;
    const UtilTable& prev = *previousSent;
    if (prev.parentValues.size() != next.parentValues.size()) return true;
    for (size_t i = 0; i < next.parentValues.size(); ++i) {
        if (prev.parentValues[i] != next.parentValues[i]) return true;
        if (std::abs(prev.cost[i] - next.cost[i]) > tol) return true;
        if (std::abs(prev.bestOwn[i] - next.bestOwn[i]) > tol) return true;
    }
    return false;
}

namespace {

// Edges to every current neighbor, oriented from our side, with the parent's
// value filled in when we have heard one.
std::vector<IncidentEdge> incidentEdges(const Agent& self, const AgentHost& host) {
    std::vector<IncidentEdge> out;
    for (AgentId n : self.neighbors()) {
        const Coefficients* k = host.edgeCoefficients(self.id, n);
        if (!k) continue;  // register/edge teardown race; the sweep will settle it
        IncidentEdge e;
        e.k = *k;
        e.selfIsLow = self.id < n;
        if (self.parent && *self.parent == n) e.neighborValue = self.solver.knownParentValue;
        out.push_back(e);
    }
    return out;
}

void sendValue(Agent& self, AgentHost& host, AgentId child, double value) {
    SolverData d;
    d.kind = SolverMessageKind::Value;
    d.value = value;
    host.send(self.id, child, makeSolverMessage(self.id, std::move(d)));
    self.solver.valueDelivered.insert(child);
}

void floodValue(Agent& self, AgentHost& host, double value) {
    self.solver.lastFloodedValue = value;
    self.solver.valueDelivered.clear();
    for (AgentId c : self.children) sendValue(self, host, c, value);
}

// A child that attached after our last flood has never heard the standing
// decision; hand it over without re-waking the rest of the subtree.
void catchUpValue(Agent& self, AgentHost& host, double value) {
    for (AgentId c : self.children) {
        if (!self.solver.valueDelivered.count(c)) sendValue(self, host, c, value);
    }
}

void topDownStep(Agent& self, AgentHost& host, const SolverConfig& cfg) {
    double v = topDownChoose(self.domain.samples, self.domain.lower, self.domain.upper,
                             incidentEdges(self, host), cfg.analyticRefinement);
    self.currentValue = v;
    floodValue(self, host, v);  // children re-decide against the new value
}

void bottomUpStep(Agent& self, AgentHost& host, const SolverConfig& cfg) {
    SolverState& sv = self.solver;

    if (!self.parent) {
        // Root: combine the children's tables over our own samples and decide.
        std::vector<const UtilTable*> tables;
        tables.reserve(self.children.size());
        for (AgentId c : self.children) {
            auto it = sv.childTables.find(c);
            if (it == sv.childTables.end()) return;  // wait for the missing table
            tables.push_back(&it->second);
        }
        UtilTable agg;
        agg.parentValues = self.domain.samples;
        for (double v : self.domain.samples) {
            double c = 0.0;
            for (const UtilTable* t : tables) c += lookupCost(*t, v);
            agg.cost.push_back(c);
            agg.bestOwn.push_back(v);
        }
        double v = chooseValueFromUtil(agg, std::nullopt);
        self.currentValue = v;
        bool changed =
            !sv.lastFloodedValue || std::abs(*sv.lastFloodedValue - v) > cfg.tolerance;
        if (changed) {
            floodValue(self, host, v);
        } else {
            catchUpValue(self, host, v);
        }
        return;
    }

    // Non-root: we need the parent's samples before we can build its table.
    if (sv.parentSamples.empty()) {
        if (!sv.domainRequestPending) {
            SolverData d;
            d.kind = SolverMessageKind::DomainRequest;
            host.send(self.id, *self.parent, makeSolverMessage(self.id, std::move(d)));
            sv.domainRequestPending = true;
        }
        return;
    }

    std::vector<const UtilTable*> tables;
    tables.reserve(self.children.size());
    for (AgentId c : self.children) {
        auto it = sv.childTables.find(c);
        if (it == sv.childTables.end()) return;  // wait for the missing table
        tables.push_back(&it->second);
    }

    const Coefficients* k = host.edgeCoefficients(self.id, *self.parent);
    Coefficients edge = k ? *k : Coefficients{};
    if (!k) host.countWarning("missing-parent-edge");

    UtilTable table = buildUtilTable(sv.parentSamples, self.domain.samples, edge,
                                     self.id < *self.parent, tables);
    sv.lastBuiltTable = table;

    if (!cfg.faultContainment || shouldPropagate(sv.lastSentTable, table, cfg.tolerance)) {
        SolverData d;
        d.kind = SolverMessageKind::Util;
        d.table = table;
        host.send(self.id, *self.parent, makeSolverMessage(self.id, std::move(d)));
        sv.lastSentTable = std::move(table);
    }

    // If the parent already told us its value, our best response may have
    // moved with the rebuilt table.
    if (sv.knownParentValue) {
        bool nearest = false;
        double v = chooseValueFromUtil(*sv.lastBuiltTable, sv.knownParentValue, &nearest);
        if (nearest) host.countWarning("stale-parent-value");
        self.currentValue = v;
        bool changed =
            !sv.lastFloodedValue || std::abs(*sv.lastFloodedValue - v) > cfg.tolerance;
        if (changed) {
            floodValue(self, host, v);
        } else {
            catchUpValue(self, host, v);
        }
    }
}

// Parent announced its decision (bottom-up value phase).
void adoptParentValue(Agent& self, AgentHost& host, double parentValue,
                      const SolverConfig& cfg) {
    SolverState& sv = self.solver;
    sv.knownParentValue = parentValue;
    double v;
    if (sv.lastBuiltTable) {
        bool nearest = false;
        v = chooseValueFromUtil(*sv.lastBuiltTable, parentValue, &nearest);
        if (nearest) host.countWarning("stale-parent-value");
    } else {
        // No table yet (value phase outran our build): best sample against the
        // parent edge alone.
        v = topDownChoose(self.domain.samples, self.domain.lower, self.domain.upper,
                          incidentEdges(self, host), false);
    }
    self.currentValue = v;
    floodValue(self, host, v);  // unconditional: the wave must reach the leaves
    (void)cfg;
}

}  // namespace

void runSolver(Agent& self, AgentHost& host, const SolverConfig& cfg) {
    switch (cfg.order) {
        case ExecutionOrder::None: return;
        case ExecutionOrder::TopDown: topDownStep(self, host, cfg); return;
        case ExecutionOrder::BottomUp: bottomUpStep(self, host, cfg); return;
    }
}

void receiveSolverPayload(Agent& self, AgentHost& host, AgentId from, const SolverData& data,
                          const SolverConfig& cfg) {
    switch (data.kind) {
        case SolverMessageKind::DomainRequest: {
            if (!self.children.count(from)) {
                host.countWarning("domain-request-from-non-child");
                return;
            }
            SolverData d;
            d.kind = SolverMessageKind::DomainInfo;
            d.samples = self.domain.samples;
            host.send(self.id, from, makeSolverMessage(self.id, std::move(d)));
            return;
        }
        case SolverMessageKind::DomainInfo: {
            if (!self.parent || *self.parent != from) {
                host.countWarning("domain-info-from-non-parent");
                return;
            }
            self.solver.parentSamples = data.samples;
            self.solver.domainRequestPending = false;
            if (cfg.order == ExecutionOrder::BottomUp) bottomUpStep(self, host, cfg);
            return;
        }
        case SolverMessageKind::Util: {
            if (!self.children.count(from)) {
                host.countWarning("util-from-non-child");
                return;
            }
            self.solver.childTables[from] = data.table;
            if (cfg.order == ExecutionOrder::BottomUp) bottomUpStep(self, host, cfg);
            return;
        }
        case SolverMessageKind::Value: {
            if (!self.parent || *self.parent != from) {
                host.countWarning("value-from-non-parent");
                return;
            }
            if (cfg.order == ExecutionOrder::BottomUp) {
                adoptParentValue(self, host, data.value, cfg);
            } else if (cfg.order == ExecutionOrder::TopDown) {
                self.solver.knownParentValue = data.value;
                topDownStep(self, host, cfg);
            }
            return;
        }
        case SolverMessageKind::None: host.countWarning("malformed-solver-payload"); return;
    }
}

}  // namespace digca
