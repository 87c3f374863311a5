#include <cmath>
#include <optional>
#include <vector>

#include "digca/rng.hpp"
#include "digca/solvers.hpp"
#include "doctest.h"
#include "test_host.hpp"

using namespace digca;
using namespace digca::testing;

namespace {

AgentId id(uint32_t i) { return AgentId{i}; }

IncidentEdge edge(Coefficients k, bool selfIsLow, std::optional<double> neighbor) {
    IncidentEdge e;
    e.k = k;
    e.selfIsLow = selfIsLow;
    e.neighborValue = neighbor;
    return e;
}

// Independent local objective: all edges with a known neighbor value, at our
// candidate v.
double localCost(const std::vector<IncidentEdge>& edges, double v) {
    double c = 0.0;
    for (const IncidentEdge& e : edges) {
        if (!e.neighborValue) continue;
        c += e.selfIsLow ? evalConstraint(e.k, v, *e.neighborValue)
                         : evalConstraint(e.k, *e.neighborValue, v);
    }
    return c;
}

}  // namespace

TEST_CASE("analytic refinement: frozen cases") {
    SUBCASE("single convex edge lands on the vertex") {
        // d/dv (v^2 - 2*3*v) = 0  =>  v = 3
        auto r = analyticRefine({edge({1, -2, 0}, true, 3.0)}, -50, 50);
        REQUIRE(r.has_value());
        CHECK(*r == doctest::Approx(3.0).epsilon(1e-12));
    }
    SUBCASE("non-convex direction yields nothing") {
        CHECK_FALSE(analyticRefine({edge({-1, 2, 0}, true, 3.0)}, -50, 50).has_value());
        CHECK_FALSE(analyticRefine({}, -50, 50).has_value());
    }
    SUBCASE("the vertex is clamped into the domain") {
        // v* = -(-3*50)/(2*1) = 75, outside [-50, 50]
        auto r = analyticRefine({edge({1, -3, 0}, true, 50.0)}, -50, 50);
        REQUIRE(r.has_value());
        CHECK(*r == doctest::Approx(50.0).epsilon(1e-12));
    }
    SUBCASE("the self-side coefficient depends on edge orientation") {
        // As the high endpoint, our squared term is c, not a.
        auto r = analyticRefine({edge({0, -2, 1}, false, 3.0)}, -50, 50);
        REQUIRE(r.has_value());
        CHECK(*r == doctest::Approx(3.0).epsilon(1e-12));
    }
    SUBCASE("edges with unknown neighbors do not contribute") {
        auto r = analyticRefine(
            {edge({1, -2, 0}, true, 3.0), edge({5, 5, 5}, true, std::nullopt)}, -50, 50);
        REQUIRE(r.has_value());
        CHECK(*r == doctest::Approx(3.0).epsilon(1e-12));
    }
}

TEST_CASE("greedy choice: frozen cases") {
    SUBCASE("no edges at all falls back to the first sample") {
        CHECK(topDownChoose({-10, 0, 42}, -50, 50, {}, true) == -10.0);
    }
    SUBCASE("unassigned edges: minimize our own squared terms") {
        std::vector<IncidentEdge> es = {edge({2, 1, 1}, true, std::nullopt)};
        CHECK(topDownChoose({-10, 0, 42}, -50, 50, es, true) == 0.0);
    }
    SUBCASE("assigned parent edge with refinement finds the vertex") {
        std::vector<IncidentEdge> es = {edge({1, -2, 0}, true, 3.0)};
        CHECK(topDownChoose({0, 1, 5}, -50, 50, es, true) == doctest::Approx(3.0));
    }
    SUBCASE("without refinement the best sample wins") {
        std::vector<IncidentEdge> es = {edge({1, -2, 0}, true, 3.0)};
        // cost(0) = 0, cost(1) = -5, cost(5) = -5: first minimum wins
        CHECK(topDownChoose({0, 1, 5}, -50, 50, es, false) == doctest::Approx(1.0));
    }
}

TEST_CASE("greedy choice: refinement never loses to samples alone") {
    RngStream rng(5150);
    for (int t = 0; t < 2000; ++t) {
        std::vector<double> samples;
        size_t n = 2 + rng.index(4);
        for (size_t i = 0; i < n; ++i) samples.push_back(rng.uniform(-50, 50));
        std::vector<IncidentEdge> edges;
        size_t m = rng.index(5);
        for (size_t e = 0; e < m; ++e) {
            std::optional<double> neighbor;
            if (rng.index(4) != 0) neighbor = rng.uniform(-50, 50);
            edges.push_back(edge(sampleCoefficients(rng), rng.index(2) == 0, neighbor));
        }
        double refined = topDownChoose(samples, -50, 50, edges, true);
        double plain = topDownChoose(samples, -50, 50, edges, false);
        CHECK(localCost(edges, refined) <= localCost(edges, plain) + 1e-9);
        CHECK(refined >= -50);
        CHECK(refined <= 50);
    }
}

TEST_CASE("util tables: frozen cases") {
    SUBCASE("leaf with a bilinear edge") {
        UtilTable t = buildUtilTable({1, 2}, {0, 1}, {0, 1, 0}, false, {});
        REQUIRE(t.parentValues == std::vector<double>{1, 2});
        // f(p, v) = p*v, minimized at v=0 for both parent candidates.
        CHECK(t.cost == std::vector<double>{0, 0});
        CHECK(t.bestOwn == std::vector<double>{0, 0});
    }
    SUBCASE("all-zero edge gives the zero table") {
        UtilTable t = buildUtilTable({-3, 3}, {5, 6}, {0, 0, 0}, false, {});
        CHECK(t.cost == std::vector<double>{0, 0});
        CHECK(t.bestOwn == std::vector<double>{5, 5});  // first own sample on ties
    }
    SUBCASE("child tables fold into the parent view") {
        // Child table keyed by OUR samples {0, 1}: cost 10 at 0, 0 at 1.
        UtilTable child{{0, 1}, {10, 0}, {7, 7}};
        UtilTable t = buildUtilTable({1, 2}, {0, 1}, {0, 1, 0}, false, {&child});
        // p=1: min(0*1+10, 1*1+0) = 1 at v=1; p=2: min(10, 2) = 2 at v=1.
        CHECK(t.cost == std::vector<double>{1, 2});
        CHECK(t.bestOwn == std::vector<double>{1, 1});
    }
}

TEST_CASE("value choice from a util table: frozen cases") {
    UtilTable t{{-10, 0, 42}, {5, 1, 9}, {2.5, 7.5, -1}};
    SUBCASE("no parent value: global minimum row") {
        bool nearest = true;
        CHECK(chooseValueFromUtil(t, std::nullopt, &nearest) == doctest::Approx(7.5));
        CHECK_FALSE(nearest);
    }
    SUBCASE("exact parent value: its best response") {
        CHECK(chooseValueFromUtil(t, 0.0) == doctest::Approx(7.5));
        CHECK(chooseValueFromUtil(t, 42.0) == doctest::Approx(-1.0));
    }
    SUBCASE("an unknown parent value snaps to the nearest key") {
        bool nearest = false;
        CHECK(chooseValueFromUtil(t, 40.0, &nearest) == doctest::Approx(-1.0));
        CHECK(nearest);
    }
}

TEST_CASE("table propagation filter: frozen cases") {
    UtilTable t{{1, 2}, {3, 4}, {5, 6}};
    SUBCASE("nothing sent yet always propagates") {
        CHECK(shouldPropagate(std::nullopt, t, 1e-9));
    }
    SUBCASE("an identical table is contained") {
        CHECK_FALSE(shouldPropagate(t, t, 1e-9));
    }
    SUBCASE("a sub-tolerance wiggle is contained") {
        UtilTable u = t;
        u.cost[0] += 1e-12;
        CHECK_FALSE(shouldPropagate(t, u, 1e-9));
    }
    SUBCASE("a cost change beyond tolerance propagates") {
        UtilTable u = t;
        u.cost[0] += 0.5;
        CHECK(shouldPropagate(t, u, 1e-9));
    }
    SUBCASE("a best-response change propagates even at equal cost") {
        UtilTable u = t;
        u.bestOwn[1] = 0.0;
        CHECK(shouldPropagate(t, u, 1e-9));
    }
    SUBCASE("different keys propagate") {
        UtilTable u = t;
        u.parentValues[0] = 0.0;
        CHECK(shouldPropagate(t, u, 1e-9));
    }
}

TEST_CASE("top-down run: decide, assign, flood to children in order") {
    RecordingHost host;
    SolverConfig cfg;
    cfg.order = ExecutionOrder::TopDown;
    Agent a = makeAgent(2, ExecutionOrder::TopDown, {0, 1, 5});
    a.children = {id(9), id(7)};
    host.edges[PairKey(id(2), id(7))] = {0, 0, 0};
    host.edges[PairKey(id(2), id(9))] = {0, 0, 0};

    runSolver(a, host, cfg);

    CHECK(a.currentValue == 0.0);  // zero edges: first sample
    REQUIRE(host.sent.size() == 2);
    CHECK(host.sent[0].to == id(7));
    CHECK(host.sent[1].to == id(9));
    for (const SentMessage& s : host.sent) {
        CHECK(s.msg.kind == MessageKind::SolverPayload);
        CHECK(s.msg.solver.kind == SolverMessageKind::Value);
        CHECK(s.msg.solver.value == 0.0);
    }
}

TEST_CASE("top-down run: a child re-decides against the parent's value") {
    RecordingHost host;
    SolverConfig cfg;
    cfg.order = ExecutionOrder::TopDown;
    Agent a = makeAgent(9, ExecutionOrder::TopDown, {0, 1, 5});
    a.parent = id(2);
    host.edges[PairKey(id(2), id(9))] = {0, -2, 1};  // we are the high endpoint

    SolverData v;
    v.kind = SolverMessageKind::Value;
    v.value = 3.0;
    receiveSolverPayload(a, host, id(2), v, cfg);

    // cost(v) = v^2 - 6v, vertex at 3.
    CHECK(a.currentValue == doctest::Approx(3.0));
    CHECK(a.solver.knownParentValue == 3.0);
}

TEST_CASE("bottom-up run: a child first asks for the parent's domain, once") {
    RecordingHost host;
    SolverConfig cfg;
    cfg.order = ExecutionOrder::BottomUp;
    Agent a = makeAgent(9, ExecutionOrder::BottomUp);
    a.parent = id(2);

    runSolver(a, host, cfg);
    runSolver(a, host, cfg);  // second trigger while the request is in flight

    CHECK(host.sentSolverOfKind(SolverMessageKind::DomainRequest) == 1);
    CHECK(a.solver.domainRequestPending);
}

TEST_CASE("bottom-up run: domain info unlocks the util table toward the parent") {
    RecordingHost host;
    SolverConfig cfg;
    cfg.order = ExecutionOrder::BottomUp;
    Agent a = makeAgent(9, ExecutionOrder::BottomUp, {0, 1});
    a.parent = id(2);
    host.edges[PairKey(id(2), id(9))] = {0, 1, 0};

    SolverData info;
    info.kind = SolverMessageKind::DomainInfo;
    info.samples = {1, 2};
    receiveSolverPayload(a, host, id(2), info, cfg);

    CHECK(a.solver.parentSamples == std::vector<double>{1, 2});
    CHECK_FALSE(a.solver.domainRequestPending);
    REQUIRE(host.sentSolverOfKind(SolverMessageKind::Util) == 1);
    const UtilTable& sent = host.sent.back().msg.solver.table;
    CHECK(sent.parentValues == std::vector<double>{1, 2});
    CHECK(sent.cost == std::vector<double>{0, 0});
    REQUIRE(a.solver.lastBuiltTable.has_value());
    REQUIRE(a.solver.lastSentTable.has_value());
}

TEST_CASE("bottom-up run: containment suppresses unchanged tables") {
    RecordingHost host;
    SolverConfig cfg;
    cfg.order = ExecutionOrder::BottomUp;
    Agent a = makeAgent(9, ExecutionOrder::BottomUp, {0, 1});
    a.parent = id(2);
    a.solver.parentSamples = {1, 2};
    host.edges[PairKey(id(2), id(9))] = {0, 1, 0};

    runSolver(a, host, cfg);
    CHECK(host.sentSolverOfKind(SolverMessageKind::Util) == 1);
    runSolver(a, host, cfg);  // identical rebuild: contained
    CHECK(host.sentSolverOfKind(SolverMessageKind::Util) == 1);

    host.edges[PairKey(id(2), id(9))] = {0, -2, 0};  // the constraint moved
    runSolver(a, host, cfg);
    CHECK(host.sentSolverOfKind(SolverMessageKind::Util) == 2);

    SUBCASE("with containment off every rebuild is sent") {
        cfg.faultContainment = false;
        runSolver(a, host, cfg);
        runSolver(a, host, cfg);
        CHECK(host.sentSolverOfKind(SolverMessageKind::Util) == 4);
    }
}

TEST_CASE("bottom-up run: a parent waits for all child tables") {
    RecordingHost host;
    SolverConfig cfg;
    cfg.order = ExecutionOrder::BottomUp;
    Agent a = makeAgent(9, ExecutionOrder::BottomUp, {0, 1});
    a.parent = id(2);
    a.children = {id(11), id(12)};
    a.solver.parentSamples = {1, 2};
    host.edges[PairKey(id(2), id(9))] = {0, 1, 0};

    runSolver(a, host, cfg);
    CHECK(host.sentSolverOfKind(SolverMessageKind::Util) == 0);  // tables missing: defer

    SolverData util;
    util.kind = SolverMessageKind::Util;
    util.table = UtilTable{{0, 1}, {0, 0}, {0, 0}};
    receiveSolverPayload(a, host, id(11), util, cfg);
    CHECK(host.sentSolverOfKind(SolverMessageKind::Util) == 0);  // one still missing
    receiveSolverPayload(a, host, id(12), util, cfg);
    CHECK(host.sentSolverOfKind(SolverMessageKind::Util) == 1);  // complete: forward up
}

TEST_CASE("bottom-up run: the root aggregates tables and floods its decision") {
    RecordingHost host;
    SolverConfig cfg;
    cfg.order = ExecutionOrder::BottomUp;
    Agent root = makeAgent(0, ExecutionOrder::BottomUp, {-1, 1});
    root.children = {id(3)};
    // Child's table keyed by OUR samples: prefers -1 heavily.
    root.solver.childTables[id(3)] = UtilTable{{-1, 1}, {0, 10}, {4, 5}};

    runSolver(root, host, cfg);

    CHECK(root.currentValue == -1.0);
    REQUIRE(host.sentSolverOfKind(SolverMessageKind::Value) == 1);
    CHECK(host.sent.back().msg.solver.value == -1.0);

    // Re-running with nothing changed floods nothing new.
    runSolver(root, host, cfg);
    CHECK(host.sentSolverOfKind(SolverMessageKind::Value) == 1);
}

TEST_CASE("bottom-up run: a late-attached child is handed the standing decision") {
    SolverConfig cfg;
    cfg.order = ExecutionOrder::BottomUp;

    SUBCASE("at the root") {
        RecordingHost host;
        Agent root = makeAgent(0, ExecutionOrder::BottomUp, {-1, 1});
        root.children = {id(3)};
        root.solver.childTables[id(3)] = UtilTable{{-1, 1}, {0, 10}, {4, 5}};
        runSolver(root, host, cfg);
        REQUIRE(host.sentSolverOfKind(SolverMessageKind::Value) == 1);

        // A new child appears whose table does not move the decision.
        root.children.insert(id(5));
        root.solver.childTables[id(5)] = UtilTable{{-1, 1}, {0, 0}, {0, 0}};
        runSolver(root, host, cfg);

        // Only the newcomer is told the (unchanged) value.
        REQUIRE(host.sentSolverOfKind(SolverMessageKind::Value) == 2);
        CHECK(host.sent.back().to == id(5));
        CHECK(host.sent.back().msg.solver.value == -1.0);

        runSolver(root, host, cfg);
        CHECK(host.sentSolverOfKind(SolverMessageKind::Value) == 2);
    }

    SUBCASE("below the root") {
        RecordingHost host;
        Agent a = makeAgent(5, ExecutionOrder::BottomUp, {0, 1});
        a.parent = id(1);
        a.children = {id(9)};
        host.edges[PairKey(id(1), id(5))] = {0, 1, 0};
        a.solver.parentSamples = {2, 3};
        a.solver.knownParentValue = 2.0;
        a.solver.childTables[id(9)] = UtilTable{{0, 1}, {0, 0}, {0, 0}};
        runSolver(a, host, cfg);
        REQUIRE(host.sentSolverOfKind(SolverMessageKind::Value) == 1);
        CHECK(a.currentValue == 0.0);  // x·y at y=2: own sample 0 beats 1

        a.children.insert(id(11));
        a.solver.childTables[id(11)] = UtilTable{{0, 1}, {0, 0}, {0, 0}};
        runSolver(a, host, cfg);

        REQUIRE(host.sentSolverOfKind(SolverMessageKind::Value) == 2);
        CHECK(host.sent.back().to == id(11));
        CHECK(host.sent.back().msg.solver.value == 0.0);

        runSolver(a, host, cfg);
        CHECK(host.sentSolverOfKind(SolverMessageKind::Value) == 2);
    }
}

TEST_CASE("bottom-up run: a value adoption picks the tabled best response") {
    RecordingHost host;
    SolverConfig cfg;
    cfg.order = ExecutionOrder::BottomUp;
    Agent a = makeAgent(9, ExecutionOrder::BottomUp, {0, 1});
    a.parent = id(2);
    a.children = {id(11)};
    a.solver.lastBuiltTable = UtilTable{{1, 2}, {0, 0}, {0.25, 0.75}};

    SolverData v;
    v.kind = SolverMessageKind::Value;
    v.value = 2.0;
    receiveSolverPayload(a, host, id(2), v, cfg);

    CHECK(a.currentValue == doctest::Approx(0.75));
    // The wave continues downward unconditionally.
    REQUIRE(host.sentSolverOfKind(SolverMessageKind::Value) == 1);
    CHECK(host.sent.back().to == id(11));
    CHECK(host.warnings.empty());

    SUBCASE("a value off the table keys is flagged as stale") {
        v.value = 1.6;
        receiveSolverPayload(a, host, id(2), v, cfg);
        CHECK(host.warnings.count("stale-parent-value") == 1);
        CHECK(a.currentValue == doctest::Approx(0.75));  // nearest key: 2
    }
}

TEST_CASE("solver payload relation guards") {
    SolverConfig cfg;
    cfg.order = ExecutionOrder::BottomUp;
    SUBCASE("domain request from a stranger") {
        RecordingHost host;
        Agent a = makeAgent(2, ExecutionOrder::BottomUp);
        SolverData d;
        d.kind = SolverMessageKind::DomainRequest;
        receiveSolverPayload(a, host, id(9), d, cfg);
        CHECK(host.sent.empty());
        CHECK(host.warnings.count("domain-request-from-non-child") == 1);
    }
    SUBCASE("domain request from a child is answered with our samples") {
        RecordingHost host;
        Agent a = makeAgent(2, ExecutionOrder::BottomUp, {4, 5});
        a.children = {id(9)};
        SolverData d;
        d.kind = SolverMessageKind::DomainRequest;
        receiveSolverPayload(a, host, id(9), d, cfg);
        REQUIRE(host.sentSolverOfKind(SolverMessageKind::DomainInfo) == 1);
        CHECK(host.sent.back().msg.solver.samples == std::vector<double>{4, 5});
    }
    SUBCASE("domain info from a non-parent") {
        RecordingHost host;
        Agent a = makeAgent(9, ExecutionOrder::BottomUp);
        SolverData d;
        d.kind = SolverMessageKind::DomainInfo;
        d.samples = {1};
        receiveSolverPayload(a, host, id(2), d, cfg);
        CHECK(a.solver.parentSamples.empty());
        CHECK(host.warnings.count("domain-info-from-non-parent") == 1);
    }
    SUBCASE("util from a non-child") {
        RecordingHost host;
        Agent a = makeAgent(2, ExecutionOrder::BottomUp);
        SolverData d;
        d.kind = SolverMessageKind::Util;
        receiveSolverPayload(a, host, id(9), d, cfg);
        CHECK(a.solver.childTables.empty());
        CHECK(host.warnings.count("util-from-non-child") == 1);
    }
    SUBCASE("value from a non-parent") {
        RecordingHost host;
        Agent a = makeAgent(9, ExecutionOrder::BottomUp);
        SolverData d;
        d.kind = SolverMessageKind::Value;
        d.value = 1.0;
        receiveSolverPayload(a, host, id(2), d, cfg);
        CHECK_FALSE(a.solver.knownParentValue.has_value());
        CHECK(host.warnings.count("value-from-non-parent") == 1);
    }
    SUBCASE("an empty payload is malformed") {
        RecordingHost host;
        Agent a = makeAgent(9, ExecutionOrder::BottomUp);
        SolverData d;
        d.kind = SolverMessageKind::None;
        receiveSolverPayload(a, host, id(2), d, cfg);
        CHECK(host.warnings.count("malformed-solver-payload") == 1);
    }
}
