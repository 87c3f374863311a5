#include "digca/sim.hpp"

#include <queue>
#include <set>
#include <utility>

#include "digca/liveness.hpp"
#include "digca/protocol.hpp"
#include "digca/rng.hpp"
#include "json.hpp"

namespace digca {

namespace {

using nlohmann::json;

// A change-free span this long before the end of the run counts as stabilized.
constexpr double kQuietTail = 5.0;

enum class TimerKind { Connect, ConnectFinish, KeepAlive, Inspect, SolverRun };

struct QueuedEvent {
    double at = 0.0;
    uint64_t seq = 0;
    enum class Kind { Deliver, Timer, Env, Snapshot } kind = Kind::Deliver;

    AgentId to;        // Deliver
    GraphMessage msg;  // Deliver

    TimerKind timer = TimerKind::Connect;  // Timer
    AgentId who;                           // Timer
    uint64_t token = 0;                    // Timer(SolverRun): debounce token

    size_t envIndex = 0;  // Env: index into the script

    int snapshotIndex = -1;      // Snapshot: index of the event it trails
    bool finalSnapshot = false;  // Snapshot: run ends after this one
};

struct LaterEvent {
    bool operator()(const QueuedEvent& a, const QueuedEvent& b) const {
        if (a.at != b.at) return a.at > b.at;
        return a.seq > b.seq;
    }
};

class Sim final : public AgentHost {
  public:
    Sim(const SimConfig& cfg, std::vector<EnvironmentEvent> script)
        : cfg_(cfg),
          script_(std::move(script)),
          env_(cfg.problemSeed, cfg.domain),
          counters_(cfg.policy),
          protocolDelay_(deriveSeed(cfg.runSeed, "delay-protocol")),
          solverDelay_(deriveSeed(cfg.runSeed, "delay-solver")),
          eventRng_(deriveSeed(cfg.runSeed, "events")) {}

    RunResult run();

    // --- AgentHost ---
    double now() const override { return now_; }

    void send(AgentId from, AgentId to, const GraphMessage& msg) override {
        (void)from;
        enqueueDelivery(to, msg);
    }

    void broadcast(AgentId from, const GraphMessage& msg) override {
        for (const auto& [id, agent] : agents_) {
            if (id != from) enqueueDelivery(id, msg);
        }
    }

    void armConnectFinish(AgentId who) override {
        enqueueTimer(now_ + cfg_.timers.announceWaitPeriod, TimerKind::ConnectFinish, who, 0);
    }

    void requestSolverRun(AgentId who, TriggerReason reason) override {
        auto it = agents_.find(who);
        if (it == agents_.end() || it->second.order == ExecutionOrder::None) return;
        counters_.countTrigger(reason);
        uint64_t token = ++it->second.solver.runToken;
        enqueueTimer(now_ + cfg_.timers.settleDelay, TimerKind::SolverRun, who, token);
    }

    void createEdge(AgentId a, AgentId b) override {
        PairKey key(a, b);
        // A surviving edge is kept as-is: re-accepting a child we never
        // dropped must not reshuffle its constraint.
        if (!env_.hasEdge(key)) env_.createEdge(key);
    }

    void destroyEdge(AgentId a, AgentId b) override { env_.destroyEdge(PairKey(a, b)); }

    const Coefficients* edgeCoefficients(AgentId a, AgentId b) const override {
        return env_.edge(PairKey(a, b));
    }

    void hierarchyMutated(AgentId who) override {
        counters_.recordMutation(agents_.at(who), now_);
    }

    void countWarning(const char* what) override { counters_.countWarning(what); }

  private:
    void enqueue(QueuedEvent ev) {
        ev.seq = seq_++;
        queue_.push(std::move(ev));
    }

    void enqueueDelivery(AgentId to, const GraphMessage& msg) {
        counters_.countSend(msg);
        RngStream& delays =
            msg.kind == MessageKind::SolverPayload ? solverDelay_ : protocolDelay_;
        QueuedEvent ev;
        ev.at = now_ + delays.uniform(cfg_.delay.lo, cfg_.delay.hi);
        ev.kind = QueuedEvent::Kind::Deliver;
        ev.to = to;
        ev.msg = msg;
        ++inFlight_;
        enqueue(std::move(ev));
    }

    void enqueueTimer(double at, TimerKind timer, AgentId who, uint64_t token) {
        QueuedEvent ev;
        ev.at = at;
        ev.kind = QueuedEvent::Kind::Timer;
        ev.timer = timer;
        ev.who = who;
        ev.token = token;
        enqueue(std::move(ev));
    }

    void spawnAgent(AgentId id) {
        if (everSpawned_.count(id)) {
            throw ScriptError("agent id " + std::to_string(id.index) +
                              " spawned twice (ids are never reused)");
        }
        everSpawned_.insert(id);
        Agent agent = initAgent(id, cfg_.solver.order, env_.spawnDomain(id));
        agents_.emplace(id, std::move(agent));

        // Per-agent phase offsets keep mass arrivals from ticking in lockstep
        // and are derived from the id, so one agent's spawn never shifts
        // another's schedule.
        RngStream phase(deriveSeed(cfg_.runSeed, "phase", id.index));
        enqueueTimer(now_ + phase.uniform(0.0, cfg_.timers.connectPeriod), TimerKind::Connect,
                     id, 0);
        if (!cfg_.baselineRestart) {
            enqueueTimer(now_ + phase.uniform(0.0, cfg_.timers.keepAlivePeriod),
                         TimerKind::KeepAlive, id, 0);
            enqueueTimer(now_ + phase.uniform(0.0, cfg_.timers.inspectPeriod),
                         TimerKind::Inspect, id, 0);
        }
        counters_.recordMutation(agents_.at(id), now_);
    }

    void processDeliver(const QueuedEvent& ev) {
        --inFlight_;
        auto it = agents_.find(ev.to);
        if (it == agents_.end()) {
            counters_.countDrop();  // recipient was removed while in flight
            return;
        }
        counters_.countDelivery();
        Agent& agent = it->second;
        const GraphMessage& m = ev.msg;
        switch (m.kind) {
            case MessageKind::Announce:
                receiveAnnounce(agent, *this, m.sender, cfg_.policy);
                break;
            case MessageKind::AnnounceResponse:
                receiveAnnounceResponse(agent, m.sender, m.childCount);
                break;
            case MessageKind::AddMe: receiveAddMe(agent, *this, m.sender, cfg_.policy); break;
            case MessageKind::ChildAdded: receiveChildAdded(agent, *this, m.sender); break;
            case MessageKind::AlreadyActive: receiveAlreadyActive(agent); break;
            case MessageKind::ParentAssigned:
                receiveParentAssigned(agent, *this, m.sender);
                break;
            case MessageKind::KeepAlive: receiveKeepAlive(agent, m.sender); break;
            case MessageKind::SolverPayload:
                receiveSolverPayload(agent, *this, m.sender, m.solver, cfg_.solver);
                break;
        }
    }

    void processTimer(const QueuedEvent& ev) {
        auto it = agents_.find(ev.who);
        if (it == agents_.end()) return;  // removed agents' timers die silently
        Agent& agent = it->second;
        switch (ev.timer) {
            case TimerKind::Connect:
                connectTick(agent, *this);
                enqueueTimer(now_ + cfg_.timers.connectPeriod, TimerKind::Connect, ev.who, 0);
                break;
            case TimerKind::ConnectFinish:
                connectFinish(agent, *this, cfg_.policy, cfg_.timers.stateTimeout);
                break;
            case TimerKind::KeepAlive:
                sendKeepAlives(agent, *this);
                enqueueTimer(now_ + cfg_.timers.keepAlivePeriod, TimerKind::KeepAlive, ev.who,
                             0);
                break;
            case TimerKind::Inspect:
                inspectNeighbors(agent, *this);
                enqueueTimer(now_ + cfg_.timers.inspectPeriod, TimerKind::Inspect, ev.who, 0);
                break;
            case TimerKind::SolverRun:
                if (ev.token == agent.solver.runToken) {
                    runSolver(agent, *this, cfg_.solver);
                }
                break;
        }
    }

    void processEnv(const EnvironmentEvent& ev) {
        switch (ev.kind) {
            case EventKind::AddAgent: {
                if (!ev.agent) throw ScriptError("add event without an agent id");
                spawnAgent(*ev.agent);
                break;
            }
            case EventKind::RemoveAgent: {
                if (agents_.empty()) throw ScriptError("remove event with no live agents");
                AgentId victim;
                if (ev.agent) {
                    if (!agents_.count(*ev.agent)) {
                        throw ScriptError("remove event names absent agent " +
                                          std::to_string(ev.agent->index));
                    }
                    victim = *ev.agent;
                } else {
                    auto it = agents_.begin();
                    std::advance(it, static_cast<long>(eventRng_.index(agents_.size())));
                    victim = it->first;
                }
                removedValues_[victim] = agents_.at(victim).currentValue;
                agents_.erase(victim);
                break;
            }
            case EventKind::ChangeConstraint: {
                if (env_.edges().empty()) {
                    throw ScriptError("change-constraint event with no edges");
                }
                PairKey key;
                if (ev.edge) {
                    if (!env_.hasEdge(*ev.edge)) {
                        throw ScriptError("change-constraint names absent edge (" +
                                          std::to_string(ev.edge->lo.index) + "," +
                                          std::to_string(ev.edge->hi.index) + ")");
                    }
                    key = *ev.edge;
                } else {
                    auto it = env_.edges().begin();
                    std::advance(it, static_cast<long>(eventRng_.index(env_.edges().size())));
                    key = it->first;
                }
                Coefficients k;
                if (ev.coeffs) {
                    k = *ev.coeffs;
                    if (k.a < kCoefficientLo || k.a > kCoefficientHi || k.b < kCoefficientLo ||
                        k.b > kCoefficientHi || k.c < kCoefficientLo || k.c > kCoefficientHi) {
                        throw ScriptError("change-constraint coefficients out of range");
                    }
                } else {
                    k = sampleCoefficients(eventRng_);
                }
                env_.replaceCoefficients(key, k);
                requestSolverRun(key.lo, TriggerReason::ConstraintChanged);
                requestSolverRun(key.hi, TriggerReason::ConstraintChanged);
                break;
            }
        }
        if (cfg_.baselineRestart) baselineReset();
    }

    // Full-restart baseline: after every event the whole hierarchy is torn
    // down and the agents reconnect from scratch. Values survive; everything
    // else starts over.
    void baselineReset() {
        env_.clearEdges();
        for (auto& [id, agent] : agents_) {
            agent.state = ActivityState::Inactive;
            agent.parent.reset();
            agent.children.clear();
            agent.respondents.clear();
            agent.stateDeadline.reset();
            agent.keepAlive.heardFrom.clear();
            SolverState fresh;
            fresh.runToken = agent.solver.runToken + 1;  // void pending runs
            agent.solver = std::move(fresh);
            counters_.recordMutation(agent, now_);
        }
    }

    HierarchySnapshot captureSnapshot() const {
        HierarchySnapshot s;
        s.at = now_;
        for (const auto& [id, agent] : agents_) {
            s.live.insert(id);
            s.parentOf[id] = agent.parent;
            s.childrenOf[id] = agent.children;
        }
        return s;
    }

    double currentCost() const {
        std::map<AgentId, double> values = removedValues_;
        for (const auto& [id, agent] : agents_) values[id] = agent.currentValue;
        return globalCost(env_.edges(), values);
    }

    void processSnapshot(const QueuedEvent& ev) {
        HierarchySnapshot snap = captureSnapshot();
        // Mutual register consistency needs drained handshakes and reaps:
        // asserted only at the final snapshot, and only when the liveness
        // layer runs (the restart baseline never reaps by design).
        bool atQuiescence = ev.finalSnapshot && !cfg_.baselineRestart;
        std::vector<std::string> violations =
            validateHierarchy(snap, cfg_.policy, atQuiescence);
        for (const std::string& v : violations) counters_.recordViolation(now_, v);

        lastCost_ = currentCost();
        lastTreeCount_ = treeCount(snap);
        lastMaxDepth_ = maxDepth(snap);

        json rec;
        rec["type"] = "snapshot";
        rec["at"] = now_;
        rec["eventIndex"] = ev.snapshotIndex;
        rec["final"] = ev.finalSnapshot;
        rec["cost"] = lastCost_;
        rec["live"] = agents_.size();
        rec["treeCount"] = lastTreeCount_;
        rec["maxDepth"] = lastMaxDepth_;
        rec["messages"] = counters_.messagesByKind();
        rec["enqueued"] = counters_.enqueued();
        rec["delivered"] = counters_.delivered();
        rec["dropped"] = counters_.dropped();
        rec["violations"] = violations;
        records_.push_back(rec.dump());
    }

    SimConfig cfg_;
    std::vector<EnvironmentEvent> script_;
    Environment env_;
    std::map<AgentId, Agent> agents_;
    std::set<AgentId> everSpawned_;
    std::map<AgentId, double> removedValues_;
    RunCounters counters_;
    std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, LaterEvent> queue_;
    RngStream protocolDelay_;
    RngStream solverDelay_;
    RngStream eventRng_;
    std::vector<std::string> records_;
    double now_ = 0.0;
    uint64_t seq_ = 0;
    uint64_t inFlight_ = 0;
    double lastCost_ = 0.0;
    int lastTreeCount_ = 0;
    int lastMaxDepth_ = 0;
};

RunResult Sim::run() {
    // Snapshots are queued before anything else so that, on a shared
    // timestamp, the record always captures the state just before the next
    // environment event is applied.
    double lastEventAt = script_.empty() ? 0.0 : script_.back().at;
    double endAt = lastEventAt + cfg_.finalTail;
    if (script_.empty()) {
        QueuedEvent snap;
        snap.at = endAt;
        snap.kind = QueuedEvent::Kind::Snapshot;
        snap.snapshotIndex = -1;
        snap.finalSnapshot = true;
        enqueue(std::move(snap));
    } else {
        for (size_t k = 0; k < script_.size(); ++k) {
            QueuedEvent snap;
            snap.kind = QueuedEvent::Kind::Snapshot;
            snap.snapshotIndex = static_cast<int>(k);
            if (k + 1 < script_.size()) {
                snap.at = script_[k + 1].at;
            } else {
                snap.at = endAt;
                snap.finalSnapshot = true;
            }
            enqueue(std::move(snap));
        }
        for (size_t k = 0; k < script_.size(); ++k) {
            QueuedEvent ev;
            ev.at = script_[k].at;
            ev.kind = QueuedEvent::Kind::Env;
            ev.envIndex = k;
            enqueue(std::move(ev));
        }
    }

    for (int i = 0; i < cfg_.initialAgents; ++i) {
        spawnAgent(AgentId{static_cast<uint32_t>(i)});
    }

    bool done = false;
    while (!done && !queue_.empty()) {
        QueuedEvent ev = queue_.top();
        queue_.pop();
        now_ = ev.at;
        switch (ev.kind) {
            case QueuedEvent::Kind::Deliver: processDeliver(ev); break;
            case QueuedEvent::Kind::Timer: processTimer(ev); break;
            case QueuedEvent::Kind::Env: processEnv(script_[ev.envIndex]); break;
            case QueuedEvent::Kind::Snapshot:
                processSnapshot(ev);
                done = ev.finalSnapshot;
                break;
        }
    }

    RunResult r;
    r.enqueued = counters_.enqueued();
    r.delivered = counters_.delivered();
    r.dropped = counters_.dropped();
    r.undelivered = inFlight_;
    r.totalMessages = counters_.totalMessages();
    r.solverMessages = counters_.solverMessages();
    r.messagesByKind = counters_.messagesByKind();
    r.warnings = counters_.warnings();
    r.triggers = counters_.triggers();
    r.violations = counters_.violations();
    r.lastEventAt = lastEventAt;
    r.endAt = endAt;
    StabilizationResult st =
        checkStabilization(counters_.changeTimes(), lastEventAt, endAt, kQuietTail);
    r.stabilized = st.stabilized;
    r.stabilizeAt = st.at;
    r.hierarchyChanges = counters_.changeTimes().size();
    r.finalCost = lastCost_;
    r.finalTreeCount = lastTreeCount_;
    r.finalMaxDepth = lastMaxDepth_;
    for (const auto& [id, agent] : agents_) {
        AgentOutcome o;
        o.id = id;
        o.state = agent.state;
        o.parent = agent.parent;
        o.stateDeadline = agent.stateDeadline;
        o.childCount = agent.childCount();
        o.value = agent.currentValue;
        r.finalAgents.push_back(o);
    }
    r.finalEdges = env_.edges();

    json trailer;
    trailer["type"] = "run";
    trailer["stabilized"] = r.stabilized;
    trailer["stabilizeAt"] = r.stabilizeAt;
    trailer["lastEventAt"] = r.lastEventAt;
    trailer["endAt"] = r.endAt;
    trailer["totalMessages"] = r.totalMessages;
    trailer["solverMessages"] = r.solverMessages;
    trailer["enqueued"] = r.enqueued;
    trailer["delivered"] = r.delivered;
    trailer["dropped"] = r.dropped;
    trailer["undelivered"] = r.undelivered;
    trailer["messages"] = r.messagesByKind;
    trailer["warnings"] = r.warnings;
    trailer["triggers"] = r.triggers;
    trailer["violationCount"] = r.violations.size();
    trailer["hierarchyChanges"] = r.hierarchyChanges;
    trailer["finalCost"] = r.finalCost;
    trailer["treeCount"] = r.finalTreeCount;
    trailer["maxDepth"] = r.finalMaxDepth;
    trailer["live"] = agents_.size();
    records_.push_back(trailer.dump());

    r.records = std::move(records_);
    return r;
}

}  // namespace

std::string RunResult::jsonl() const {
    std::string out;
    for (const std::string& r : records) {
        out += r;
        out += '\n';
    }
    return out;
}

RunResult runSimulation(const SimConfig& cfg, const std::vector<EnvironmentEvent>& script) {
    Sim sim(cfg, script);
    return sim.run();
}

}  // namespace digca
