#include "digca/dcop.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <sstream>

namespace digca {

Domain sampleDomain(RngStream& rng, const DomainConfig& cfg) {
    Domain d;
    d.lower = cfg.lower;
    d.upper = cfg.upper;
    d.samples.reserve(static_cast<size_t>(cfg.sampleCount));
    for (int i = 0; i < cfg.sampleCount; ++i) {
        d.samples.push_back(rng.uniform(cfg.lower, cfg.upper));
    }
    return d;
}

Coefficients sampleCoefficients(RngStream& rng) {
    Coefficients k;
    k.a = rng.uniform(kCoefficientLo, kCoefficientHi);
    k.b = rng.uniform(kCoefficientLo, kCoefficientHi);
    k.c = rng.uniform(kCoefficientLo, kCoefficientHi);
    return k;
}

double evalConstraint(const Coefficients& k, double x, double y) {
    return k.a * x * x + k.b * x * y + k.c * y * y;
}

double globalCost(const std::map<PairKey, Coefficients>& edges,
                  const std::map<AgentId, double>& values) {
    double total = 0.0;
    for (const auto& [key, k] : edges) {
        auto lo = values.find(key.lo);
        if (lo == values.end()) throw IncompleteAssignment(key.lo);
        auto hi = values.find(key.hi);
        if (hi == values.end()) throw IncompleteAssignment(key.hi);
        total += evalConstraint(k, lo->second, hi->second);
    }
    return total;
}

Domain Environment::spawnDomain(AgentId id) {
    RngStream rng(deriveSeed(problemSeed_, "domain", id.index));
    return sampleDomain(rng, domainCfg_);
}

const Coefficients* Environment::edge(PairKey key) const {
    auto it = edges_.find(key);
    return it == edges_.end() ? nullptr : &it->second;
}

Coefficients Environment::createEdge(PairKey key) {
    // Epoch counts creations of this particular pair, so a torn-down and
    // re-established edge gets fresh coefficients, deterministically.
    uint32_t epoch = edgeEpoch_[key]++;
    uint64_t pairTag = (static_cast<uint64_t>(key.lo.index) << 32) | key.hi.index;
    RngStream rng(deriveSeed(deriveSeed(problemSeed_, "edge", pairTag), "epoch", epoch));
    Coefficients k = sampleCoefficients(rng);
    edges_[key] = k;
    return k;
}

void Environment::destroyEdge(PairKey key) { edges_.erase(key); }

void Environment::replaceCoefficients(PairKey key, Coefficients k) {
    auto it = edges_.find(key);
    if (it != edges_.end()) it->second = k;
}

namespace {

[[noreturn]] void scriptFail(int lineNo, const std::string& why) {
    throw ScriptError("script line " + std::to_string(lineNo) + ": " + why);
}

}  // namespace

std::vector<EnvironmentEvent> parseScript(const std::string& text) {
    std::vector<EnvironmentEvent> events;
    std::istringstream in(text);
    std::string line;
    int lineNo = 0;
    double lastAt = -1.0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double at = 0.0;
        std::string kind;
        if (!(ls >> at)) continue;  // blank / comment-only line
        if (!(ls >> kind)) scriptFail(lineNo, "missing event kind");
        if (at < 0.0) scriptFail(lineNo, "negative time");
        if (at < lastAt) scriptFail(lineNo, "events out of order");
        lastAt = at;

        EnvironmentEvent ev;
        ev.at = at;
        if (kind == "add") {
            ev.kind = EventKind::AddAgent;
            uint32_t id = 0;
            if (!(ls >> id)) scriptFail(lineNo, "add needs an agent id");
            ev.agent = AgentId{id};
        } else if (kind == "remove") {
            ev.kind = EventKind::RemoveAgent;
            std::string who;
            if (!(ls >> who)) scriptFail(lineNo, "remove needs an agent id or *");
            if (who != "*") {
                uint32_t id = 0;
                auto [p, ec] = std::from_chars(who.data(), who.data() + who.size(), id);
                if (ec != std::errc{} || p != who.data() + who.size()) {
                    scriptFail(lineNo, "bad agent id '" + who + "'");
                }
                ev.agent = AgentId{id};
            }
        } else if (kind == "change") {
            ev.kind = EventKind::ChangeConstraint;
            std::string first;
            if (!(ls >> first)) scriptFail(lineNo, "change needs an edge or *");
            if (first != "*") {
                uint32_t i = 0;
                auto [p, ec] = std::from_chars(first.data(), first.data() + first.size(), i);
                if (ec != std::errc{} || p != first.data() + first.size()) {
                    scriptFail(lineNo, "bad agent id '" + first + "'");
                }
                uint32_t j = 0;
                if (!(ls >> j)) scriptFail(lineNo, "change needs both endpoints");
                if (i == j) scriptFail(lineNo, "edge endpoints must differ");
                ev.edge = PairKey(AgentId{i}, AgentId{j});
                Coefficients k;
                if (ls >> k.a) {
                    if (!(ls >> k.b >> k.c)) scriptFail(lineNo, "coefficients need a b c");
                    ev.coeffs = k;
                }
            }
        } else {
            scriptFail(lineNo, "unknown event kind '" + kind + "'");
        }
        std::string extra;
        if (ls >> extra) scriptFail(lineNo, "trailing tokens after event");
        events.push_back(ev);
    }
    return events;
}

std::string formatScript(const std::vector<EnvironmentEvent>& events) {
    std::string out;
    char buf[160];
    for (const EnvironmentEvent& ev : events) {
        switch (ev.kind) {
            case EventKind::AddAgent:
                snprintf(buf, sizeof buf, "%.17g add %" PRIu32 "\n", ev.at, ev.agent->index);
                break;
            case EventKind::RemoveAgent:
                if (ev.agent) {
                    snprintf(buf, sizeof buf, "%.17g remove %" PRIu32 "\n", ev.at,
                             ev.agent->index);
                } else {
                    snprintf(buf, sizeof buf, "%.17g remove *\n", ev.at);
                }
                break;
            case EventKind::ChangeConstraint:
                if (ev.edge && ev.coeffs) {
                    snprintf(buf, sizeof buf, "%.17g change %" PRIu32 " %" PRIu32 " %.17g %.17g %.17g\n",
                             ev.at, ev.edge->lo.index, ev.edge->hi.index, ev.coeffs->a,
                             ev.coeffs->b, ev.coeffs->c);
                } else if (ev.edge) {
                    snprintf(buf, sizeof buf, "%.17g change %" PRIu32 " %" PRIu32 "\n", ev.at,
                             ev.edge->lo.index, ev.edge->hi.index);
                } else {
                    snprintf(buf, sizeof buf, "%.17g change *\n", ev.at);
                }
                break;
        }
        out += buf;
    }
    return out;
}

}  // namespace digca
