#include "digca/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "digca/rng.hpp"
#include "json.hpp"

namespace digca {

namespace {

using nlohmann::json;

std::string formatDouble(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

template <typename T, typename F>
T fetch(const json& value, const std::string& key, F&& convert) {
    try {
        return convert(value);
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

double fetchNumber(const json& value, const std::string& key) {
    return fetch<double>(value, key, [](const json& v) { return v.get<double>(); });
}

int fetchInt(const json& value, const std::string& key) {
    return fetch<int>(value, key, [](const json& v) { return v.get<int>(); });
}

bool fetchBool(const json& value, const std::string& key) {
    return fetch<bool>(value, key, [](const json& v) { return v.get<bool>(); });
}

std::string fetchString(const json& value, const std::string& key) {
    return fetch<std::string>(value, key,
                              [](const json& v) { return v.get<std::string>(); });
}

void applyTimers(const json& obj, SimTimers& timers) {
    for (const auto& [key, value] : obj.items()) {
        if (key == "connectPeriod") {
            timers.connectPeriod = fetchNumber(value, key);
        } else if (key == "announceWaitPeriod") {
            timers.announceWaitPeriod = fetchNumber(value, key);
        } else if (key == "stateTimeout") {
            timers.stateTimeout = fetchNumber(value, key);
        } else if (key == "keepAlivePeriod") {
            timers.keepAlivePeriod = fetchNumber(value, key);
        } else if (key == "inspectPeriod") {
            timers.inspectPeriod = fetchNumber(value, key);
        } else if (key == "settleDelay") {
            timers.settleDelay = fetchNumber(value, key);
        } else {
            throw ConfigError("unknown config key 'timers." + key + "'");
        }
    }
}

void applyDelay(const json& obj, DelayRange& delay) {
    for (const auto& [key, value] : obj.items()) {
        if (key == "lo") {
            delay.lo = fetchNumber(value, key);
        } else if (key == "hi") {
            delay.hi = fetchNumber(value, key);
        } else {
            throw ConfigError("unknown config key 'delay." + key + "'");
        }
    }
}

}  // namespace

ExecutionOrder parseAlgorithm(const std::string& name) {
    if (name == "topdown") return ExecutionOrder::TopDown;
    if (name == "bottomup") return ExecutionOrder::BottomUp;
    if (name == "none") return ExecutionOrder::None;
    throw ConfigError("unknown algorithm '" + name + "' (use topdown, bottomup, or none)");
}

std::string algorithmName(ExecutionOrder order) {
    switch (order) {
        case ExecutionOrder::TopDown: return "topdown";
        case ExecutionOrder::BottomUp: return "bottomup";
        case ExecutionOrder::None: return "none";
    }
    return "none";
}

void applyConfigFile(const std::string& path, ExperimentConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("config file '" + path + "' must hold a JSON object");
    }
    for (const auto& [key, value] : doc.items()) {
        if (key == "seeds") {
            cfg.seeds = fetch<std::vector<uint64_t>>(value, key, [](const json& v) {
                return v.get<std::vector<uint64_t>>();
            });
        } else if (key == "maxOutDegrees") {
            cfg.maxOutDegrees = fetch<std::vector<int>>(
                value, key, [](const json& v) { return v.get<std::vector<int>>(); });
        } else if (key == "addEvents") {
            cfg.addEvents = fetchInt(value, key);
        } else if (key == "changeEvents") {
            cfg.changeEvents = fetchInt(value, key);
        } else if (key == "removeEvents") {
            cfg.removeEvents = fetchInt(value, key);
        } else if (key == "interEventDelay") {
            cfg.interEventDelay = fetchNumber(value, key);
        } else if (key == "algorithm") {
            cfg.algorithm = parseAlgorithm(fetchString(value, key));
        } else if (key == "baselineRestart") {
            cfg.baselineRestart = fetchBool(value, key);
        } else if (key == "faultContainment") {
            cfg.faultContainment = fetchBool(value, key);
        } else if (key == "problems") {
            cfg.problems = fetchInt(value, key);
        } else if (key == "masterSeed") {
            cfg.masterSeed =
                fetch<uint64_t>(value, key, [](const json& v) { return v.get<uint64_t>(); });
        } else if (key == "outDir") {
            cfg.outDir = fetchString(value, key);
        } else if (key == "scriptPath") {
            cfg.scriptPath = fetchString(value, key);
        } else if (key == "finalTail") {
            cfg.finalTail = fetchNumber(value, key);
        } else if (key == "timers") {
            if (!value.is_object()) throw ConfigError("config key 'timers' must be an object");
            applyTimers(value, cfg.timers);
        } else if (key == "delay") {
            if (!value.is_object()) throw ConfigError("config key 'delay' must be an object");
            applyDelay(value, cfg.delay);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
}

void validateConfig(const ExperimentConfig& cfg) {
    if (cfg.seeds.empty()) throw ConfigError("seeds must not be empty");
    if (cfg.maxOutDegrees.empty()) throw ConfigError("maxOutDegrees must not be empty");
    for (int d : cfg.maxOutDegrees) {
        if (d < 1) throw ConfigError("maxOutDegrees entries must be >= 1");
    }
    if (cfg.addEvents < 0 || cfg.changeEvents < 0 || cfg.removeEvents < 0) {
        throw ConfigError("event counts must be >= 0");
    }
    if (cfg.removeEvents > cfg.addEvents) {
        throw ConfigError("removeEvents must not exceed addEvents");
    }
    if (!(cfg.interEventDelay > 0)) throw ConfigError("interEventDelay must be > 0");
    if (cfg.problems < 1) throw ConfigError("problems must be >= 1");
    if (!(cfg.finalTail > 0)) throw ConfigError("finalTail must be > 0");
    const SimTimers& t = cfg.timers;
    if (!(t.connectPeriod > 0) || !(t.announceWaitPeriod > 0) || !(t.stateTimeout > 0) ||
        !(t.keepAlivePeriod > 0) || !(t.inspectPeriod > 0) || !(t.settleDelay > 0)) {
        throw ConfigError("timer periods must be > 0");
    }
    if (!(cfg.delay.lo >= 0) || !(cfg.delay.hi >= cfg.delay.lo)) {
        throw ConfigError("delay range must satisfy 0 <= lo <= hi");
    }
    if (cfg.baselineRestart && cfg.algorithm != ExecutionOrder::TopDown) {
        throw ConfigError("baseline restart pairs with the top-down solver only");
    }
}

ExperimentConfig resolveConfig(const std::optional<std::string>& configFile,
                               const CliOverrides& cli) {
    ExperimentConfig cfg;
    if (configFile) applyConfigFile(*configFile, cfg);
    if (!cli.seeds.empty()) cfg.seeds = cli.seeds;
    if (!cli.maxOutDegrees.empty()) cfg.maxOutDegrees = cli.maxOutDegrees;
    if (cli.algorithm) cfg.algorithm = parseAlgorithm(*cli.algorithm);
    if (cli.baselineRestart) cfg.baselineRestart = true;
    if (cli.out) cfg.outDir = *cli.out;
    if (cli.scriptPath) cfg.scriptPath = *cli.scriptPath;
    validateConfig(cfg);
    return cfg;
}

std::vector<EnvironmentEvent> generateScript(int adds, int changes, int removes, double gap) {
    std::vector<EnvironmentEvent> events;
    events.reserve(static_cast<size_t>(adds + changes + removes));
    double at = 0.0;
    for (int i = 0; i < adds; ++i, at += gap) {
        EnvironmentEvent ev;
        ev.at = at;
        ev.kind = EventKind::AddAgent;
        ev.agent = AgentId{static_cast<uint32_t>(i)};
        events.push_back(ev);
    }
    for (int i = 0; i < changes; ++i, at += gap) {
        EnvironmentEvent ev;
        ev.at = at;
        ev.kind = EventKind::ChangeConstraint;
        events.push_back(ev);
    }
    for (int i = 0; i < removes; ++i, at += gap) {
        EnvironmentEvent ev;
        ev.at = at;
        ev.kind = EventKind::RemoveAgent;
        events.push_back(ev);
    }
    return events;
}

ExperimentResult runExperiment(const ExperimentConfig& cfg, std::ostream* progress) {
    std::vector<EnvironmentEvent> script;
    if (cfg.scriptPath) {
        std::ifstream in(*cfg.scriptPath);
        if (!in) throw ConfigError("cannot open script file '" + *cfg.scriptPath + "'");
        std::ostringstream text;
        text << in.rdbuf();
        script = parseScript(text.str());
    } else {
        script = generateScript(cfg.addEvents, cfg.changeEvents, cfg.removeEvents,
                                cfg.interEventDelay);
    }

    std::string mode = cfg.baselineRestart ? "baseline" : "digca";
    ExperimentResult result;
    for (int degree : cfg.maxOutDegrees) {
        for (int problem = 0; problem < cfg.problems; ++problem) {
            for (uint64_t seed : cfg.seeds) {
                SimConfig sc;
                sc.policy.maxOutDegree = degree;
                sc.solver.order = cfg.algorithm;
                sc.solver.faultContainment = cfg.faultContainment;
                sc.timers = cfg.timers;
                sc.delay = cfg.delay;
                sc.baselineRestart = cfg.baselineRestart;
                sc.finalTail = cfg.finalTail;
                sc.problemSeed =
                    deriveSeed(cfg.masterSeed, "problem", static_cast<uint64_t>(problem));
                sc.runSeed = deriveSeed(cfg.masterSeed, "run", seed);

                RunOutcome run;
                run.name = algorithmName(cfg.algorithm) + "-" + mode + "-deg" +
                           std::to_string(degree) + "-p" + std::to_string(problem) + "-s" +
                           std::to_string(seed);
                run.maxOutDegree = degree;
                run.problem = problem;
                run.seed = seed;
                run.result = runSimulation(sc, script);
                if (!run.result.violations.empty()) result.anyViolations = true;
                if (progress) {
                    *progress << run.name << ": messages=" << run.result.totalMessages
                              << " cost=" << run.result.finalCost
                              << " stabilized=" << (run.result.stabilized ? "yes" : "no")
                              << " violations=" << run.result.violations.size() << "\n";
                }
                result.runs.push_back(std::move(run));
            }
        }
    }
    result.summaryCsv = summarizeCsv(result.runs);
    return result;
}

std::string summarizeCsv(const std::vector<RunOutcome>& runs) {
    // Group label: run name minus the per-run "-p<problem>-s<seed>" suffix,
    // i.e. algorithm, mode, and degree.
    struct Group {
        int degree = 0;
        std::vector<double> messages;
        std::vector<double> costs;
    };
    std::map<std::string, Group> groups;
    for (const RunOutcome& run : runs) {
        size_t sPos = run.name.rfind("-s");
        size_t pPos = sPos == std::string::npos ? std::string::npos
                                                : run.name.rfind("-p", sPos);
        std::string label =
            pPos == std::string::npos ? run.name : run.name.substr(0, pPos);
        Group& g = groups[label];
        g.degree = run.maxOutDegree;
        g.messages.push_back(static_cast<double>(run.result.totalMessages));
        g.costs.push_back(run.result.finalCost);
    }

    auto mean = [](const std::vector<double>& xs) {
        double sum = 0.0;
        for (double x : xs) sum += x;
        return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
    };
    auto sampleStd = [&](const std::vector<double>& xs) {
        if (xs.size() < 2) return 0.0;
        double m = mean(xs);
        double ss = 0.0;
        for (double x : xs) ss += (x - m) * (x - m);
        return std::sqrt(ss / static_cast<double>(xs.size() - 1));
    };

    std::string csv =
        "group,maxOutDegree,runs,meanTotalMessages,stdTotalMessages,meanFinalCost,"
        "stdFinalCost\n";
    for (const auto& [label, g] : groups) {
        csv += label;
        csv += ',';
        csv += std::to_string(g.degree);
        csv += ',';
        csv += std::to_string(g.messages.size());
        csv += ',';
        csv += formatDouble(mean(g.messages));
        csv += ',';
        csv += formatDouble(sampleStd(g.messages));
        csv += ',';
        csv += formatDouble(mean(g.costs));
        csv += ',';
        csv += formatDouble(sampleStd(g.costs));
        csv += '\n';
    }
    return csv;
}

std::vector<std::string> writeExperimentFiles(const ExperimentResult& result,
                                              const std::string& outDir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(outDir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + outDir + "'");

    std::vector<std::string> paths;
    for (const RunOutcome& run : result.runs) {
        fs::path p = fs::path(outDir) / (run.name + ".jsonl");
        std::ofstream out(p);
        if (!out) throw ConfigError("cannot write '" + p.string() + "'");
        out << run.result.jsonl();
        paths.push_back(p.string());
    }
    fs::path summary = fs::path(outDir) / "summary.csv";
    std::ofstream out(summary);
    if (!out) throw ConfigError("cannot write '" + summary.string() + "'");
    out << result.summaryCsv;
    paths.push_back(summary.string());
    return paths;
}

}  // namespace digca
