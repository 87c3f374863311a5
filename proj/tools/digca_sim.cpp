#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "digca/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "Discrete-event simulator for dynamic constraint networks: agents build a "
        "parent/child hierarchy by message passing, keep it alive through churn, and run a "
        "distributed quadratic-cost solver on top. Runs the configured experiment grid and "
        "writes one metrics .jsonl per run plus summary.csv."};

    std::string configPath;
    std::string algorithm;
    std::string outDir;
    std::string scriptPath;
    digca::CliOverrides cli;

    app.add_option("--config", configPath, "JSON config file (flags override it)");
    app.add_option("--seed", cli.seeds, "run seed(s), repeatable")->delimiter(',');
    app.add_option("--max-out-degree", cli.maxOutDegrees, "degree cap(s), repeatable")
        ->delimiter(',');
    app.add_option("--algorithm", algorithm, "solver order: topdown, bottomup, or none");
    app.add_flag("--baseline", cli.baselineRestart,
                 "full-restart baseline: rebuild the hierarchy after every event");
    app.add_option("--out", outDir, "output directory (default: out)");
    app.add_option("--script", scriptPath, "environment script file (default: generated)");

    CLI11_PARSE(app, argc, argv);

    if (!algorithm.empty()) cli.algorithm = algorithm;
    if (!outDir.empty()) cli.out = outDir;
    if (!scriptPath.empty()) cli.scriptPath = scriptPath;
    std::optional<std::string> configFile;
    if (!configPath.empty()) configFile = configPath;

    try {
        digca::ExperimentConfig cfg = digca::resolveConfig(configFile, cli);
        digca::ExperimentResult result = digca::runExperiment(cfg, &std::cout);
        std::vector<std::string> paths = digca::writeExperimentFiles(result, cfg.outDir);
        std::cout << "wrote " << paths.size() << " files under " << cfg.outDir << "\n";
        if (result.anyViolations) {
            std::cerr << "hierarchy invariant violations were recorded; see the run files\n";
            return 2;
        }
        return 0;
    } catch (const digca::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const digca::ScriptError& e) {
        std::cerr << "script error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
