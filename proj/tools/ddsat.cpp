#include "ddsat/cli.hpp"

#include <iostream>

#include <CLI11.hpp>

int main(int argc, char** argv) {
    using namespace ddsat::cli;

    CLI::App app{"DDSAT MAC protocol simulator"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Simulate one scenario and write frames.csv, summary.csv, trace.txt");
    run_cmd->add_option("--scenario", run.scenario, "Scenario file")->required();
    run_cmd->add_option("--seed", run.seed, "RNG seed (default: DDSAT_SEED, then the scenario's seed)");
    run_cmd->add_option("--frames", run.frames, "Super-frames to simulate (default: the scenario's frames)");
    run_cmd->add_option("--out", run.out, "Output directory")->capture_default_str();
    run_cmd->add_option("--warmup", run.warmup, "Frames dropped before averaging")->capture_default_str();

    SweepNodesOptions nodes;
    auto* nodes_cmd = app.add_subcommand("sweep-nodes", "Throughput and fairness versus secondary node count");
    nodes_cmd->add_option("--min", nodes.min_nodes, "Smallest node count")->capture_default_str();
    nodes_cmd->add_option("--max", nodes.max_nodes, "Largest node count")->capture_default_str();
    nodes_cmd->add_option("--frames", nodes.frames, "Super-frames per run")->capture_default_str();
    nodes_cmd->add_option("--seeds", nodes.seeds, "Seeds per node count")->capture_default_str();
    nodes_cmd->add_option("--seed", nodes.seed, "First seed");
    nodes_cmd->add_option("--scenario", nodes.scenario, "Base scenario (secondaries are replaced)");
    nodes_cmd->add_option("--warmup", nodes.warmup, "Frames dropped before averaging")->capture_default_str();
    nodes_cmd->add_option("--jobs", nodes.jobs, "Worker threads (0: all cores)")->capture_default_str();
    nodes_cmd->add_option("--out", nodes.out, "Output directory")->capture_default_str();

    SweepSensingOptions sensing;
    auto* sensing_cmd = app.add_subcommand("sweep-sensing", "Cooperative sensing accuracy versus node count");
    sensing_cmd->add_option("--nodes", sensing.nodes, "Cooperating node counts")->delimiter(',')->capture_default_str();
    auto* sigma = sensing_cmd->add_option("--sigma", sensing.sigma, "Shadowing sigma in dB");
    sensing_cmd->add_option("--accuracy", sensing.accuracy, "Tune sigma to this single-node accuracy")
        ->excludes(sigma);
    sensing_cmd->add_option("--trials", sensing.trials, "Monte-Carlo trials per node count")->capture_default_str();
    sensing_cmd->add_option("--primary-dbm", sensing.primary_dbm, "Primary power at the detectors")->capture_default_str();
    sensing_cmd->add_option("--noise-dbm", sensing.noise_floor_dbm, "Noise floor")->capture_default_str();
    sensing_cmd->add_option("--threshold-dbm", sensing.threshold_dbm, "Detection threshold")->capture_default_str();
    sensing_cmd->add_option("--seed", sensing.seed, "RNG seed");
    sensing_cmd->add_option("--out", sensing.out, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (*run_cmd) return cmd_run(run, std::cout, std::cerr);
    if (*nodes_cmd) return cmd_sweep_nodes(nodes, std::cout, std::cerr);
    return cmd_sweep_sensing(sensing, std::cout, std::cerr);
}
