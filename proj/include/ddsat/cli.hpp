#pragma once

#include "ddsat/metrics.hpp"
#include "ddsat/scenario.hpp"
#include "ddsat/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ddsat::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// DDSAT_SEED, if set to a non-negative integer.
std::optional<std::uint64_t> seed_from_env();

/// --seed, then DDSAT_SEED, then `fallback`.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t fallback);

struct RunOptions {
    std::filesystem::path scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> frames;
    std::filesystem::path out = ".";
    int warmup = metrics::kDefaultWarmupFrames;
};

/// Writes frames.csv, summary.csv and trace.txt into `out`.
int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);

struct SweepNodesOptions {
    int min_nodes = 1;
    int max_nodes = 4;
    std::int64_t frames = 300;
    int seeds = 5;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> scenario;
    std::filesystem::path out = ".";
    int warmup = metrics::kDefaultWarmupFrames;
    unsigned jobs = 0;  // 0: one per hardware thread
};

int cmd_sweep_nodes(const SweepNodesOptions& opts, std::ostream& out, std::ostream& err);

struct SweepSensingOptions {
    std::vector<int> nodes{1, 3, 5};
    std::optional<double> sigma;
    std::optional<double> accuracy;
    std::int64_t trials = 10000;
    double primary_dbm = -55.0;
    double noise_floor_dbm = -65.0;
    double threshold_dbm = -60.0;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = ".";
};

int cmd_sweep_sensing(const SweepSensingOptions& opts, std::ostream& out, std::ostream& err);

/// Throughput-versus-node-count experiment behind sweep-nodes.
struct NodeSweepPoint {
    int nodes = 0;
    metrics::MeanCi throughput;  // per-node mean, across seeds
    metrics::MeanCi jain;
    std::vector<double> seed_throughput;
    std::vector<double> seed_jain;
    metrics::RunCounters counters;  // summed over seeds
};

/// Secondaries 1..k cloned from the base scenario's first entry (or the
/// default 4-slot request). Seeds first_seed .. first_seed + seeds - 1.
std::vector<NodeSweepPoint> sweep_nodes(const ScenarioConfig& base, int min_nodes, int max_nodes,
                                        std::int64_t frames, int seeds, std::uint64_t first_seed,
                                        int warmup, unsigned jobs = 0);

/// The default throughput experiment: always-on primary on channel 4 at
/// -50 dBm, no shadowing.
ScenarioConfig throughput_scenario();

struct SensingSweepPoint {
    int nodes = 0;
    sim::SensingTrialResult result;
    double ci95 = 0.0;
};

std::vector<SensingSweepPoint> sweep_sensing(const std::vector<int>& nodes, const sim::SensingTrialConfig& base,
                                             std::uint64_t seed);

std::string render_frame_trace(const sim::FrameTrace& frame);

}  // namespace ddsat::cli
