#include "ddsat/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

namespace ddsat::cli {

namespace {

std::string channel_list(const std::set<ChannelId>& channels) {
    std::vector<int> v;
    for (auto c : channels) v.push_back(c.index);
    return fmt::format("[{}]", fmt::join(v, ","));
}

std::string_view psa_name(nodes::PsaOutcome o) {
    switch (o) {
    case nodes::PsaOutcome::NotParticipating: return "not-participating";
    case nodes::PsaOutcome::Served: return "served";
    case nodes::PsaOutcome::Unserved: return "unserved";
    case nodes::PsaOutcome::NoRequest: return "no-request";
    }
    return "?";
}

std::string_view beacon_name(nodes::BeaconAction a) {
    switch (a) {
    case nodes::BeaconAction::Reserved: return "reserved";
    case nodes::BeaconAction::Confirmed: return "confirmed";
    case nodes::BeaconAction::Lost: return "lost";
    case nodes::BeaconAction::NoFreeSlot: return "no-free-slot";
    }
    return "?";
}

std::string render_table(const psa::AllocationTable& table) {
    std::string out;
    for (auto c : table.channels()) {
        out += fmt::format("    ch{}:", c.index);
        for (int s = 0; s < table.slots_per_channel(); ++s) {
            const auto owner = table.owner(c, s);
            out += owner ? fmt::format(" {:>3}", owner->value) : std::string("   .");
        }
        out += '\n';
    }
    if (!table.unserved().empty()) {
        std::vector<int> ids;
        for (auto n : table.unserved()) ids.push_back(n.value);
        out += fmt::format("    unserved: {}\n", fmt::join(ids, ","));
    }
    return out;
}

std::vector<double> per_node_throughput(const metrics::MetricsLog& log, int warmup) {
    std::vector<double> out;
    for (auto node : log.nodes()) out.push_back(metrics::throughput(log, node, warmup));
    return out;
}

void add_counters(metrics::RunCounters& into, const metrics::RunCounters& c) {
    into.data_transmissions += c.data_transmissions;
    into.out_of_grant_transmissions += c.out_of_grant_transmissions;
    into.transmissions_on_fused_occupied += c.transmissions_on_fused_occupied;
    into.transmissions_on_primary_channel += c.transmissions_on_primary_channel;
    into.transmissions_on_active_primary += c.transmissions_on_active_primary;
    into.data_collisions += c.data_collisions;
    into.ddsat_collisions += c.ddsat_collisions;
    into.consistency_checks += c.consistency_checks;
    into.consistency_mismatches += c.consistency_mismatches;
}

unsigned worker_count(unsigned jobs) {
    if (jobs > 0) return jobs;
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

std::optional<std::uint64_t> seed_from_env() {
    const char* raw = std::getenv("DDSAT_SEED");
    if (!raw || !*raw) return std::nullopt;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(raw, &end, 10);
    if (*end != '\0' || raw[0] == '-') return std::nullopt;
    return v;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t fallback) {
    if (flag) return *flag;
    if (const auto env = seed_from_env()) return *env;
    return fallback;
}

std::string render_frame_trace(const sim::FrameTrace& f) {
    const int n = f.nodes.empty() || !f.nodes.front().table ? 0 : f.nodes.front().table->slots_per_channel();
    std::string out = fmt::format("frame {} t={:.1f}s primary={}\n", f.frame, f.start_time_s,
                                  f.primary_active ? "on" : "off");
    std::vector<int> sensing;
    for (auto c : f.beacon.sensing_channels) sensing.push_back(c.index);
    out += fmt::format("  beacon occupied={:#04x} channels=[{}] bytes={}\n", f.beacon.occupied_ddsat_slots,
                       fmt::join(sensing, ","), wire::to_hex(f.beacon_bytes));
    for (const auto& d : f.ddsat) {
        out += fmt::format("  ddsat slot {}: ", d.slot);
        switch (d.result) {
        case nodes::SlotResultKind::Silence: out += "silence\n"; break;
        case nodes::SlotResultKind::Collision: {
            std::vector<int> ids;
            for (auto t : d.transmitters) ids.push_back(t.value);
            out += fmt::format("collision between {}\n", fmt::join(ids, ","));
            break;
        }
        case nodes::SlotResultKind::Delivered: {
            const auto& p = *d.packet;
            out += fmt::format("SN{} empty={} requested={} pi={} pref=({},{})\n", p.sender.value,
                               channel_list(wire::channels_in(p.empty_channels)), p.requested_slots,
                               p.priority_index, p.preferred.first.index,
                               p.preferred.second ? p.preferred.second->index : 0);
            break;
        }
        }
    }
    const psa::AllocationTable* table = nullptr;
    const sensing::FusionResult* fusion = nullptr;
    for (const auto& t : f.nodes) {
        std::string line = fmt::format("  SN{} beacon={} slot={} psa={} pd={}", t.node.value,
                                       beacon_name(t.beacon_action),
                                       t.ddsat_slot ? std::to_string(*t.ddsat_slot) : std::string("-"),
                                       psa_name(t.psa), t.pd);
        if (t.own_report) line += fmt::format(" sensed-empty={}", channel_list(t.own_report->empty_channels()));
        if (t.fusion) line += fmt::format(" fusion={}", channel_list(t.fusion->empty_channels));
        if (t.grant) {
            line += fmt::format(" grant=ch{} slots {}-{}", t.grant->channel.index, t.grant->first_slot,
                                t.grant->first_slot + t.grant->count - 1);
        }
        out += line + '\n';
        if (!table && t.table) {
            table = &*t.table;
            fusion = &*t.fusion;
        }
    }
    if (table) {
        out += fmt::format("  fusion {} allocation ({} slots/channel):\n", channel_list(fusion->empty_channels),
                           n);
        out += render_table(*table);
    }
    out += fmt::format("  data transmissions={} consistent={}\n", f.data.size(), f.consistent ? "yes" : "NO");
    return out;
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
    ScenarioConfig scenario;
    try {
        scenario = load_scenario(opts.scenario);
    } catch (const ScenarioError& e) {
        err << "ddsat run: " << e.what() << '\n';
        return kExitUsage;
    }
    const auto seed = resolve_seed(opts.seed, scenario.seed);
    const auto frames = opts.frames.value_or(scenario.frames);
    if (frames < 1 || opts.warmup < 0) {
        err << "ddsat run: need --frames >= 1 and --warmup >= 0\n";
        return kExitUsage;
    }

    try {
        std::filesystem::create_directories(opts.out);
        std::ostringstream trace;
        trace << fmt::format("# seed={} scenario_hash={:016x} frames={}\n", seed, scenario_hash(scenario), frames);
        sim::Engine engine(scenario, seed);
        engine.set_frame_observer([&](const sim::FrameTrace& f) { trace << render_frame_trace(f); });
        engine.run_frames(frames);
        const auto& log = engine.log();

        metrics::write_file(opts.out / "frames.csv", [&](std::ostream& os) { metrics::write_frames_csv(log, os); });
        // Runs no longer than the warm-up are summarized in full.
        const int warmup = frames > opts.warmup ? opts.warmup : 0;
        metrics::write_file(opts.out / "summary.csv",
                            [&](std::ostream& os) { metrics::write_summary_csv(log, os, warmup); });
        metrics::write_file(opts.out / "trace.txt", [&](std::ostream& os) { os << trace.str(); });

        out << fmt::format("seed={} scenario_hash={:016x} frames={} warmup={}\n", seed, log.scenario_hash, frames,
                           warmup);
        std::vector<double> shares;
        for (const auto& s : metrics::summarize(log, warmup)) {
            out << fmt::format("node {:>3}: throughput {} slots/frame\n", s.node.value,
                               metrics::format_real(s.mean_throughput));
            shares.push_back(s.mean_throughput);
        }
        if (std::any_of(shares.begin(), shares.end(), [](double x) { return x > 0.0; })) {
            out << "jain index: " << metrics::format_real(metrics::jain_index(shares)) << '\n';
        }
        try {
            out << "sensing accuracy: " << metrics::format_real(metrics::sensing_accuracy(log, warmup)) << '\n';
        } catch (const metrics::MetricsError&) {
            out << "sensing accuracy: n/a\n";
        }
        const auto& c = log.counters;
        out << fmt::format("data transmissions={} on primary channel={} while primary active={} outside grant={} "
                           "consistency mismatches={}\n",
                           c.data_transmissions, c.transmissions_on_primary_channel, c.transmissions_on_active_primary,
                           c.out_of_grant_transmissions, c.consistency_mismatches);
    } catch (const std::exception& e) {
        err << "ddsat run: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

ScenarioConfig throughput_scenario() {
    auto cfg = default_scenario(1);
    cfg.primary = PrimarySpec{ChannelId(4), nodes::PrimaryActivity::AlwaysOn, 1.0, -50.0};
    return cfg;
}

std::vector<NodeSweepPoint> sweep_nodes(const ScenarioConfig& base, int min_nodes, int max_nodes,
                                        std::int64_t frames, int seeds, std::uint64_t first_seed,
                                        int warmup, unsigned jobs) {
    if (min_nodes < 1 || min_nodes > max_nodes || max_nodes > base.slots_per_state) {
        throw Error(fmt::format("node range {}..{} must satisfy 1 <= min <= max <= {}", min_nodes, max_nodes,
                                base.slots_per_state));
    }
    if (seeds < 1) throw Error("need at least one seed");
    const SecondarySpec templ = base.secondaries.empty() ? SecondarySpec{} : base.secondaries.front();

    struct Job {
        int nodes;
        std::uint64_t seed;
        ScenarioConfig cfg;
    };
    std::vector<Job> todo;
    for (int k = min_nodes; k <= max_nodes; ++k) {
        auto cfg = base;
        cfg.secondaries.clear();
        for (int i = 1; i <= k; ++i) {
            auto sn = templ;
            sn.id = NodeId(static_cast<std::uint8_t>(i));
            cfg.secondaries.push_back(sn);
        }
        cfg.frames = frames;
        validate(cfg);
        for (int s = 0; s < seeds; ++s) todo.push_back(Job{k, first_seed + static_cast<std::uint64_t>(s), cfg});
    }

    // Runs are independent; results are collected in job order.
    std::vector<metrics::MetricsLog> logs(todo.size());
    const std::size_t width = worker_count(jobs);
    for (std::size_t start = 0; start < todo.size(); start += width) {
        std::vector<std::future<metrics::MetricsLog>> batch;
        for (std::size_t i = start; i < std::min(todo.size(), start + width); ++i) {
            batch.push_back(std::async(std::launch::async,
                                       [&, i] { return sim::run(todo[i].cfg, todo[i].seed, frames); }));
        }
        for (std::size_t i = 0; i < batch.size(); ++i) logs[start + i] = batch[i].get();
    }

    std::vector<NodeSweepPoint> points;
    for (std::size_t i = 0; i < todo.size(); ++i) {
        if (points.empty() || points.back().nodes != todo[i].nodes) {
            points.push_back(NodeSweepPoint{});
            points.back().nodes = todo[i].nodes;
        }
        auto& p = points.back();
        const auto shares = per_node_throughput(logs[i], warmup);
        double mean = 0.0;
        for (double x : shares) mean += x;
        p.seed_throughput.push_back(mean / static_cast<double>(shares.size()));
        p.seed_jain.push_back(metrics::jain_index(shares));
        add_counters(p.counters, logs[i].counters);
    }
    for (auto& p : points) {
        p.throughput = metrics::mean_ci95(p.seed_throughput);
        p.jain = metrics::mean_ci95(p.seed_jain);
    }
    return points;
}

int cmd_sweep_nodes(const SweepNodesOptions& opts, std::ostream& out, std::ostream& err) {
    ScenarioConfig base = throughput_scenario();
    if (opts.scenario) {
        try {
            base = load_scenario(*opts.scenario);
        } catch (const ScenarioError& e) {
            err << "ddsat sweep-nodes: " << e.what() << '\n';
            return kExitUsage;
        }
    }
    if (opts.min_nodes < 1 || opts.min_nodes > opts.max_nodes || opts.max_nodes > base.slots_per_state) {
        err << fmt::format("ddsat sweep-nodes: need 1 <= --min <= --max <= {}, got {}..{}\n",
                           base.slots_per_state, opts.min_nodes, opts.max_nodes);
        return kExitUsage;
    }
    if (opts.frames < 1 || opts.seeds < 1 || opts.warmup < 0 || opts.warmup >= opts.frames) {
        err << "ddsat sweep-nodes: need --frames > --warmup >= 0 and --seeds >= 1\n";
        return kExitUsage;
    }
    const auto seed = resolve_seed(opts.seed, opts.scenario ? base.seed : 1);

    try {
        const auto points = sweep_nodes(base, opts.min_nodes, opts.max_nodes, opts.frames, opts.seeds, seed,
                                        opts.warmup, opts.jobs);
        std::vector<metrics::SweepRow> rows;
        for (const auto& p : points) {
            rows.push_back({"nodes", double(p.nodes), "throughput", p.throughput.mean, p.throughput.ci95});
            rows.push_back({"nodes", double(p.nodes), "jain", p.jain.mean, p.jain.ci95});
            out << fmt::format("nodes={} throughput={} +/- {} jain={} +/- {}\n", p.nodes,
                               metrics::format_real(p.throughput.mean), metrics::format_real(p.throughput.ci95),
                               metrics::format_real(p.jain.mean), metrics::format_real(p.jain.ci95));
        }
        std::filesystem::create_directories(opts.out);
        const metrics::CsvMetadata meta{
            seed, scenario_hash(base),
            fmt::format("frames={} seeds={} warmup={}", opts.frames, opts.seeds, opts.warmup)};
        metrics::write_file(opts.out / "sweep.csv", [&](std::ostream& os) { metrics::write_sweep_csv(rows, meta, os); });
    } catch (const std::exception& e) {
        err << "ddsat sweep-nodes: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

std::vector<SensingSweepPoint> sweep_sensing(const std::vector<int>& nodes, const sim::SensingTrialConfig& base,
                                             std::uint64_t seed) {
    std::vector<SensingSweepPoint> out;
    for (int m : nodes) {
        auto cfg = base;
        cfg.nodes = m;
        auto rng = make_rng(seed, RngStream::Experiment, static_cast<std::uint32_t>(m));
        const auto r = sim::run_sensing_trials(cfg, rng);
        const double p = r.fused_accuracy;
        out.push_back(SensingSweepPoint{m, r, 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(r.trials))});
    }
    return out;
}

int cmd_sweep_sensing(const SweepSensingOptions& opts, std::ostream& out, std::ostream& err) {
    if (opts.nodes.empty() || std::any_of(opts.nodes.begin(), opts.nodes.end(), [](int m) { return m < 1; })) {
        err << "ddsat sweep-sensing: --nodes needs one or more counts >= 1\n";
        return kExitUsage;
    }
    if (opts.sigma && opts.accuracy) {
        err << "ddsat sweep-sensing: give --sigma or --accuracy, not both\n";
        return kExitUsage;
    }
    if (opts.trials < 1) {
        err << "ddsat sweep-sensing: --trials must be at least 1\n";
        return kExitUsage;
    }
    sim::SensingTrialConfig base;
    base.primary_dbm = opts.primary_dbm;
    base.noise_floor_dbm = opts.noise_floor_dbm;
    base.threshold_dbm = opts.threshold_dbm;
    base.trials = opts.trials;
    const auto seed = resolve_seed(opts.seed, 1);

    try {
        if (opts.accuracy) {
            base.sigma_db = sim::sigma_for_accuracy(*opts.accuracy, base.primary_dbm, base.noise_floor_dbm,
                                                    base.threshold_dbm, base.p_on);
        } else {
            base.sigma_db = opts.sigma.value_or(0.0);
        }
        if (base.sigma_db < 0.0) {
            err << "ddsat sweep-sensing: --sigma must be non-negative\n";
            return kExitUsage;
        }
        const auto points = sweep_sensing(opts.nodes, base, seed);
        std::vector<metrics::SweepRow> rows;
        for (const auto& p : points) {
            rows.push_back({"nodes", double(p.nodes), "fused_accuracy", p.result.fused_accuracy, p.ci95});
            out << fmt::format("nodes={} fused accuracy={} +/- {} (per node {})\n", p.nodes,
                               metrics::format_real(p.result.fused_accuracy), metrics::format_real(p.ci95),
                               metrics::format_real(p.result.per_node_accuracy));
        }
        std::filesystem::create_directories(opts.out);
        const metrics::CsvMetadata meta{
            seed, 0,
            fmt::format("sigma_db={} trials={} primary_dbm={} noise_floor_dbm={} threshold_dbm={}",
                        metrics::format_real(base.sigma_db), base.trials, base.primary_dbm, base.noise_floor_dbm,
                        base.threshold_dbm)};
        metrics::write_file(opts.out / "sweep.csv", [&](std::ostream& os) { metrics::write_sweep_csv(rows, meta, os); });
    } catch (const std::exception& e) {
        err << "ddsat sweep-sensing: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace ddsat::cli
