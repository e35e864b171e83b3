#include "ddsat/cli.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ddsat;
using namespace ddsat::cli;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("ddsat_cli_" + name);
    std::filesystem::remove_all(p);
    return p;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path write_scenario(const std::string& name, const ScenarioConfig& cfg) {
    const auto p = std::filesystem::temp_directory_path() / ("ddsat_cli_" + name + ".ini");
    std::ofstream(p) << render_scenario(cfg);
    return p;
}

}  // namespace

TEST_CASE("seed precedence") {
    unsetenv("DDSAT_SEED");
    CHECK(resolve_seed(std::nullopt, 7) == 7);
    CHECK(resolve_seed(3, 7) == 3);
    setenv("DDSAT_SEED", "11", 1);
    CHECK(resolve_seed(std::nullopt, 7) == 11);
    CHECK(resolve_seed(3, 7) == 3);
    setenv("DDSAT_SEED", "junk", 1);
    CHECK_FALSE(seed_from_env());
    unsetenv("DDSAT_SEED");
}

TEST_CASE("run writes the three outputs") {
    auto cfg = throughput_scenario();
    cfg.secondaries = default_scenario(2).secondaries;
    cfg.frames = 20;
    const auto scen = write_scenario("run", cfg);
    const auto out = scratch("run_out");
    std::ostringstream so, se;
    RunOptions opts;
    opts.scenario = scen;
    opts.out = out;
    REQUIRE(cmd_run(opts, so, se) == kExitOk);
    CHECK(std::filesystem::exists(out / "frames.csv"));
    CHECK(std::filesystem::exists(out / "summary.csv"));
    const auto trace = slurp(out / "trace.txt");
    CHECK(trace.find("fusion [2,3]") != std::string::npos);
    CHECK(trace.find("fusion [2,3,4]") == std::string::npos);
    CHECK(so.str().find("jain index: 1") != std::string::npos);

    const auto out2 = scratch("run_out2");
    opts.out = out2;
    REQUIRE(cmd_run(opts, so, se) == kExitOk);
    CHECK(slurp(out / "frames.csv") == slurp(out2 / "frames.csv"));

    std::filesystem::remove_all(out);
    std::filesystem::remove_all(out2);
    std::filesystem::remove(scen);
}

TEST_CASE("run without a primary fuses all three data channels") {
    auto cfg = default_scenario(4);
    cfg.frames = 10;
    const auto scen = write_scenario("noprimary", cfg);
    const auto out = scratch("noprimary_out");
    std::ostringstream so, se;
    RunOptions opts;
    opts.scenario = scen;
    opts.out = out;
    REQUIRE(cmd_run(opts, so, se) == kExitOk);
    const auto trace = slurp(out / "trace.txt");
    CHECK(trace.find("fusion [2,3,4]") != std::string::npos);
    CHECK(trace.find("fusion [2,3]\n") == std::string::npos);
    std::filesystem::remove_all(out);
    std::filesystem::remove(scen);
}

TEST_CASE("run reports a missing scenario as a usage error") {
    std::ostringstream so, se;
    RunOptions opts;
    opts.scenario = "/no/such/scenario.ini";
    opts.out = scratch("missing");
    CHECK(cmd_run(opts, so, se) == kExitUsage);
    CHECK(se.str().find("/no/such/scenario.ini") != std::string::npos);
}

TEST_CASE("sweep-nodes rejects a reversed range") {
    std::ostringstream so, se;
    SweepNodesOptions opts;
    opts.min_nodes = 3;
    opts.max_nodes = 2;
    opts.out = scratch("sweep_bad");
    CHECK(cmd_sweep_nodes(opts, so, se) == kExitUsage);
    opts.min_nodes = 1;
    opts.max_nodes = 5;
    CHECK(cmd_sweep_nodes(opts, so, se) == kExitUsage);
}

TEST_CASE("sweep-nodes writes a sweep table") {
    std::ostringstream so, se;
    SweepNodesOptions opts;
    opts.frames = 60;
    opts.seeds = 2;
    opts.out = scratch("sweep_ok");
    REQUIRE(cmd_sweep_nodes(opts, so, se) == kExitOk);
    const auto csv = slurp(opts.out / "sweep.csv");
    CHECK(csv.find("param,value,metric,mean,ci95\n") != std::string::npos);
    CHECK(csv.find("nodes,4,throughput,2,0\n") != std::string::npos);
    CHECK(csv.find("nodes,1,jain,1,0\n") != std::string::npos);
    std::filesystem::remove_all(opts.out);
}

TEST_CASE("sweep-sensing with no shadowing is exact") {
    std::ostringstream so, se;
    SweepSensingOptions opts;
    opts.sigma = 0.0;
    opts.trials = 500;
    opts.out = scratch("sens");
    REQUIRE(cmd_sweep_sensing(opts, so, se) == kExitOk);
    const auto csv = slurp(opts.out / "sweep.csv");
    CHECK(csv.find("nodes,1,fused_accuracy,1,0\n") != std::string::npos);
    CHECK(csv.find("nodes,5,fused_accuracy,1,0\n") != std::string::npos);
    std::filesystem::remove_all(opts.out);

    opts.nodes = {};
    CHECK(cmd_sweep_sensing(opts, so, se) == kExitUsage);
}

TEST_CASE("node sweep runs are independent of the worker count") {
    const auto a = sweep_nodes(throughput_scenario(), 3, 4, 40, 3, 5, 10, 1);
    const auto b = sweep_nodes(throughput_scenario(), 3, 4, 40, 3, 5, 10, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].seed_throughput == b[i].seed_throughput);
        CHECK(a[i].seed_jain == b[i].seed_jain);
    }
}
