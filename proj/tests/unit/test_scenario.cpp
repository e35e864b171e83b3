#include "ddsat/scenario.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace ddsat;

namespace {

ScenarioError scenario_error(std::string_view text) {
    try {
        parse_scenario(text);
    } catch (const ScenarioError& e) {
        return e;
    }
    FAIL("scenario was accepted");
    return ScenarioError(ScenarioErrorKind::ParseError, "");
}

}  // namespace

TEST_CASE("minimal scenario takes defaults") {
    const auto cfg = parse_scenario("[secondary]\nid = 1\n");
    CHECK(cfg.slots_per_state == 4);
    CHECK(cfg.num_channels == 4);
    CHECK(cfg.radio.threshold_dbm == -60.0);
    CHECK(cfg.radio.noise_floor_dbm == -90.0);
    CHECK(cfg.slot_duration_s == 1.0);
    CHECK(cfg.guard_s == 0.1);
    CHECK_FALSE(cfg.primary);
    REQUIRE(cfg.secondaries.size() == 1);
    CHECK(cfg.secondaries[0].requested_slots == 4);
    CHECK(cfg.secondaries[0].traffic == TrafficClass::Normal);
    CHECK(cfg.sensing_channels() == std::vector<ChannelId>{ChannelId(2), ChannelId(3), ChannelId(4)});
}

TEST_CASE("full scenario parses every key") {
    const auto cfg = parse_scenario(R"(# comment
num_channels = 5
ccc_channel = 1
slots_per_state = 6
slot_duration_s = 0.5
guard_s = 0.05   # trailing comment
frames = 120
seed = 99
channel_frequencies_hz = 1e9, 2e9, 3e9, 4e9, 5e9
modulation = GMSK
sampling_rate_hz = 500000
lease_frames = 3
payload_bytes = 16
radio.noise_floor_dbm = -80
radio.shadow_sigma_db = 2.5
radio.threshold_dbm = -62
radio.link_power_dbm = -50
primary.channel = 5
primary.activity = bernoulli
primary.p_on = 0.25
primary.power_dbm = -45
psa.dt_normal = 2
psa.dt_realtime = 20
psa.pd_policy = reset

[secondary]
id = 3
traffic = realtime
requested_slots = 2
link_dbm = -48

[secondary]
id = 7
)");
    CHECK(cfg.num_channels == 5);
    CHECK(cfg.slots_per_state == 6);
    CHECK(cfg.guard_s == 0.05);
    CHECK(cfg.frames == 120);
    CHECK(cfg.seed == 99);
    CHECK(cfg.channel_frequencies_hz.size() == 5);
    CHECK(cfg.lease_frames == 3);
    CHECK(cfg.radio.shadow_sigma_db == 2.5);
    REQUIRE(cfg.primary);
    CHECK(cfg.primary->channel == ChannelId(5));
    CHECK(cfg.primary->activity == nodes::PrimaryActivity::Bernoulli);
    CHECK(cfg.dt.real_time == 20);
    CHECK(cfg.pd_policy == psa::PdPolicy::ResetOnGrant);
    REQUIRE(cfg.secondaries.size() == 2);
    CHECK(cfg.secondaries[0].traffic == TrafficClass::RealTime);
    CHECK(cfg.secondaries[0].link_dbm == -48.0);
    CHECK(cfg.secondaries[1].id == NodeId(7));
    CHECK(parse_scenario(render_scenario(cfg)) == cfg);
}

TEST_CASE("render and parse round-trip") {
    for (int k = 1; k <= 4; ++k) {
        auto cfg = default_scenario(k);
        cfg.radio.shadow_sigma_db = 5.94091474946945;
        cfg.primary = PrimarySpec{ChannelId(3), nodes::PrimaryActivity::Bernoulli, 0.3, -57.25};
        const auto back = parse_scenario(render_scenario(cfg));
        CHECK(back == cfg);
        CHECK(scenario_hash(back) == scenario_hash(cfg));
    }
    CHECK(scenario_hash(default_scenario(1)) != scenario_hash(default_scenario(2)));
}

TEST_CASE("validation errors name the field") {
    auto e = scenario_error("primary.channel = 1\n[secondary]\nid = 1\n");
    CHECK(e.kind() == ScenarioErrorKind::ValidationError);
    CHECK(e.field() == "primary.channel");

    e = scenario_error("[secondary]\nid = 2\n[secondary]\nid = 2\n");
    CHECK(e.kind() == ScenarioErrorKind::ValidationError);
    CHECK(e.field() == "secondary.id");

    CHECK(scenario_error("").field() == "secondary");
    CHECK(scenario_error("slots_per_state = 9\n[secondary]\nid = 1\n").field() == "slots_per_state");
    CHECK(scenario_error("num_channels = 1\n[secondary]\nid = 1\n").field() == "num_channels");
    CHECK(scenario_error("[secondary]\nid = 1\nrequested_slots = 5\n").field() == "secondary.requested_slots");
    CHECK(scenario_error("primary.channel = 5\n[secondary]\nid = 1\n").field() == "primary.channel");
    CHECK(scenario_error("primary.channel = 2\nprimary.p_on = 1.5\n[secondary]\nid = 1\n").field() ==
          "primary.p_on");
    CHECK(scenario_error("psa.dt_realtime = 1\n[secondary]\nid = 1\n").field() == "psa.dt_realtime");
    CHECK(scenario_error("radio.shadow_sigma_db = -1\n[secondary]\nid = 1\n").field() == "radio.shadow_sigma_db");
    CHECK(scenario_error("slots_per_state = 1\n[secondary]\nid = 1\n[secondary]\nid = 2\n").field() ==
          "secondary");
}

TEST_CASE("syntax errors carry the line") {
    auto e = scenario_error("frames = 10\nbogus = 1\n");
    CHECK(e.kind() == ScenarioErrorKind::ParseError);
    CHECK(e.line() == 2);
    CHECK(scenario_error("frames = ten\n").line() == 1);
    CHECK(scenario_error("frames\n").kind() == ScenarioErrorKind::ParseError);
    CHECK(scenario_error("[primary]\n").kind() == ScenarioErrorKind::ParseError);
    CHECK(scenario_error("[secondary]\ntraffic = normal\n").line() == 1);
    CHECK(scenario_error("ccc_channel = 2\n").kind() == ScenarioErrorKind::ParseError);
    CHECK(scenario_error("[secondary]\nid = 1\ncolour = red\n").line() == 3);
}

TEST_CASE("loading from disk") {
    const auto path = std::filesystem::temp_directory_path() / "ddsat_scenario_test.ini";
    {
        std::ofstream os(path);
        os << render_scenario(default_scenario(2));
    }
    CHECK(load_scenario(path) == default_scenario(2));
    std::filesystem::remove(path);
    try {
        load_scenario(path);
        FAIL("missing file was accepted");
    } catch (const ScenarioError& e) {
        CHECK(e.kind() == ScenarioErrorKind::IoError);
        CHECK(std::string(e.what()).find(path.string()) != std::string::npos);
    }
}

TEST_CASE("shipped scenarios are valid") {
    for (const char* name : {"three_nodes.ini", "noisy_sensing.ini"}) {
        CAPTURE(name);
        CHECK_NOTHROW(load_scenario(std::filesystem::path(DDSAT_SOURCE_DIR) / "scenarios" / name));
    }
}
