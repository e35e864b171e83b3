#include "ddsat/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace ddsat {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
    throw ScenarioError(ScenarioErrorKind::ParseError, fmt::format("line {}: {}", line, what), line);
}

[[noreturn]] void invalid(const std::string& field, const std::string& reason) {
    throw ScenarioError(ScenarioErrorKind::ValidationError, fmt::format("{}: {}", field, reason), 0,
                        field);
}

double to_double(std::string_view v, std::size_t line) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto res = std::from_chars(v.data(), end, out);
    if (res.ec != std::errc{} || res.ptr != end) parse_error(line, fmt::format("'{}' is not a number", v));
    return out;
}

long long to_int(std::string_view v, std::size_t line) {
    long long out = 0;
    const auto* end = v.data() + v.size();
    const auto res = std::from_chars(v.data(), end, out);
    if (res.ec != std::errc{} || res.ptr != end) parse_error(line, fmt::format("'{}' is not an integer", v));
    return out;
}

std::vector<double> to_double_list(std::string_view v, std::size_t line) {
    std::vector<double> out;
    while (!v.empty()) {
        const auto comma = v.find(',');
        const auto item = trim(v.substr(0, comma));
        if (item.empty()) parse_error(line, "empty list item");
        out.push_back(to_double(item, line));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    return out;
}

void apply_secondary_key(SecondarySpec& sn, std::string_view key, std::string_view value, std::size_t line) {
    if (key == "id") {
        const auto id = to_int(value, line);
        if (id < 0 || id > 255) parse_error(line, "secondary id out of byte range");
        sn.id = NodeId(static_cast<std::uint8_t>(id));
    } else if (key == "traffic") {
        const auto c = traffic_class_from(value);
        if (!c) parse_error(line, fmt::format("unknown traffic class '{}'", value));
        sn.traffic = *c;
    } else if (key == "requested_slots") {
        sn.requested_slots = static_cast<int>(to_int(value, line));
    } else if (key == "link_dbm") {
        sn.link_dbm = to_double(value, line);
    } else {
        parse_error(line, fmt::format("unknown secondary key '{}'", key));
    }
}

PrimarySpec& primary_of(ScenarioConfig& cfg) {
    if (!cfg.primary) cfg.primary.emplace();
    return *cfg.primary;
}

void apply_key(ScenarioConfig& cfg, std::string_view key, std::string_view value, std::size_t line) {
    if (key == "num_channels") cfg.num_channels = static_cast<int>(to_int(value, line));
    else if (key == "ccc_channel") {
        if (to_int(value, line) != kCccChannel) parse_error(line, "ccc_channel must be 1");
    }
    else if (key == "slots_per_state") cfg.slots_per_state = static_cast<int>(to_int(value, line));
    else if (key == "slot_duration_s") cfg.slot_duration_s = to_double(value, line);
    else if (key == "guard_s") cfg.guard_s = to_double(value, line);
    else if (key == "frames") cfg.frames = to_int(value, line);
    else if (key == "seed") {
        const auto s = to_int(value, line);
        if (s < 0) parse_error(line, "seed must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    else if (key == "channel_frequencies_hz") cfg.channel_frequencies_hz = to_double_list(value, line);
    else if (key == "modulation") cfg.modulation = std::string(value);
    else if (key == "sampling_rate_hz") cfg.sampling_rate_hz = to_double(value, line);
    else if (key == "lease_frames") cfg.lease_frames = static_cast<int>(to_int(value, line));
    else if (key == "payload_bytes") cfg.payload_bytes = static_cast<int>(to_int(value, line));
    else if (key == "radio.noise_floor_dbm") cfg.radio.noise_floor_dbm = to_double(value, line);
    else if (key == "radio.shadow_sigma_db") cfg.radio.shadow_sigma_db = to_double(value, line);
    else if (key == "radio.threshold_dbm") cfg.radio.threshold_dbm = to_double(value, line);
    else if (key == "radio.link_power_dbm") cfg.radio.link_power_dbm = to_double(value, line);
    else if (key == "primary.channel") {
        const auto c = to_int(value, line);
        if (c < 0 || c > 255) parse_error(line, "channel out of byte range");
        primary_of(cfg).channel = ChannelId(static_cast<std::uint8_t>(c));
    }
    else if (key == "primary.activity") {
        if (value == "always_on") primary_of(cfg).activity = nodes::PrimaryActivity::AlwaysOn;
        else if (value == "bernoulli") primary_of(cfg).activity = nodes::PrimaryActivity::Bernoulli;
        else parse_error(line, fmt::format("unknown primary activity '{}'", value));
    }
    else if (key == "primary.p_on") primary_of(cfg).p_on = to_double(value, line);
    else if (key == "primary.power_dbm") primary_of(cfg).power_dbm = to_double(value, line);
    else if (key == "psa.dt_normal") cfg.dt.normal = static_cast<int>(to_int(value, line));
    else if (key == "psa.dt_realtime") cfg.dt.real_time = static_cast<int>(to_int(value, line));
    else if (key == "psa.pd_policy") {
        if (value == "accumulate") cfg.pd_policy = psa::PdPolicy::Accumulate;
        else if (value == "reset") cfg.pd_policy = psa::PdPolicy::ResetOnGrant;
        else parse_error(line, fmt::format("unknown pd policy '{}'", value));
    }
    else parse_error(line, fmt::format("unknown key '{}'", key));
}

void require_finite(double v, const std::string& field) {
    if (!std::isfinite(v)) invalid(field, "must be finite");
}

}  // namespace

ScenarioError::ScenarioError(ScenarioErrorKind kind, const std::string& what, std::size_t line,
                             std::string field)
    : Error(what), kind_(kind), line_(line), field_(std::move(field)) {}

std::vector<ChannelId> ScenarioConfig::sensing_channels() const {
    std::vector<ChannelId> out;
    for (int c = kCccChannel + 1; c <= num_channels; ++c) out.emplace_back(static_cast<std::uint8_t>(c));
    return out;
}

ScenarioConfig parse_scenario(std::string_view text) {
    ScenarioConfig cfg;
    std::vector<std::size_t> id_lines;
    bool in_secondary = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line != "[secondary]") parse_error(line_no, fmt::format("unknown section {}", line));
            cfg.secondaries.emplace_back();
            id_lines.push_back(line_no);
            in_secondary = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) parse_error(line_no, "expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) parse_error(line_no, "missing key");
        if (value.empty()) parse_error(line_no, fmt::format("missing value for '{}'", key));

        if (in_secondary && key.find('.') == std::string_view::npos) {
            apply_secondary_key(cfg.secondaries.back(), key, value, line_no);
        } else {
            apply_key(cfg, key, value, line_no);
        }
    }
    for (std::size_t i = 0; i < cfg.secondaries.size(); ++i) {
        if (cfg.secondaries[i].id.is_base()) {
            parse_error(id_lines[i], "[secondary] entry needs a nonzero id");
        }
    }
    validate(cfg);
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ScenarioError(ScenarioErrorKind::IoError,
                            fmt::format("cannot read scenario file '{}'", path.string()));
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

void validate(const ScenarioConfig& cfg) {
    if (cfg.slots_per_state < 1 || cfg.slots_per_state > kMaxSlotsPerState) {
        invalid("slots_per_state", fmt::format("must be in 1..{}", kMaxSlotsPerState));
    }
    if (cfg.num_channels < 2 || cfg.num_channels > kMaxChannels) {
        invalid("num_channels", fmt::format("must be in 2..{}", kMaxChannels));
    }
    if (!(cfg.slot_duration_s > 0.0) || !std::isfinite(cfg.slot_duration_s)) {
        invalid("slot_duration_s", "must be positive");
    }
    if (!(cfg.guard_s >= 0.0) || !std::isfinite(cfg.guard_s)) invalid("guard_s", "must be non-negative");
    if (cfg.frames < 1) invalid("frames", "must be at least 1");
    if (!cfg.channel_frequencies_hz.empty() &&
        cfg.channel_frequencies_hz.size() != static_cast<std::size_t>(cfg.num_channels)) {
        invalid("channel_frequencies_hz", "needs one entry per channel");
    }
    if (cfg.lease_frames < 1) invalid("lease_frames", "must be at least 1");
    if (cfg.payload_bytes < 0 || cfg.payload_bytes > 255) invalid("payload_bytes", "must be in 0..255");

    require_finite(cfg.radio.noise_floor_dbm, "radio.noise_floor_dbm");
    require_finite(cfg.radio.threshold_dbm, "radio.threshold_dbm");
    require_finite(cfg.radio.link_power_dbm, "radio.link_power_dbm");
    require_finite(cfg.radio.shadow_sigma_db, "radio.shadow_sigma_db");
    if (cfg.radio.shadow_sigma_db < 0.0) invalid("radio.shadow_sigma_db", "must be non-negative");

    if (cfg.primary) {
        const auto& pn = *cfg.primary;
        if (pn.channel.is_ccc()) invalid("primary.channel", "the primary cannot sit on the CCC");
        if (pn.channel.index < 1 || pn.channel.index > cfg.num_channels) {
            invalid("primary.channel", "not a configured channel");
        }
        if (!(pn.p_on >= 0.0 && pn.p_on <= 1.0)) invalid("primary.p_on", "must be in [0, 1]");
        require_finite(pn.power_dbm, "primary.power_dbm");
    }

    if (!cfg.dt.valid()) invalid("psa.dt_realtime", "must exceed psa.dt_normal, both non-negative");

    if (cfg.secondaries.empty()) invalid("secondary", "at least one secondary node is required");
    if (cfg.secondaries.size() > static_cast<std::size_t>(cfg.slots_per_state)) {
        invalid("secondary", "more secondary nodes than DDSAT slots");
    }
    std::set<NodeId> ids;
    for (const auto& sn : cfg.secondaries) {
        if (sn.id.is_base() || sn.id.value > kMaxSecondaryId) {
            invalid("secondary.id", fmt::format("{} is not in 1..254", sn.id.value));
        }
        if (!ids.insert(sn.id).second) invalid("secondary.id", fmt::format("duplicate id {}", sn.id.value));
        if (sn.requested_slots < 0 || sn.requested_slots > cfg.slots_per_state) {
            invalid("secondary.requested_slots", fmt::format("node {} requests {} slots, N is {}",
                                                             sn.id.value, sn.requested_slots,
                                                             cfg.slots_per_state));
        }
        if (sn.link_dbm) require_finite(*sn.link_dbm, "secondary.link_dbm");
    }
}

std::string render_scenario(const ScenarioConfig& cfg) {
    std::string out;
    auto kv = [&](std::string_view k, const auto& v) { out += fmt::format("{} = {}\n", k, v); };
    kv("num_channels", cfg.num_channels);
    kv("ccc_channel", int{kCccChannel});
    kv("slots_per_state", cfg.slots_per_state);
    kv("slot_duration_s", cfg.slot_duration_s);
    kv("guard_s", cfg.guard_s);
    kv("frames", cfg.frames);
    kv("seed", cfg.seed);
    if (!cfg.channel_frequencies_hz.empty()) {
        kv("channel_frequencies_hz", fmt::format("{}", fmt::join(cfg.channel_frequencies_hz, ", ")));
    }
    if (!cfg.modulation.empty()) kv("modulation", cfg.modulation);
    if (cfg.sampling_rate_hz) kv("sampling_rate_hz", *cfg.sampling_rate_hz);
    kv("lease_frames", cfg.lease_frames);
    kv("payload_bytes", cfg.payload_bytes);
    kv("radio.noise_floor_dbm", cfg.radio.noise_floor_dbm);
    kv("radio.shadow_sigma_db", cfg.radio.shadow_sigma_db);
    kv("radio.threshold_dbm", cfg.radio.threshold_dbm);
    kv("radio.link_power_dbm", cfg.radio.link_power_dbm);
    kv("psa.dt_normal", cfg.dt.normal);
    kv("psa.dt_realtime", cfg.dt.real_time);
    kv("psa.pd_policy", cfg.pd_policy == psa::PdPolicy::Accumulate ? "accumulate" : "reset");
    if (cfg.primary) {
        kv("primary.channel", int{cfg.primary->channel.index});
        kv("primary.activity",
           cfg.primary->activity == nodes::PrimaryActivity::AlwaysOn ? "always_on" : "bernoulli");
        kv("primary.p_on", cfg.primary->p_on);
        kv("primary.power_dbm", cfg.primary->power_dbm);
    }
    for (const auto& sn : cfg.secondaries) {
        out += "\n[secondary]\n";
        kv("id", int{sn.id.value});
        kv("traffic", to_string(sn.traffic));
        kv("requested_slots", sn.requested_slots);
        if (sn.link_dbm) kv("link_dbm", *sn.link_dbm);
    }
    return out;
}

std::uint64_t scenario_hash(const ScenarioConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : render_scenario(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ScenarioConfig default_scenario(int num_secondaries) {
    ScenarioConfig cfg;
    cfg.channel_frequencies_hz = {2.401624512e9, 2.402124512e9, 2.402624512e9, 2.403124512e9};
    cfg.modulation = "GMSK";
    cfg.sampling_rate_hz = 0.5e6;
    for (int i = 1; i <= num_secondaries; ++i) {
        cfg.secondaries.push_back(SecondarySpec{NodeId(static_cast<std::uint8_t>(i)), TrafficClass::Normal, 4, {}});
    }
    return cfg;
}

}  // namespace ddsat
