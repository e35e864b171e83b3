#pragma once

// Scenario files are flat "key = value" text. Dotted keys address a section
// (radio.threshold_dbm = -60); each "[secondary]" header opens one secondary
// node entry whose undotted keys follow it. '#' starts a comment.

#include "ddsat/core.hpp"
#include "ddsat/nodes.hpp"
#include "ddsat/psa.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ddsat {

struct SecondarySpec {
    NodeId id;
    TrafficClass traffic = TrafficClass::Normal;
    int requested_slots = 4;
    /// Mean data-link received power on every data channel; radio default if unset.
    std::optional<double> link_dbm;

    bool operator==(const SecondarySpec&) const = default;
};

struct PrimarySpec {
    ChannelId channel;
    nodes::PrimaryActivity activity = nodes::PrimaryActivity::AlwaysOn;
    double p_on = 1.0;
    double power_dbm = -50.0;

    bool operator==(const PrimarySpec&) const = default;
};

struct RadioSpec {
    double noise_floor_dbm = -90.0;
    double shadow_sigma_db = 0.0;
    double threshold_dbm = -60.0;
    double link_power_dbm = -55.0;

    bool operator==(const RadioSpec&) const = default;
};

struct ScenarioConfig {
    int num_channels = 4;
    int slots_per_state = 4;
    double slot_duration_s = 1.0;
    double guard_s = 0.1;
    std::int64_t frames = 300;
    std::uint64_t seed = 1;

    // PHY metadata; stored and rendered, never interpreted.
    std::vector<double> channel_frequencies_hz;
    std::string modulation;
    std::optional<double> sampling_rate_hz;

    RadioSpec radio;
    std::optional<PrimarySpec> primary;
    std::vector<SecondarySpec> secondaries;

    DtValues dt;
    psa::PdPolicy pd_policy = psa::PdPolicy::Accumulate;
    int lease_frames = nodes::BaseNode::kDefaultLeaseFrames;
    int payload_bytes = 32;

    /// Every channel except the CCC, ascending.
    std::vector<ChannelId> sensing_channels() const;

    bool operator==(const ScenarioConfig&) const = default;
};

enum class ScenarioErrorKind { ParseError, ValidationError, IoError };

class ScenarioError : public Error {
public:
    ScenarioError(ScenarioErrorKind kind, const std::string& what, std::size_t line = 0,
                  std::string field = {});
    ScenarioErrorKind kind() const { return kind_; }
    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    ScenarioErrorKind kind_;
    std::size_t line_;
    std::string field_;
};

/// Parses and validates.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Throws ScenarioError(ValidationError) naming the offending field.
void validate(const ScenarioConfig& cfg);

/// Canonical text form; parse_scenario(render_scenario(c)) == c.
std::string render_scenario(const ScenarioConfig& cfg);

/// FNV-1a 64 of the canonical rendering.
std::uint64_t scenario_hash(const ScenarioConfig& cfg);

/// Four channels with channel 1 as CCC, N = 4, the 2.4 GHz channel plan as
/// metadata, `num_secondaries` normal-traffic nodes requesting 4 slots each.
ScenarioConfig default_scenario(int num_secondaries);

}  // namespace ddsat
