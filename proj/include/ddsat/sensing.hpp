#pragma once

#include "ddsat/core.hpp"

#include <map>
#include <set>
#include <span>

namespace ddsat::sensing {

enum class Verdict { Empty, Occupied };

struct DetectionConfig {
    double threshold_dbm = -60.0;
};

struct SensingReport {
    NodeId node;
    std::map<ChannelId, Verdict> verdicts;

    std::set<ChannelId> empty_channels() const;
    bool operator==(const SensingReport&) const = default;
};

struct FusionResult {
    std::set<ChannelId> empty_channels;

    bool operator==(const FusionResult&) const = default;
};

class SensingError : public Error {
public:
    using Error::Error;
};

/// Read-only view of received power, as seen by one receiver.
class MediumView {
public:
    virtual ~MediumView() = default;
    virtual double sample_power(NodeId receiver, ChannelId channel, Rng& rng) const = 0;
};

/// Energy detection: occupied iff the measured power is strictly above the
/// threshold.
Verdict detect(double measured_power_dbm, const DetectionConfig& cfg);

/// Majority fusion. A channel is empty iff strictly more than half of the
/// reports say so; an even split counts as occupied.
FusionResult fuse_majority(std::span<const SensingReport> reports,
                           std::span<const ChannelId> channels);

/// One power sample and one verdict per channel.
SensingReport sense_all(NodeId node, std::span<const ChannelId> channels, const MediumView& medium,
                        const DetectionConfig& cfg, Rng& rng);

}  // namespace ddsat::sensing
