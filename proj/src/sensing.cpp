#include "ddsat/sensing.hpp"

#include <fmt/format.h>

namespace ddsat::sensing {

std::set<ChannelId> SensingReport::empty_channels() const {
    std::set<ChannelId> out;
    for (const auto& [channel, verdict] : verdicts) {
        if (verdict == Verdict::Empty) out.insert(channel);
    }
    return out;
}

Verdict detect(double measured_power_dbm, const DetectionConfig& cfg) {
    return measured_power_dbm > cfg.threshold_dbm ? Verdict::Occupied : Verdict::Empty;
}

FusionResult fuse_majority(std::span<const SensingReport> reports,
                           std::span<const ChannelId> channels) {
    if (reports.empty()) throw SensingError("fusion needs at least one sensing report");

    FusionResult result;
    for (auto channel : channels) {
        std::size_t empty_votes = 0;
        for (const auto& report : reports) {
            const auto it = report.verdicts.find(channel);
            if (it == report.verdicts.end()) {
                throw SensingError(fmt::format("report from node {} has no verdict for channel {}",
                                               report.node.value, channel.index));
            }
            if (it->second == Verdict::Empty) ++empty_votes;
        }
        if (2 * empty_votes > reports.size()) result.empty_channels.insert(channel);
    }
    return result;
}

SensingReport sense_all(NodeId node, std::span<const ChannelId> channels, const MediumView& medium,
                        const DetectionConfig& cfg, Rng& rng) {
    SensingReport report{node, {}};
    for (auto channel : channels) {
        if (channel.is_ccc()) throw SensingError("the CCC is never sensed");
        report.verdicts[channel] = detect(medium.sample_power(node, channel, rng), cfg);
    }
    return report;
}

}  // namespace ddsat::sensing
