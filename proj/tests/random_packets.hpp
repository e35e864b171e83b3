#pragma once

// Generators of valid random packets for codec property tests.

#include "ddsat/wire.hpp"

#include <algorithm>
#include <numeric>

namespace testgen {

using namespace ddsat;

inline int uniform(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)); }

inline wire::Limits random_limits(Rng& rng) {
    return {uniform(rng, 1, kMaxSlotsPerState), uniform(rng, 2, kMaxChannels)};
}

inline std::uint8_t random_slot_mask(Rng& rng, int n) {
    return static_cast<std::uint8_t>(rng() & ((1u << n) - 1));
}

inline std::uint8_t random_channel_mask(Rng& rng, int channels) {
    // bit 0 is the CCC and stays clear
    return static_cast<std::uint8_t>(rng() & ((1u << channels) - 1) & ~1u);
}

inline wire::BeaconPacket random_beacon(Rng& rng, const wire::Limits& lim) {
    std::vector<int> chs(static_cast<std::size_t>(lim.num_channels - 1));
    std::iota(chs.begin(), chs.end(), 2);
    std::shuffle(chs.begin(), chs.end(), rng);
    chs.resize(static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(chs.size()))));
    wire::BeaconPacket p;
    p.occupied_ddsat_slots = random_slot_mask(rng, lim.slots_per_state);
    for (int c : chs) p.sensing_channels.push_back(ChannelId(static_cast<std::uint8_t>(c)));
    return p;
}

inline wire::DdsatPacket random_ddsat(Rng& rng, const wire::Limits& lim) {
    wire::DdsatPacket p;
    p.sender = NodeId(static_cast<std::uint8_t>(uniform(rng, 1, kMaxSecondaryId)));
    p.empty_channels = random_channel_mask(rng, lim.num_channels);
    p.requested_slots = static_cast<std::uint8_t>(uniform(rng, 0, lim.slots_per_state));
    p.priority_index = static_cast<std::uint16_t>(rng());
    p.occupied_ddsat_slots = random_slot_mask(rng, lim.slots_per_state);
    const int first = uniform(rng, 2, lim.num_channels);
    p.preferred.first = ChannelId(static_cast<std::uint8_t>(first));
    if (lim.num_channels > 2 && rng() % 4 != 0) {
        int second = first;
        while (second == first) second = uniform(rng, 2, lim.num_channels);
        p.preferred.second = ChannelId(static_cast<std::uint8_t>(second));
    }
    return p;
}

inline wire::DataPacket random_data(Rng& rng) {
    wire::DataPacket p;
    p.sender = NodeId(static_cast<std::uint8_t>(uniform(rng, 1, kMaxSecondaryId)));
    p.sequence = static_cast<std::uint16_t>(rng());
    p.payload.resize(static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(wire::kMaxPayload))));
    for (auto& b : p.payload) b = static_cast<std::uint8_t>(rng());
    return p;
}

}  // namespace testgen
