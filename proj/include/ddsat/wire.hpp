#pragma once

// On-air packet formats. All multi-byte integers are big-endian and every
// packet ends with a CRC-16/CCITT-FALSE over the preceding bytes.
//
//   beacon : [0x01][occupied slots][M][M channel indices][crc:2]
//   ddsat  : [0x02][sender][empty channels][requested][priority:2]
//            [occupied slots][first<<4 | second][crc:2]
//   data   : [0x03][sender][sequence:2][len][payload][crc:2]
//
// Slot bitmaps use bit i for slot i. Channel bitmaps use bit (c-1) for
// channel c. A preferred-channel nibble of 0 means "no second choice".

#include "ddsat/core.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ddsat::wire {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kBeaconType = 0x01;
inline constexpr std::uint8_t kDdsatType = 0x02;
inline constexpr std::uint8_t kDataType = 0x03;

inline constexpr std::size_t kMaxBeaconChannels = 15;
inline constexpr std::size_t kMaxPayload = 255;
inline constexpr std::size_t kDdsatPacketSize = 10;

/// Network dimensions the codec validates against.
struct Limits {
    int slots_per_state = 4;
    int num_channels = 4;
};

struct BeaconPacket {
    std::uint8_t occupied_ddsat_slots = 0;
    std::vector<ChannelId> sensing_channels;

    bool operator==(const BeaconPacket&) const = default;
};

struct DdsatPacket {
    NodeId sender;
    std::uint8_t empty_channels = 0;
    std::uint8_t requested_slots = 0;
    std::uint16_t priority_index = 0;
    std::uint8_t occupied_ddsat_slots = 0;
    PreferredPair preferred;

    bool operator==(const DdsatPacket&) const = default;
};

struct DataPacket {
    NodeId sender;
    std::uint16_t sequence = 0;
    Bytes payload;

    bool operator==(const DataPacket&) const = default;
};

enum class WireErrorKind { BadCrc, BadType, Truncated, BadLength, InvariantViolation };

std::string_view to_string(WireErrorKind kind);

class WireError : public Error {
public:
    WireError(WireErrorKind kind, const std::string& what);
    WireErrorKind kind() const { return kind_; }

private:
    WireErrorKind kind_;
};

std::uint16_t crc16(std::span<const std::uint8_t> bytes);

Bytes encode_beacon(const BeaconPacket& p, const Limits& limits = {});
BeaconPacket decode_beacon(std::span<const std::uint8_t> bytes, const Limits& limits = {});

Bytes encode_ddsat(const DdsatPacket& p, const Limits& limits = {});
DdsatPacket decode_ddsat(std::span<const std::uint8_t> bytes, const Limits& limits = {});

Bytes encode_data(const DataPacket& p);
DataPacket decode_data(std::span<const std::uint8_t> bytes);

std::optional<std::uint8_t> packet_type(std::span<const std::uint8_t> bytes);

// Bitmap helpers.
std::uint8_t channel_mask(const std::set<ChannelId>& channels);
std::set<ChannelId> channels_in(std::uint8_t mask);
std::uint8_t slot_mask(const std::set<int>& slots);
std::set<int> slots_in(std::uint8_t mask);

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Accepts upper or lower case, ignores whitespace.
Bytes from_hex(std::string_view text);

}  // namespace ddsat::wire
