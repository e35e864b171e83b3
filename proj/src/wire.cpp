#include "ddsat/wire.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <iterator>

#include <fmt/format.h>

namespace ddsat::wire {

namespace {

constexpr std::array<std::uint16_t, 256> make_crc_table() {
    std::array<std::uint16_t, 256> table{};
    for (unsigned i = 0; i < 256; ++i) {
        auto crc = static_cast<std::uint16_t>(i << 8);
        for (int bit = 0; bit < 8; ++bit) {
            crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                                 : static_cast<std::uint16_t>(crc << 1);
        }
        table[i] = crc;
    }
    return table;
}

constexpr auto kCrcTable = make_crc_table();

[[noreturn]] void fail(WireErrorKind kind, const std::string& what) { throw WireError(kind, what); }

void check_limits(const Limits& limits) {
    if (limits.slots_per_state < 1 || limits.slots_per_state > kMaxSlotsPerState ||
        limits.num_channels < 2 || limits.num_channels > kMaxChannels) {
        throw Error(fmt::format("wire limits out of range: N={} channels={}",
                                limits.slots_per_state, limits.num_channels));
    }
}

std::uint8_t high_mask(int used_bits) {
    return used_bits >= 8 ? 0 : static_cast<std::uint8_t>(0xFF << used_bits);
}

bool valid_data_channel(std::uint8_t index, const Limits& limits) {
    return index > kCccChannel && index <= limits.num_channels;
}

void append_crc(Bytes& out) {
    const auto crc = crc16(out);
    out.push_back(static_cast<std::uint8_t>(crc >> 8));
    out.push_back(static_cast<std::uint8_t>(crc & 0xFF));
}

// Type, then declared length, then checksum; callers validate fields after.
void check_frame(std::span<const std::uint8_t> bytes, std::uint8_t type, std::size_t expected) {
    if (bytes.empty()) fail(WireErrorKind::Truncated, "empty packet");
    if (bytes[0] != type) {
        fail(WireErrorKind::BadType, fmt::format("expected type {:#04x}, got {:#04x}", type, bytes[0]));
    }
    if (bytes.size() < expected) {
        fail(WireErrorKind::Truncated,
             fmt::format("packet is {} bytes, header declares {}", bytes.size(), expected));
    }
    if (bytes.size() > expected) {
        fail(WireErrorKind::BadLength,
             fmt::format("packet is {} bytes, header declares {}", bytes.size(), expected));
    }
    const auto body = bytes.first(expected - 2);
    const auto stored = static_cast<std::uint16_t>((bytes[expected - 2] << 8) | bytes[expected - 1]);
    if (crc16(body) != stored) fail(WireErrorKind::BadCrc, "checksum mismatch");
}

void validate(const BeaconPacket& p, const Limits& limits) {
    if (p.sensing_channels.size() > kMaxBeaconChannels) {
        fail(WireErrorKind::InvariantViolation, "beacon lists more than 15 channels");
    }
    if (p.occupied_ddsat_slots & high_mask(limits.slots_per_state)) {
        fail(WireErrorKind::InvariantViolation, "occupied bitmap marks a slot >= N");
    }
    std::set<ChannelId> seen;
    for (auto c : p.sensing_channels) {
        if (!valid_data_channel(c.index, limits)) {
            fail(WireErrorKind::InvariantViolation,
                 fmt::format("channel {} cannot be a sensing channel", c.index));
        }
        if (!seen.insert(c).second) {
            fail(WireErrorKind::InvariantViolation, fmt::format("channel {} listed twice", c.index));
        }
    }
}

void validate(const DdsatPacket& p, const Limits& limits) {
    if (p.sender.is_base() || p.sender.value > kMaxSecondaryId) {
        fail(WireErrorKind::InvariantViolation, "sender is not a secondary node id");
    }
    if (p.empty_channels & 0x01) {
        fail(WireErrorKind::InvariantViolation, "CCC reported as an empty channel");
    }
    if (p.empty_channels & high_mask(limits.num_channels)) {
        fail(WireErrorKind::InvariantViolation, "empty-channel bitmap names an unknown channel");
    }
    if (p.requested_slots > limits.slots_per_state) {
        fail(WireErrorKind::InvariantViolation,
             fmt::format("requested {} slots, N is {}", p.requested_slots, limits.slots_per_state));
    }
    if (p.occupied_ddsat_slots & high_mask(limits.slots_per_state)) {
        fail(WireErrorKind::InvariantViolation, "occupied bitmap marks a slot >= N");
    }
    if (!valid_data_channel(p.preferred.first.index, limits)) {
        fail(WireErrorKind::InvariantViolation, "first preferred channel invalid");
    }
    if (p.preferred.second) {
        if (!valid_data_channel(p.preferred.second->index, limits)) {
            fail(WireErrorKind::InvariantViolation, "second preferred channel invalid");
        }
        if (*p.preferred.second == p.preferred.first) {
            fail(WireErrorKind::InvariantViolation, "preferred channels must differ");
        }
    }
}

}  // namespace

std::string_view to_string(WireErrorKind kind) {
    switch (kind) {
    case WireErrorKind::BadCrc: return "BadCrc";
    case WireErrorKind::BadType: return "BadType";
    case WireErrorKind::Truncated: return "Truncated";
    case WireErrorKind::BadLength: return "BadLength";
    case WireErrorKind::InvariantViolation: return "InvariantViolation";
    }
    return "?";
}

WireError::WireError(WireErrorKind kind, const std::string& what)
    : Error(fmt::format("{}: {}", to_string(kind), what)), kind_(kind) {}

std::uint16_t crc16(std::span<const std::uint8_t> bytes) {
    std::uint16_t crc = 0xFFFF;
    for (auto b : bytes) {
        crc = static_cast<std::uint16_t>((crc << 8) ^ kCrcTable[((crc >> 8) ^ b) & 0xFF]);
    }
    return crc;
}

Bytes encode_beacon(const BeaconPacket& p, const Limits& limits) {
    check_limits(limits);
    validate(p, limits);
    Bytes out{kBeaconType, p.occupied_ddsat_slots,
              static_cast<std::uint8_t>(p.sensing_channels.size())};
    for (auto c : p.sensing_channels) out.push_back(c.index);
    append_crc(out);
    return out;
}

BeaconPacket decode_beacon(std::span<const std::uint8_t> bytes, const Limits& limits) {
    check_limits(limits);
    if (!bytes.empty() && bytes[0] == kBeaconType && bytes.size() < 3) {
        fail(WireErrorKind::Truncated, "beacon header incomplete");
    }
    const std::size_t count = bytes.size() >= 3 ? bytes[2] : 0;
    check_frame(bytes, kBeaconType, 3 + count + 2);

    BeaconPacket p;
    p.occupied_ddsat_slots = bytes[1];
    for (std::size_t i = 0; i < count; ++i) p.sensing_channels.emplace_back(bytes[3 + i]);
    validate(p, limits);
    return p;
}

Bytes encode_ddsat(const DdsatPacket& p, const Limits& limits) {
    check_limits(limits);
    validate(p, limits);
    const std::uint8_t second = p.preferred.second ? p.preferred.second->index : 0;
    Bytes out{kDdsatType,
              p.sender.value,
              p.empty_channels,
              p.requested_slots,
              static_cast<std::uint8_t>(p.priority_index >> 8),
              static_cast<std::uint8_t>(p.priority_index & 0xFF),
              p.occupied_ddsat_slots,
              static_cast<std::uint8_t>((p.preferred.first.index << 4) | second)};
    append_crc(out);
    return out;
}

DdsatPacket decode_ddsat(std::span<const std::uint8_t> bytes, const Limits& limits) {
    check_limits(limits);
    check_frame(bytes, kDdsatType, kDdsatPacketSize);

    DdsatPacket p;
    p.sender = NodeId(bytes[1]);
    p.empty_channels = bytes[2];
    p.requested_slots = bytes[3];
    p.priority_index = static_cast<std::uint16_t>((bytes[4] << 8) | bytes[5]);
    p.occupied_ddsat_slots = bytes[6];
    p.preferred.first = ChannelId(static_cast<std::uint8_t>(bytes[7] >> 4));
    if (const auto second = static_cast<std::uint8_t>(bytes[7] & 0x0F); second != 0) {
        p.preferred.second = ChannelId(second);
    }
    validate(p, limits);
    return p;
}

Bytes encode_data(const DataPacket& p) {
    if (p.payload.size() > kMaxPayload) {
        fail(WireErrorKind::InvariantViolation, "payload longer than 255 bytes");
    }
    if (p.sender.is_base() || p.sender.value > kMaxSecondaryId) {
        fail(WireErrorKind::InvariantViolation, "sender is not a secondary node id");
    }
    Bytes out;
    out.reserve(p.payload.size() + 7);
    out.push_back(kDataType);
    out.push_back(p.sender.value);
    out.push_back(static_cast<std::uint8_t>(p.sequence >> 8));
    out.push_back(static_cast<std::uint8_t>(p.sequence & 0xFF));
    out.push_back(static_cast<std::uint8_t>(p.payload.size()));
    std::copy(p.payload.begin(), p.payload.end(), std::back_inserter(out));
    append_crc(out);
    return out;
}

DataPacket decode_data(std::span<const std::uint8_t> bytes) {
    if (!bytes.empty() && bytes[0] == kDataType && bytes.size() < 5) {
        fail(WireErrorKind::Truncated, "data header incomplete");
    }
    const std::size_t len = bytes.size() >= 5 ? bytes[4] : 0;
    check_frame(bytes, kDataType, 5 + len + 2);

    DataPacket p;
    p.sender = NodeId(bytes[1]);
    p.sequence = static_cast<std::uint16_t>((bytes[2] << 8) | bytes[3]);
    p.payload.assign(bytes.begin() + 5, bytes.begin() + 5 + static_cast<std::ptrdiff_t>(len));
    if (p.sender.is_base() || p.sender.value > kMaxSecondaryId) {
        fail(WireErrorKind::InvariantViolation, "sender is not a secondary node id");
    }
    return p;
}

std::optional<std::uint8_t> packet_type(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) return std::nullopt;
    return bytes[0];
}

std::uint8_t channel_mask(const std::set<ChannelId>& channels) {
    std::uint8_t mask = 0;
    for (auto c : channels) {
        if (c.index < 1 || c.index > kMaxChannels) {
            throw Error(fmt::format("channel {} does not fit a channel bitmap", c.index));
        }
        mask = static_cast<std::uint8_t>(mask | (1u << (c.index - 1)));
    }
    return mask;
}

std::set<ChannelId> channels_in(std::uint8_t mask) {
    std::set<ChannelId> out;
    for (int bit = 0; bit < 8; ++bit) {
        if (mask & (1u << bit)) out.insert(ChannelId(static_cast<std::uint8_t>(bit + 1)));
    }
    return out;
}

std::uint8_t slot_mask(const std::set<int>& slots) {
    std::uint8_t mask = 0;
    for (int s : slots) {
        if (s < 0 || s >= kMaxSlotsPerState) {
            throw Error(fmt::format("slot {} does not fit a slot bitmap", s));
        }
        mask = static_cast<std::uint8_t>(mask | (1u << s));
    }
    return mask;
}

std::set<int> slots_in(std::uint8_t mask) {
    std::set<int> out;
    for (int bit = 0; bit < 8; ++bit) {
        if (mask & (1u << bit)) out.insert(bit);
    }
    return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) out += fmt::format("{:02x}", b);
    return out;
}

Bytes from_hex(std::string_view text) {
    Bytes out;
    int pending = -1;
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) continue;
        int v;
        if (ch >= '0' && ch <= '9') v = ch - '0';
        else if (ch >= 'a' && ch <= 'f') v = ch - 'a' + 10;
        else if (ch >= 'A' && ch <= 'F') v = ch - 'A' + 10;
        else throw Error(fmt::format("invalid hex digit '{}'", ch));
        if (pending < 0) {
            pending = v;
        } else {
            out.push_back(static_cast<std::uint8_t>((pending << 4) | v));
            pending = -1;
        }
    }
    if (pending >= 0) throw Error("odd number of hex digits");
    return out;
}

}  // namespace ddsat::wire
