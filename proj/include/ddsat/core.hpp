#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ddsat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint8_t kCccChannel = 1;
inline constexpr int kMaxSlotsPerState = 8;
inline constexpr int kMaxChannels = 8;

/// 1-based channel number. Channel 1 is always the common control channel.
struct ChannelId {
    std::uint8_t index = 0;

    constexpr ChannelId() = default;
    explicit constexpr ChannelId(std::uint8_t i) : index(i) {}

    constexpr bool is_ccc() const { return index == kCccChannel; }
    constexpr auto operator<=>(const ChannelId&) const = default;
};

inline constexpr ChannelId kCcc{kCccChannel};

/// Node address. 0 is the base node, 1..254 are secondary nodes. Primary
/// nodes never transmit packets and have no address.
struct NodeId {
    std::uint8_t value = 0;

    constexpr NodeId() = default;
    explicit constexpr NodeId(std::uint8_t v) : value(v) {}

    constexpr bool is_base() const { return value == 0; }
    constexpr auto operator<=>(const NodeId&) const = default;
};

inline constexpr NodeId kBaseNode{0};
inline constexpr std::uint8_t kMaxSecondaryId = 254;

enum class TrafficClass { Normal, RealTime };

/// Data-type weight per traffic class; real-time must outrank normal.
struct DtValues {
    int normal = 1;
    int real_time = 10;

    int of(TrafficClass c) const { return c == TrafficClass::RealTime ? real_time : normal; }
    bool valid() const { return normal >= 0 && real_time > normal; }
    bool operator==(const DtValues&) const = default;
};

/// The two channels a secondary node would like to use, best first. The
/// second entry is absent when only one candidate channel exists.
struct PreferredPair {
    ChannelId first;
    std::optional<ChannelId> second;

    bool operator==(const PreferredPair&) const = default;
};

enum class StateKind { Sync, Ddsat, Data };

struct FramePhase {
    StateKind state = StateKind::Sync;
    int slot = 0;  // meaningful for Ddsat and Data only

    static constexpr FramePhase sync() { return {StateKind::Sync, 0}; }
    static constexpr FramePhase ddsat(int s) { return {StateKind::Ddsat, s}; }
    static constexpr FramePhase data(int s) { return {StateKind::Data, s}; }

    bool operator==(const FramePhase&) const = default;
};

struct FramePosition {
    std::int64_t frame = 0;
    FramePhase phase;

    bool operator==(const FramePosition&) const = default;
};

/// Super-frame timing: one Sync slot, N DDSAT slots, N Data slots.
///
/// The clock is a value; `next()` returns the clock one slot later. Slot
/// duration and guard only feed the virtual timestamps in logs.
class SuperFrameClock {
public:
    explicit SuperFrameClock(int slots_per_state = 4, double slot_duration_s = 1.0,
                             double guard_s = 0.1, std::int64_t tick = 0);

    int slots_per_state() const { return slots_per_state_; }
    int frame_length() const { return 1 + 2 * slots_per_state_; }
    double slot_duration_s() const { return slot_duration_s_; }
    double guard_s() const { return guard_s_; }
    std::int64_t tick() const { return tick_; }

    FramePosition position() const;
    double virtual_time_s() const;
    SuperFrameClock next() const;
    SuperFrameClock at(std::int64_t tick) const;

    /// Inverse of phase_at().
    std::int64_t tick_of(std::int64_t frame, FramePhase phase) const;

private:
    int slots_per_state_;
    double slot_duration_s_;
    double guard_s_;
    std::int64_t tick_;
};

FramePosition phase_at(const SuperFrameClock& clock, std::int64_t tick);

std::string to_string(FramePhase phase);
std::string to_string(TrafficClass c);
std::optional<TrafficClass> traffic_class_from(std::string_view name);

/// Deterministic generator used everywhere randomness is needed.
using Rng = std::mt19937_64;

/// Independent random streams, one per purpose, so that changing how many
/// draws one purpose makes does not shift the others.
enum class RngStream : std::uint32_t {
    SlotChoice = 1,
    SensingShadow = 2,
    LinkShadow = 3,
    PrimaryActivity = 4,
    Experiment = 5,
};

/// `salt` separates sub-streams of one purpose (e.g. one per sweep point).
Rng make_rng(std::uint64_t seed, RngStream stream, std::uint32_t salt = 0);

}  // namespace ddsat
