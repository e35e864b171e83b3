#include "ddsat/core.hpp"

#include <fmt/format.h>

namespace ddsat {

SuperFrameClock::SuperFrameClock(int slots_per_state, double slot_duration_s, double guard_s,
                                 std::int64_t tick)
    : slots_per_state_(slots_per_state),
      slot_duration_s_(slot_duration_s),
      guard_s_(guard_s),
      tick_(tick) {
    if (slots_per_state < 1) {
        throw Error("super-frame needs at least one slot per state");
    }
    if (tick < 0) {
        throw Error("clock tick must be non-negative");
    }
}

FramePosition SuperFrameClock::position() const { return phase_at(*this, tick_); }

double SuperFrameClock::virtual_time_s() const {
    return static_cast<double>(tick_) * (slot_duration_s_ + guard_s_);
}

SuperFrameClock SuperFrameClock::next() const { return at(tick_ + 1); }

SuperFrameClock SuperFrameClock::at(std::int64_t tick) const {
    return SuperFrameClock(slots_per_state_, slot_duration_s_, guard_s_, tick);
}

std::int64_t SuperFrameClock::tick_of(std::int64_t frame, FramePhase phase) const {
    std::int64_t offset = 0;
    switch (phase.state) {
    case StateKind::Sync: offset = 0; break;
    case StateKind::Ddsat: offset = 1 + phase.slot; break;
    case StateKind::Data: offset = 1 + slots_per_state_ + phase.slot; break;
    }
    return frame * frame_length() + offset;
}

FramePosition phase_at(const SuperFrameClock& clock, std::int64_t tick) {
    const int n = clock.slots_per_state();
    const std::int64_t len = clock.frame_length();
    const auto in_frame = static_cast<int>(tick % len);
    FramePosition pos{tick / len, FramePhase::sync()};
    if (in_frame == 0) {
        return pos;
    }
    if (in_frame <= n) {
        pos.phase = FramePhase::ddsat(in_frame - 1);
    } else {
        pos.phase = FramePhase::data(in_frame - 1 - n);
    }
    return pos;
}

std::string to_string(FramePhase phase) {
    switch (phase.state) {
    case StateKind::Sync: return "Sync";
    case StateKind::Ddsat: return fmt::format("Ddsat({})", phase.slot);
    case StateKind::Data: return fmt::format("Data({})", phase.slot);
    }
    return "?";
}

std::string to_string(TrafficClass c) {
    return c == TrafficClass::RealTime ? "realtime" : "normal";
}

std::optional<TrafficClass> traffic_class_from(std::string_view name) {
    if (name == "normal") return TrafficClass::Normal;
    if (name == "realtime" || name == "real_time") return TrafficClass::RealTime;
    return std::nullopt;
}

Rng make_rng(std::uint64_t seed, RngStream stream, std::uint32_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), salt};
    return Rng(seq);
}

}  // namespace ddsat
