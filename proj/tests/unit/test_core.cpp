#include "ddsat/core.hpp"

#include <doctest.h>

using namespace ddsat;

TEST_CASE("phase_at walks the nine-slot frame") {
    const SuperFrameClock clock(4);
    CHECK(clock.frame_length() == 9);
    CHECK(phase_at(clock, 0) == FramePosition{0, FramePhase::sync()});
    CHECK(phase_at(clock, 1) == FramePosition{0, FramePhase::ddsat(0)});
    CHECK(phase_at(clock, 4) == FramePosition{0, FramePhase::ddsat(3)});
    CHECK(phase_at(clock, 5) == FramePosition{0, FramePhase::data(0)});
    CHECK(phase_at(clock, 8) == FramePosition{0, FramePhase::data(3)});
    CHECK(phase_at(clock, 9) == FramePosition{1, FramePhase::sync()});
}

TEST_CASE("tick_of inverts phase_at for every N") {
    for (int n = 1; n <= kMaxSlotsPerState; ++n) {
        const SuperFrameClock clock(n);
        for (std::int64_t tick = 0; tick < 5 * clock.frame_length(); ++tick) {
            const auto pos = phase_at(clock, tick);
            CHECK(clock.tick_of(pos.frame, pos.phase) == tick);
        }
    }
}

TEST_CASE("each frame holds one sync, N ddsat and N data slots") {
    const SuperFrameClock clock(3);
    int sync = 0, ddsat = 0, data = 0;
    for (std::int64_t t = clock.frame_length(); t < 2 * clock.frame_length(); ++t) {
        const auto pos = phase_at(clock, t);
        CHECK(pos.frame == 1);
        switch (pos.phase.state) {
        case StateKind::Sync: ++sync; break;
        case StateKind::Ddsat: ++ddsat; break;
        case StateKind::Data: ++data; break;
        }
    }
    CHECK(sync == 1);
    CHECK(ddsat == 3);
    CHECK(data == 3);
}

TEST_CASE("clock values advance and carry virtual time") {
    SuperFrameClock clock(4, 1.0, 0.1);
    for (int i = 0; i < 10; ++i) clock = clock.next();
    CHECK(clock.tick() == 10);
    CHECK(clock.position() == FramePosition{1, FramePhase::ddsat(0)});
    CHECK(clock.virtual_time_s() == doctest::Approx(11.0));
    CHECK_THROWS_AS(SuperFrameClock(0), Error);
    CHECK_THROWS_AS(SuperFrameClock(4, 1.0, 0.1, -1), Error);
}

TEST_CASE("phase names") {
    CHECK(to_string(FramePhase::sync()) == "Sync");
    CHECK(to_string(FramePhase::ddsat(2)) == "Ddsat(2)");
    CHECK(to_string(FramePhase::data(0)) == "Data(0)");
}

TEST_CASE("traffic class names round-trip") {
    for (auto c : {TrafficClass::Normal, TrafficClass::RealTime}) CHECK(traffic_class_from(to_string(c)) == c);
    CHECK_FALSE(traffic_class_from("bulk"));
}

TEST_CASE("DT defaults rank real-time above normal") {
    DtValues dt;
    CHECK(dt.of(TrafficClass::Normal) == 1);
    CHECK(dt.of(TrafficClass::RealTime) == 10);
    CHECK(dt.valid());
    CHECK_FALSE(DtValues{5, 5}.valid());
}

TEST_CASE("rng streams are reproducible and independent") {
    auto a = make_rng(42, RngStream::SlotChoice);
    auto b = make_rng(42, RngStream::SlotChoice);
    auto c = make_rng(42, RngStream::SensingShadow);
    auto d = make_rng(42, RngStream::SlotChoice, 1);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
}
