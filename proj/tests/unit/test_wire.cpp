#include "ddsat/wire.hpp"

#include "../oracles.hpp"
#include "../random_packets.hpp"

#include <doctest.h>

#include <string>

using namespace ddsat;
using namespace ddsat::wire;

namespace {

Bytes with_crc(Bytes body) {
    const auto crc = oracle::crc16(body);
    body.push_back(static_cast<std::uint8_t>(crc >> 8));
    body.push_back(static_cast<std::uint8_t>(crc & 0xFF));
    return body;
}

WireErrorKind ddsat_error(const Bytes& b, const Limits& l = {}) {
    try {
        decode_ddsat(b, l);
    } catch (const WireError& e) {
        return e.kind();
    }
    FAIL("decode accepted the packet");
    return WireErrorKind::BadCrc;
}

WireErrorKind beacon_error(const Bytes& b, const Limits& l = {}) {
    try {
        decode_beacon(b, l);
    } catch (const WireError& e) {
        return e.kind();
    }
    FAIL("decode accepted the packet");
    return WireErrorKind::BadCrc;
}

}  // namespace

TEST_CASE("crc16 check values") {
    const std::string check = "123456789";
    const Bytes b(check.begin(), check.end());
    CHECK(crc16(b) == 0x29B1);
    CHECK(oracle::crc16(b) == 0x29B1);
    CHECK(crc16(Bytes{}) == 0xFFFF);
}

TEST_CASE("crc16 agrees with the bitwise reference") {
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        Bytes b(rng() % 64);
        for (auto& x : b) x = static_cast<std::uint8_t>(rng());
        CHECK(crc16(b) == oracle::crc16(b));
    }
}

TEST_CASE("beacon layouts") {
    CHECK(to_hex(encode_beacon({0x05, {ChannelId(2), ChannelId(3), ChannelId(4)}})) == "010503020304888c");
    CHECK(to_hex(encode_beacon({0x00, {}})) == "010000fbac");
    CHECK(to_hex(encode_beacon({0x0F, {ChannelId(2)}})) == "010f0102cd36");
    CHECK(encode_beacon({0x05, {ChannelId(2), ChannelId(3), ChannelId(4)}}) ==
          with_crc({0x01, 0x05, 0x03, 0x02, 0x03, 0x04}));
}

TEST_CASE("ddsat layout") {
    const DdsatPacket p{NodeId(3), 0x06, 4, 11, 0x02, {ChannelId(2), ChannelId(3)}};
    CHECK(to_hex(encode_ddsat(p)) == "02030604000b0223e06f");
    CHECK(encode_ddsat(p).size() == kDdsatPacketSize);
    CHECK(decode_ddsat(from_hex("02030604000B0223E06F")) == p);
}

TEST_CASE("ddsat with no second preference uses a zero nibble") {
    const DdsatPacket p{NodeId(7), 0x02, 1, 13, 0x01, {ChannelId(2), std::nullopt}};
    const Limits two{4, 2};
    const auto bytes = encode_ddsat(p, two);
    CHECK(bytes[7] == 0x20);
    CHECK(decode_ddsat(bytes, two) == p);
}

TEST_CASE("data layout") {
    const DataPacket p{NodeId(2), 0x0102, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
    CHECK(to_hex(encode_data(p)) == "030201020a0001020304050607080939e8");
    CHECK(decode_data(encode_data(p)) == p);
    CHECK(to_hex(encode_data({NodeId(1), 0, {}})) == "0301000000896a");
}

TEST_CASE("decode rejects corrupt or foreign input") {
    auto b = encode_beacon({0x05, {ChannelId(2), ChannelId(3), ChannelId(4)}});
    auto flipped = b;
    flipped.back() ^= 0x01;
    CHECK(beacon_error(flipped) == WireErrorKind::BadCrc);

    auto foreign = b;
    foreign[0] = 0x02;
    CHECK(beacon_error(foreign) == WireErrorKind::BadType);

    CHECK(beacon_error(Bytes{}) == WireErrorKind::Truncated);
    CHECK(beacon_error({0x01, 0x00}) == WireErrorKind::Truncated);
    b.pop_back();
    CHECK(beacon_error(b) == WireErrorKind::Truncated);

    auto longer = encode_beacon({0x00, {}});
    longer.push_back(0);
    CHECK(beacon_error(longer) == WireErrorKind::BadLength);

    CHECK_THROWS_AS(decode_data(Bytes{0x03, 0x01}), WireError);
}

TEST_CASE("ddsat invariants are enforced on both sides") {
    const DdsatPacket ok{NodeId(3), 0x06, 4, 11, 0x02, {ChannelId(2), ChannelId(3)}};

    auto too_many = ok;
    too_many.requested_slots = 5;
    CHECK_THROWS_AS(encode_ddsat(too_many), WireError);
    CHECK(ddsat_error(with_crc({0x02, 0x03, 0x06, 0x05, 0x00, 0x0B, 0x02, 0x23})) ==
          WireErrorKind::InvariantViolation);

    // equal nibbles, CCC nibble, CCC bit in the empty map, slot bit >= N
    for (const Bytes& body : {Bytes{0x02, 0x03, 0x06, 0x04, 0x00, 0x0B, 0x02, 0x22},
                              Bytes{0x02, 0x03, 0x06, 0x04, 0x00, 0x0B, 0x02, 0x12},
                              Bytes{0x02, 0x03, 0x07, 0x04, 0x00, 0x0B, 0x02, 0x23},
                              Bytes{0x02, 0x03, 0x06, 0x04, 0x00, 0x0B, 0x10, 0x23},
                              Bytes{0x02, 0x03, 0x16, 0x04, 0x00, 0x0B, 0x02, 0x23},
                              Bytes{0x02, 0x00, 0x06, 0x04, 0x00, 0x0B, 0x02, 0x23},
                              Bytes{0x02, 0xFF, 0x06, 0x04, 0x00, 0x0B, 0x02, 0x23},
                              Bytes{0x02, 0x03, 0x06, 0x04, 0x00, 0x0B, 0x02, 0x03}}) {
        CAPTURE(to_hex(body));
        CHECK(ddsat_error(with_crc(body)) == WireErrorKind::InvariantViolation);
    }

    auto bad_pref = ok;
    bad_pref.preferred = {ChannelId(3), ChannelId(3)};
    CHECK_THROWS_AS(encode_ddsat(bad_pref), WireError);
    bad_pref.preferred = {kCcc, ChannelId(3)};
    CHECK_THROWS_AS(encode_ddsat(bad_pref), WireError);
}

TEST_CASE("beacon invariants") {
    CHECK_THROWS_AS(encode_beacon({0x00, {kCcc}}), WireError);
    CHECK_THROWS_AS(encode_beacon({0x00, {ChannelId(2), ChannelId(2)}}), WireError);
    CHECK_THROWS_AS(encode_beacon({0x10, {}}), WireError);
    CHECK_THROWS_AS(encode_beacon({0x00, {ChannelId(5)}}), WireError);
    CHECK(beacon_error(with_crc({0x01, 0x00, 0x01, 0x01})) == WireErrorKind::InvariantViolation);
}

TEST_CASE("random valid packets round-trip") {
    Rng rng(99);
    for (int i = 0; i < 1000; ++i) {
        const Limits lim = testgen::random_limits(rng);
        const auto b = testgen::random_beacon(rng, lim);
        CHECK(decode_beacon(encode_beacon(b, lim), lim) == b);
        const auto d = testgen::random_ddsat(rng, lim);
        CHECK(decode_ddsat(encode_ddsat(d, lim), lim) == d);
        const auto p = testgen::random_data(rng);
        CHECK(decode_data(encode_data(p)) == p);
    }
}

TEST_CASE("every single-bit flip of a ddsat packet is rejected") {
    const auto good = encode_ddsat({NodeId(3), 0x06, 4, 11, 0x02, {ChannelId(2), ChannelId(3)}});
    for (std::size_t bit = 0; bit < good.size() * 8; ++bit) {
        auto b = good;
        b[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        CHECK_THROWS_AS(decode_ddsat(b), WireError);
    }
}

TEST_CASE("bitmap helpers") {
    CHECK(channel_mask({ChannelId(2), ChannelId(3)}) == 0x06);
    CHECK(channels_in(0x0E) == std::set<ChannelId>{ChannelId(2), ChannelId(3), ChannelId(4)});
    CHECK(slot_mask({0, 2}) == 0x05);
    CHECK(slots_in(0x0F) == std::set<int>{0, 1, 2, 3});
    for (int m = 0; m < 256; ++m) CHECK(slot_mask(slots_in(static_cast<std::uint8_t>(m))) == m);
}

TEST_CASE("hex helpers") {
    CHECK(from_hex("01 0A ff") == Bytes{0x01, 0x0A, 0xFF});
    CHECK(to_hex(Bytes{0x01, 0x0A, 0xFF}) == "010aff");
    CHECK_THROWS_AS(from_hex("0"), Error);
    CHECK_THROWS_AS(from_hex("zz"), Error);
    CHECK(packet_type(Bytes{0x02}) == 0x02);
    CHECK_FALSE(packet_type(Bytes{}));
}
