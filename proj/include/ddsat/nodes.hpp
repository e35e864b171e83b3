#pragma once

// Per-role state machines driven by the simulation engine.

#include "ddsat/core.hpp"
#include "ddsat/psa.hpp"
#include "ddsat/sensing.hpp"
#include "ddsat/wire.hpp"

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace ddsat::nodes {

enum class SnState { SyncWait, DdsatReserved, DataAllocated };

std::string_view to_string(SnState s);

/// Picks one of the free DDSAT slots advertised by a beacon.
class SlotChooser {
public:
    virtual ~SlotChooser() = default;
    virtual int choose(NodeId node, std::span<const int> free_slots) = 0;
};

/// Uniform choice from a seeded generator.
class RandomSlotChooser : public SlotChooser {
public:
    explicit RandomSlotChooser(Rng& rng) : rng_(&rng) {}
    int choose(NodeId node, std::span<const int> free_slots) override;

private:
    Rng* rng_;
};

enum class BeaconAction {
    Reserved,    // picked a free slot, unconfirmed until the next beacon
    Confirmed,   // held slot is marked occupied, keep it
    Lost,        // held slot not marked: collision or lease expiry; back to SyncWait
    NoFreeSlot,  // every slot taken; pd incremented
};

enum class PsaOutcome { NotParticipating, Served, Unserved, NoRequest };

struct SecondaryConfig {
    NodeId id;
    TrafficClass traffic = TrafficClass::Normal;
    int requested_slots = 4;
    DtValues dt_values;
    psa::PdPolicy pd_policy = psa::PdPolicy::Accumulate;
    std::size_t payload_bytes = 32;
};

class SecondaryNode {
public:
    explicit SecondaryNode(const SecondaryConfig& cfg);

    NodeId id() const { return cfg_.id; }
    const SecondaryConfig& config() const { return cfg_; }
    SnState state() const { return state_; }
    std::optional<int> ddsat_slot() const { return ddsat_slot_; }
    /// True once a beacon has marked the held DDSAT slot as occupied.
    bool confirmed() const { return confirmed_; }
    int pd() const { return pd_; }
    int dt() const { return cfg_.dt_values.of(cfg_.traffic); }
    int current_priority_index() const { return psa::priority_index(dt(), pd_); }
    const std::optional<psa::Grant>& grant() const { return grant_; }
    const std::optional<sensing::FusionResult>& last_fusion() const { return last_fusion_; }
    const std::optional<psa::AllocationTable>& last_table() const { return last_table_; }
    const std::optional<sensing::SensingReport>& own_report() const { return own_report_; }
    const psa::ChannelEstimates& estimates() const { return estimates_; }

    BeaconAction on_beacon(const wire::BeaconPacket& beacon, int slots_per_state, SlotChooser& chooser);

    /// Sense every listed channel and build this node's DDSAT packet.
    wire::DdsatPacket on_own_ddsat_slot(std::span<const ChannelId> sensing_channels,
                                        const sensing::MediumView& medium,
                                        const sensing::DetectionConfig& detection, Rng& rng);

    /// Fuse the heard reports and run the allocation. `heard` must contain
    /// this node's own packet for it to take part.
    PsaOutcome on_ddsat_state_end(std::span<const wire::DdsatPacket> heard,
                                  std::span<const ChannelId> sensing_channels, int slots_per_state);

    std::optional<wire::DataPacket> on_data_slot(int slot);
    void record_link_power(ChannelId channel, double measured_dbm);
    void on_data_state_end();

private:
    PreferredPair choose_preferred(std::span<const ChannelId> sensing_channels) const;

    SecondaryConfig cfg_;
    SnState state_ = SnState::SyncWait;
    std::optional<int> ddsat_slot_;
    bool confirmed_ = false;
    int pd_ = 0;
    std::uint16_t sequence_ = 0;
    std::optional<psa::Grant> grant_;
    std::optional<sensing::SensingReport> own_report_;
    std::optional<sensing::FusionResult> last_fusion_;
    std::optional<psa::AllocationTable> last_table_;
    psa::ChannelEstimates estimates_;
};

/// Rebuild a sensing report from the empty-channel bitmap of a DDSAT packet.
sensing::SensingReport report_from_packet(const wire::DdsatPacket& packet,
                                          std::span<const ChannelId> sensing_channels);

psa::SlotRequest request_from_packet(const wire::DdsatPacket& packet);

struct Reservation {
    NodeId owner;
    int frames_since_heard = 0;

    bool operator==(const Reservation&) const = default;
};

enum class SlotResultKind { Silence, Delivered, Collision };

class BaseNode {
public:
    static constexpr int kDefaultLeaseFrames = 2;

    BaseNode(int slots_per_state, std::vector<ChannelId> sensing_channels,
             int lease_frames = kDefaultLeaseFrames);

    wire::BeaconPacket make_beacon() const;

    /// `sender` is set only for Delivered.
    void on_ddsat_slot_result(int slot, SlotResultKind result, std::optional<NodeId> sender);

    std::optional<Reservation> reservation(int slot) const;
    const std::vector<ChannelId>& sensing_channels() const { return sensing_channels_; }

private:
    int slots_per_state_;
    int lease_frames_;
    std::vector<ChannelId> sensing_channels_;
    std::map<int, Reservation> reservations_;
};

enum class PrimaryActivity { AlwaysOn, Bernoulli };

struct PrimaryNode {
    ChannelId channel;
    PrimaryActivity activity = PrimaryActivity::AlwaysOn;
    double p_on = 1.0;
    double power_dbm = -50.0;

    /// Drawn once per super-frame.
    bool active(std::int64_t frame_index, Rng& rng) const;
};

}  // namespace ddsat::nodes
