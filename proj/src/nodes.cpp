#include "ddsat/nodes.hpp"

#include <algorithm>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <fmt/format.h>

namespace ddsat::nodes {

std::string_view to_string(SnState s) {
    switch (s) {
    case SnState::SyncWait: return "SyncWait";
    case SnState::DdsatReserved: return "DdsatReserved";
    case SnState::DataAllocated: return "DataAllocated";
    }
    return "?";
}

int RandomSlotChooser::choose(NodeId, std::span<const int> free_slots) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, free_slots.size() - 1);
    return free_slots[pick(*rng_)];
}

SecondaryNode::SecondaryNode(const SecondaryConfig& cfg) : cfg_(cfg) {
    if (cfg.id.is_base() || cfg.id.value > kMaxSecondaryId) {
        throw Error(fmt::format("{} is not a secondary node id", cfg.id.value));
    }
    if (cfg.requested_slots < 0) throw Error("requested slots must be non-negative");
}

BeaconAction SecondaryNode::on_beacon(const wire::BeaconPacket& beacon, int slots_per_state,
                                      SlotChooser& chooser) {
    if (ddsat_slot_) {
        if (beacon.occupied_ddsat_slots & (1u << *ddsat_slot_)) {
            confirmed_ = true;
            return BeaconAction::Confirmed;
        }
        // Wait for the next beacon before drawing again.
        state_ = SnState::SyncWait;
        ddsat_slot_.reset();
        confirmed_ = false;
        grant_.reset();
        return BeaconAction::Lost;
    }

    std::vector<int> free;
    for (int s = 0; s < slots_per_state; ++s) {
        if (!(beacon.occupied_ddsat_slots & (1u << s))) free.push_back(s);
    }
    if (free.empty()) {
        pd_ = psa::update_pd(pd_, false, cfg_.pd_policy);
        return BeaconAction::NoFreeSlot;
    }
    const int slot = chooser.choose(cfg_.id, free);
    if (std::find(free.begin(), free.end(), slot) == free.end()) {
        throw Error(fmt::format("slot chooser picked slot {} which is not free", slot));
    }
    ddsat_slot_ = slot;
    confirmed_ = false;
    state_ = SnState::DdsatReserved;
    return BeaconAction::Reserved;
}

PreferredPair SecondaryNode::choose_preferred(std::span<const ChannelId> sensing_channels) const {
    // Rank among the channels this node itself found empty; fall back to the
    // full sensing list when fewer than two are empty.
    std::set<ChannelId> candidates = own_report_ ? own_report_->empty_channels() : std::set<ChannelId>{};
    if (candidates.size() == 1) {
        return PreferredPair{*candidates.begin(), std::nullopt};
    }
    if (candidates.empty()) candidates.insert(sensing_channels.begin(), sensing_channels.end());
    if (candidates.size() == 1) return PreferredPair{*candidates.begin(), std::nullopt};
    return psa::preferred_channels(estimates_, candidates);
}

wire::DdsatPacket SecondaryNode::on_own_ddsat_slot(std::span<const ChannelId> sensing_channels,
                                                   const sensing::MediumView& medium,
                                                   const sensing::DetectionConfig& detection,
                                                   Rng& rng) {
    if (!ddsat_slot_) throw Error("node has no DDSAT slot to transmit in");
    own_report_ = sensing::sense_all(cfg_.id, sensing_channels, medium, detection, rng);

    wire::DdsatPacket p;
    p.sender = cfg_.id;
    p.empty_channels = wire::channel_mask(own_report_->empty_channels());
    // An unconfirmed slot only claims the reservation; data is requested once
    // the beacon has confirmed it.
    p.requested_slots = static_cast<std::uint8_t>(confirmed_ ? cfg_.requested_slots : 0);
    p.priority_index = static_cast<std::uint16_t>(current_priority_index());
    p.occupied_ddsat_slots = static_cast<std::uint8_t>(1u << *ddsat_slot_);
    p.preferred = choose_preferred(sensing_channels);
    return p;
}

sensing::SensingReport report_from_packet(const wire::DdsatPacket& packet,
                                          std::span<const ChannelId> sensing_channels) {
    sensing::SensingReport report{packet.sender, {}};
    for (auto c : sensing_channels) {
        const bool empty = packet.empty_channels & (1u << (c.index - 1));
        report.verdicts[c] = empty ? sensing::Verdict::Empty : sensing::Verdict::Occupied;
    }
    return report;
}

psa::SlotRequest request_from_packet(const wire::DdsatPacket& packet) {
    return psa::SlotRequest{packet.sender, packet.priority_index, packet.requested_slots,
                            packet.preferred};
}

PsaOutcome SecondaryNode::on_ddsat_state_end(std::span<const wire::DdsatPacket> heard,
                                             std::span<const ChannelId> sensing_channels,
                                             int slots_per_state) {
    grant_.reset();
    last_fusion_.reset();
    last_table_.reset();
    const bool heard_self = std::any_of(heard.begin(), heard.end(), [&](const wire::DdsatPacket& p) {
        return p.sender == cfg_.id;
    });
    if (!ddsat_slot_ || !heard_self) return PsaOutcome::NotParticipating;

    std::vector<sensing::SensingReport> reports;
    std::vector<psa::SlotRequest> requests;
    for (const auto& p : heard) {
        reports.push_back(report_from_packet(p, sensing_channels));
        requests.push_back(request_from_packet(p));
    }
    last_fusion_ = sensing::fuse_majority(reports, sensing_channels);
    last_table_ = psa::allocate(requests, last_fusion_->empty_channels, slots_per_state);

    const auto& me = *std::find_if(requests.begin(), requests.end(),
                                   [&](const psa::SlotRequest& r) { return r.node == cfg_.id; });
    if (me.requested_slots == 0) return PsaOutcome::NoRequest;
    if (last_table_->unserved().contains(cfg_.id)) {
        // Out of the data state for this frame; the DDSAT slot is kept.
        pd_ = psa::update_pd(pd_, false, cfg_.pd_policy);
        return PsaOutcome::Unserved;
    }
    grant_ = last_table_->grant_for(cfg_.id);
    pd_ = psa::update_pd(pd_, true, cfg_.pd_policy);
    state_ = SnState::DataAllocated;
    return PsaOutcome::Served;
}

std::optional<wire::DataPacket> SecondaryNode::on_data_slot(int slot) {
    if (state_ != SnState::DataAllocated || !grant_ || !grant_->covers(slot)) return std::nullopt;
    wire::DataPacket p;
    p.sender = cfg_.id;
    p.sequence = sequence_++;
    p.payload.resize(cfg_.payload_bytes);
    for (std::size_t i = 0; i < p.payload.size(); ++i) {
        p.payload[i] = static_cast<std::uint8_t>((p.sequence + i) & 0xFF);
    }
    return p;
}

void SecondaryNode::record_link_power(ChannelId channel, double measured_dbm) {
    estimates_ = psa::update_channel_estimate(std::move(estimates_), channel, measured_dbm);
}

void SecondaryNode::on_data_state_end() {
    if (state_ == SnState::DataAllocated) state_ = SnState::DdsatReserved;
    grant_.reset();
}

BaseNode::BaseNode(int slots_per_state, std::vector<ChannelId> sensing_channels, int lease_frames)
    : slots_per_state_(slots_per_state),
      lease_frames_(lease_frames),
      sensing_channels_(std::move(sensing_channels)) {
    if (lease_frames < 1) throw Error("reservation lease must be at least one frame");
}

wire::BeaconPacket BaseNode::make_beacon() const {
    wire::BeaconPacket beacon;
    for (const auto& [slot, r] : reservations_) {
        beacon.occupied_ddsat_slots = static_cast<std::uint8_t>(beacon.occupied_ddsat_slots | (1u << slot));
    }
    beacon.sensing_channels = sensing_channels_;
    return beacon;
}

void BaseNode::on_ddsat_slot_result(int slot, SlotResultKind result, std::optional<NodeId> sender) {
    if (slot < 0 || slot >= slots_per_state_) throw Error(fmt::format("DDSAT slot {} out of range", slot));
    if (result == SlotResultKind::Delivered) {
        if (!sender) throw Error("delivered slot result without a sender");
        reservations_[slot] = Reservation{*sender, 0};
        return;
    }
    const auto it = reservations_.find(slot);
    if (it == reservations_.end()) return;
    if (++it->second.frames_since_heard >= lease_frames_) reservations_.erase(it);
}

std::optional<Reservation> BaseNode::reservation(int slot) const {
    const auto it = reservations_.find(slot);
    if (it == reservations_.end()) return std::nullopt;
    return it->second;
}

bool PrimaryNode::active(std::int64_t, Rng& rng) const {
    if (activity == PrimaryActivity::AlwaysOn) return true;
    boost::random::bernoulli_distribution<double> on(p_on);
    return on(rng);
}

}  // namespace ddsat::nodes
