#pragma once

// Priority scheduling: who gets which channel and which data slots.
//
// Every secondary node runs allocate() on the same set of decoded DDSAT
// packets, so the result must be a pure function of its inputs.

#include "ddsat/core.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

namespace ddsat::psa {

inline constexpr int kMaxPriorityIndex = 65535;

enum class PdPolicy {
    Accumulate,    // served: pd unchanged; unserved: pd + 1
    ResetOnGrant,  // served: pd = 0; unserved: pd + 1
};

enum class PsaErrorKind { TooFewCandidates, DuplicateNode, CccChannel, InvalidRequest };

class PsaError : public Error {
public:
    PsaError(PsaErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
    PsaErrorKind kind() const { return kind_; }

private:
    PsaErrorKind kind_;
};

struct SlotRequest {
    NodeId node;
    int priority_index = 0;
    int requested_slots = 0;
    PreferredPair preferred;
};

/// Contiguous run of data slots on one channel.
struct Grant {
    ChannelId channel;
    int first_slot = 0;
    int count = 0;

    bool covers(int slot) const { return slot >= first_slot && slot < first_slot + count; }
    bool operator==(const Grant&) const = default;
};

class AllocationTable {
public:
    AllocationTable() = default;
    AllocationTable(const std::set<ChannelId>& channels, int slots_per_channel);

    int slots_per_channel() const { return slots_per_channel_; }
    std::set<ChannelId> channels() const;

    /// Owner of a data cell; nullopt when free or when the channel is not
    /// part of the grid.
    std::optional<NodeId> owner(ChannelId channel, int slot) const;
    int free_slots(ChannelId channel) const;

    const std::map<NodeId, Grant>& grants() const { return grants_; }
    const std::set<NodeId>& unserved() const { return unserved_; }
    std::optional<Grant> grant_for(NodeId node) const;

    bool operator==(const AllocationTable&) const = default;

private:
    friend AllocationTable allocate(std::span<const SlotRequest>, const std::set<ChannelId>&, int);

    bool try_grant(NodeId node, ChannelId channel, int count);

    int slots_per_channel_ = 0;
    std::map<ChannelId, std::vector<std::optional<NodeId>>> grid_;
    std::map<NodeId, Grant> grants_;
    std::set<NodeId> unserved_;
};

/// Exponentially weighted received-power estimate per data channel. A
/// channel never sampled reports an optimistic 0 dBm so it gets explored.
class ChannelEstimates {
public:
    static constexpr double kOptimisticDbm = 0.0;
    static constexpr double kAlpha = 0.25;

    double estimate(ChannelId channel) const;
    int samples(ChannelId channel) const;

    bool operator==(const ChannelEstimates&) const = default;

private:
    friend ChannelEstimates update_channel_estimate(ChannelEstimates, ChannelId, double);

    struct Entry {
        double mean_dbm = kOptimisticDbm;
        int samples = 0;
        bool operator==(const Entry&) const = default;
    };
    std::map<ChannelId, Entry> entries_;
};

/// DT + PD, saturating at the 16-bit wire field.
int priority_index(int dt, int pd);

SlotRequest make_request(NodeId node, int dt, int pd, int requested_slots, PreferredPair preferred);

/// Highest estimate first; ties go to the lower channel index.
PreferredPair preferred_channels(const ChannelEstimates& est, const std::set<ChannelId>& candidates);

ChannelEstimates update_channel_estimate(ChannelEstimates est, ChannelId channel, double measured_dbm);

/// Requests are served in descending priority index, then ascending node
/// id. A request is granted whole on its first preference, else its second,
/// else the lowest-indexed remaining empty channel with room; otherwise the
/// node is unserved for this frame. Zero-slot requests are neither granted
/// nor unserved.
AllocationTable allocate(std::span<const SlotRequest> requests,
                         const std::set<ChannelId>& empty_channels, int slots_per_channel);

int update_pd(int pd, bool served, PdPolicy policy = PdPolicy::Accumulate);

}  // namespace ddsat::psa
