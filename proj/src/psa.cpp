#include "ddsat/psa.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace ddsat::psa {

AllocationTable::AllocationTable(const std::set<ChannelId>& channels, int slots_per_channel)
    : slots_per_channel_(slots_per_channel) {
    for (auto c : channels) grid_[c].assign(static_cast<std::size_t>(slots_per_channel), std::nullopt);
}

std::set<ChannelId> AllocationTable::channels() const {
    std::set<ChannelId> out;
    for (const auto& [c, cells] : grid_) out.insert(c);
    return out;
}

std::optional<NodeId> AllocationTable::owner(ChannelId channel, int slot) const {
    const auto it = grid_.find(channel);
    if (it == grid_.end() || slot < 0 || slot >= slots_per_channel_) return std::nullopt;
    return it->second[static_cast<std::size_t>(slot)];
}

int AllocationTable::free_slots(ChannelId channel) const {
    const auto it = grid_.find(channel);
    if (it == grid_.end()) return 0;
    return static_cast<int>(std::count(it->second.begin(), it->second.end(), std::nullopt));
}

std::optional<Grant> AllocationTable::grant_for(NodeId node) const {
    const auto it = grants_.find(node);
    if (it == grants_.end()) return std::nullopt;
    return it->second;
}

bool AllocationTable::try_grant(NodeId node, ChannelId channel, int count) {
    const auto it = grid_.find(channel);
    if (it == grid_.end()) return false;
    auto& cells = it->second;
    // Grants are packed from slot 0, so the free cells always form a suffix.
    const auto first_free = std::find(cells.begin(), cells.end(), std::nullopt);
    const auto first = static_cast<int>(first_free - cells.begin());
    if (slots_per_channel_ - first < count) return false;
    for (int s = first; s < first + count; ++s) cells[static_cast<std::size_t>(s)] = node;
    grants_[node] = Grant{channel, first, count};
    return true;
}

double ChannelEstimates::estimate(ChannelId channel) const {
    const auto it = entries_.find(channel);
    return it == entries_.end() ? kOptimisticDbm : it->second.mean_dbm;
}

int ChannelEstimates::samples(ChannelId channel) const {
    const auto it = entries_.find(channel);
    return it == entries_.end() ? 0 : it->second.samples;
}

int priority_index(int dt, int pd) {
    if (dt < 0 || pd < 0) throw PsaError(PsaErrorKind::InvalidRequest, "DT and PD must be non-negative");
    const long long sum = static_cast<long long>(dt) + pd;
    return static_cast<int>(std::min<long long>(sum, kMaxPriorityIndex));
}

SlotRequest make_request(NodeId node, int dt, int pd, int requested_slots, PreferredPair preferred) {
    return SlotRequest{node, priority_index(dt, pd), requested_slots, preferred};
}

PreferredPair preferred_channels(const ChannelEstimates& est, const std::set<ChannelId>& candidates) {
    if (candidates.size() < 2) {
        throw PsaError(PsaErrorKind::TooFewCandidates,
                       fmt::format("need two candidate channels, have {}", candidates.size()));
    }
    std::vector<ChannelId> ranked(candidates.begin(), candidates.end());
    // candidates is already ascending, so a stable sort keeps the index tie-break.
    std::stable_sort(ranked.begin(), ranked.end(), [&](ChannelId a, ChannelId b) {
        return est.estimate(a) > est.estimate(b);
    });
    return PreferredPair{ranked[0], ranked[1]};
}

ChannelEstimates update_channel_estimate(ChannelEstimates est, ChannelId channel, double measured_dbm) {
    if (channel.is_ccc()) {
        throw PsaError(PsaErrorKind::CccChannel, "the CCC carries no channel estimate");
    }
    auto& entry = est.entries_[channel];
    if (entry.samples == 0) {
        entry.mean_dbm = measured_dbm;
    } else {
        entry.mean_dbm = (1.0 - ChannelEstimates::kAlpha) * entry.mean_dbm +
                         ChannelEstimates::kAlpha * measured_dbm;
    }
    ++entry.samples;
    return est;
}

AllocationTable allocate(std::span<const SlotRequest> requests,
                         const std::set<ChannelId>& empty_channels, int slots_per_channel) {
    if (empty_channels.contains(kCcc)) {
        throw PsaError(PsaErrorKind::CccChannel, "the CCC is never allocated");
    }
    std::vector<const SlotRequest*> order;
    std::set<NodeId> seen;
    for (const auto& r : requests) {
        if (!seen.insert(r.node).second) {
            throw PsaError(PsaErrorKind::DuplicateNode,
                           fmt::format("node {} requested twice", r.node.value));
        }
        if (r.requested_slots < 0 || r.requested_slots > slots_per_channel) {
            throw PsaError(PsaErrorKind::InvalidRequest,
                           fmt::format("node {} requested {} slots", r.node.value, r.requested_slots));
        }
        order.push_back(&r);
    }
    std::sort(order.begin(), order.end(), [](const SlotRequest* a, const SlotRequest* b) {
        if (a->priority_index != b->priority_index) return a->priority_index > b->priority_index;
        return a->node < b->node;
    });

    AllocationTable table(empty_channels, slots_per_channel);
    for (const auto* r : order) {
        if (r->requested_slots == 0) continue;

        std::vector<ChannelId> tried;
        auto attempt = [&](ChannelId c) {
            if (!empty_channels.contains(c)) return false;
            if (std::find(tried.begin(), tried.end(), c) != tried.end()) return false;
            tried.push_back(c);
            return table.try_grant(r->node, c, r->requested_slots);
        };

        bool granted = attempt(r->preferred.first);
        if (!granted && r->preferred.second) granted = attempt(*r->preferred.second);
        for (auto it = empty_channels.begin(); !granted && it != empty_channels.end(); ++it) {
            granted = attempt(*it);
        }
        if (!granted) table.unserved_.insert(r->node);
    }
    return table;
}

int update_pd(int pd, bool served, PdPolicy policy) {
    if (!served) return std::min(pd + 1, kMaxPriorityIndex);
    return policy == PdPolicy::ResetOnGrant ? 0 : pd;
}

}  // namespace ddsat::psa
