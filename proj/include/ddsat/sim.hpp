#pragma once

// Virtual-time simulation: a shared radio medium plus an engine that steps
// the super-frame clock one slot at a time.
//
// Order of events inside a frame:
//   Sync      beacon from the base node, then every secondary handles it in
//             ascending node id
//   Ddsat(s)  the holder(s) of slot s sense and transmit on the CCC; the
//             base node and all secondaries observe the outcome
//   end of Ddsat state: every secondary fuses and allocates, ascending id
//   Data(s)   granted owners transmit; the monitor checks every transmission
//   end of frame: one metrics record per secondary

#include "ddsat/core.hpp"
#include "ddsat/metrics.hpp"
#include "ddsat/nodes.hpp"
#include "ddsat/psa.hpp"
#include "ddsat/scenario.hpp"
#include "ddsat/sensing.hpp"
#include "ddsat/wire.hpp"

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace ddsat::sim {

struct Transmission {
    NodeId sender;
    ChannelId channel;
    wire::Bytes frame;
};

struct SlotOutcome {
    nodes::SlotResultKind kind = nodes::SlotResultKind::Silence;
    std::optional<Transmission> delivered;
    std::vector<NodeId> transmitters;
};

/// Received-power model: the loudest active source on a channel (or the
/// noise floor) plus zero-mean Gaussian shadowing in dB.
class Medium : public sensing::MediumView {
public:
    Medium(double noise_floor_dbm, double shadow_sigma_db, double default_link_dbm = -55.0);

    double noise_floor_dbm() const { return noise_floor_dbm_; }
    double shadow_sigma_db() const { return shadow_sigma_db_; }

    void clear_sources();
    /// Source heard at `mean_dbm` by every receiver.
    void add_source(ChannelId channel, double mean_dbm);
    /// Per-receiver override for the most recently added source on `channel`.
    void set_source_power_at(ChannelId channel, NodeId receiver, double mean_dbm);
    double mean_power(NodeId receiver, ChannelId channel) const;
    double sample_power(NodeId receiver, ChannelId channel, Rng& rng) const override;

    void set_link_mean(NodeId node, ChannelId channel, double mean_dbm);
    double link_mean(NodeId node, ChannelId channel) const;
    double sample_link_power(NodeId node, ChannelId channel, Rng& rng) const;

    void transmit(Transmission tx);
    std::size_t in_flight() const;
    /// Outcome on one channel; removes that channel's transmissions.
    SlotOutcome resolve_slot(ChannelId channel);
    /// Outcome on every channel that carried anything this slot.
    std::map<ChannelId, SlotOutcome> resolve_all();

private:
    double shadow(Rng& rng) const;

    struct Source {
        double mean_dbm;
        std::map<NodeId, double> at_receiver;
    };

    double noise_floor_dbm_;
    double shadow_sigma_db_;
    double default_link_dbm_;
    std::map<ChannelId, std::vector<Source>> sources_;
    std::map<std::pair<NodeId, ChannelId>, double> link_means_;
    std::map<ChannelId, std::vector<Transmission>> in_flight_;
};

struct DdsatSlotTrace {
    int slot = 0;
    nodes::SlotResultKind result = nodes::SlotResultKind::Silence;
    std::vector<NodeId> transmitters;
    std::optional<wire::DdsatPacket> packet;
};

struct NodeFrameTrace {
    NodeId node;
    nodes::BeaconAction beacon_action = nodes::BeaconAction::Reserved;
    std::optional<int> ddsat_slot;
    nodes::PsaOutcome psa = nodes::PsaOutcome::NotParticipating;
    std::optional<sensing::SensingReport> own_report;
    std::optional<sensing::FusionResult> fusion;
    std::optional<psa::AllocationTable> table;
    std::optional<psa::Grant> grant;
    int pd = 0;
};

struct DataTxTrace {
    int slot = 0;
    NodeId sender;
    ChannelId channel;
    nodes::SlotResultKind result = nodes::SlotResultKind::Delivered;
};

/// Everything observable about one super-frame; fed to the frame observer.
struct FrameTrace {
    std::int64_t frame = 0;
    double start_time_s = 0.0;
    bool primary_active = false;
    wire::BeaconPacket beacon;
    wire::Bytes beacon_bytes;
    std::vector<DdsatSlotTrace> ddsat;
    std::vector<NodeFrameTrace> nodes;
    std::vector<DataTxTrace> data;
    bool consistent = true;
};

/// Scripted DDSAT slot choice: return a slot to force it, nullopt to fall
/// back to the seeded random choice.
using SlotScript = std::function<std::optional<int>(NodeId, std::span<const int> free_slots)>;

class Engine {
public:
    Engine(const ScenarioConfig& scenario, std::uint64_t seed);

    void set_slot_script(SlotScript script);
    void set_frame_observer(std::function<void(const FrameTrace&)> observer);

    /// Advance one slot.
    void step();
    void run_frames(std::int64_t frames);

    const SuperFrameClock& clock() const { return clock_; }
    const metrics::MetricsLog& log() const { return log_; }
    metrics::MetricsLog take_log() { return std::move(log_); }
    const std::vector<nodes::SecondaryNode>& secondaries() const { return secondaries_; }
    const nodes::SecondaryNode& secondary(NodeId id) const;
    const nodes::BaseNode& base() const { return base_; }
    const Medium& medium() const { return medium_; }
    const ScenarioConfig& scenario() const { return scenario_; }

private:
    class Chooser;

    void on_sync(std::int64_t frame);
    void on_ddsat(int slot);
    void end_ddsat_state();
    void on_data(int slot);
    void end_frame();
    nodes::SecondaryNode& node_by_id(NodeId id);

    ScenarioConfig scenario_;
    std::vector<ChannelId> sensing_channels_;
    wire::Limits limits_;
    sensing::DetectionConfig detection_;
    SuperFrameClock clock_;

    Rng slot_rng_;
    Rng sensing_rng_;
    Rng link_rng_;
    Rng primary_rng_;
    SlotScript script_;
    std::function<void(const FrameTrace&)> observer_;

    Medium medium_;
    nodes::BaseNode base_;
    std::vector<nodes::SecondaryNode> secondaries_;
    std::optional<nodes::PrimaryNode> primary_;

    FrameTrace frame_;
    std::vector<wire::DdsatPacket> heard_;
    std::map<NodeId, int> sent_priority_;
    std::map<NodeId, int> data_sent_;
    metrics::MetricsLog log_;
};

/// Run `frames` super-frames from tick 0 and return the log.
metrics::MetricsLog run(const ScenarioConfig& scenario, std::uint64_t seed, std::int64_t frames);

/// Monte-Carlo fused sensing accuracy: one sensed channel whose primary is
/// on with probability `p_on` per trial, `nodes` independent detectors.
struct SensingTrialConfig {
    int nodes = 1;
    double primary_dbm = -55.0;
    double noise_floor_dbm = -65.0;
    double threshold_dbm = -60.0;
    double sigma_db = 0.0;
    double p_on = 0.5;
    std::int64_t trials = 10000;
};

struct SensingTrialResult {
    double fused_accuracy = 0.0;
    double per_node_accuracy = 0.0;
    std::int64_t trials = 0;
};

SensingTrialResult run_sensing_trials(const SensingTrialConfig& cfg, Rng& rng);

/// Single-detector accuracy implied by the Gaussian shadowing model.
double detector_accuracy(double sigma_db, double primary_dbm, double noise_floor_dbm,
                         double threshold_dbm, double p_on = 0.5);

/// Shadowing sigma giving single-detector accuracy `target`.
double sigma_for_accuracy(double target, double primary_dbm, double noise_floor_dbm,
                          double threshold_dbm, double p_on = 0.5);

}  // namespace ddsat::sim
