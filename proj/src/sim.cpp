#include "ddsat/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <fmt/format.h>

namespace ddsat::sim {

// ---------------------------------------------------------------- medium

Medium::Medium(double noise_floor_dbm, double shadow_sigma_db, double default_link_dbm)
    : noise_floor_dbm_(noise_floor_dbm),
      shadow_sigma_db_(shadow_sigma_db),
      default_link_dbm_(default_link_dbm) {
    if (!std::isfinite(noise_floor_dbm) || !std::isfinite(shadow_sigma_db) || shadow_sigma_db < 0.0) {
        throw Error("medium needs a finite noise floor and a non-negative shadowing sigma");
    }
}

void Medium::clear_sources() { sources_.clear(); }

void Medium::add_source(ChannelId channel, double mean_dbm) {
    if (!std::isfinite(mean_dbm)) throw Error("source power must be finite");
    sources_[channel].push_back(Source{mean_dbm, {}});
}

void Medium::set_source_power_at(ChannelId channel, NodeId receiver, double mean_dbm) {
    auto it = sources_.find(channel);
    if (it == sources_.end() || it->second.empty()) {
        throw Error(fmt::format("no source on channel {}", channel.index));
    }
    it->second.back().at_receiver[receiver] = mean_dbm;
}

double Medium::mean_power(NodeId receiver, ChannelId channel) const {
    const auto it = sources_.find(channel);
    if (it == sources_.end() || it->second.empty()) return noise_floor_dbm_;
    double loudest = -std::numeric_limits<double>::infinity();
    for (const auto& src : it->second) {
        const auto r = src.at_receiver.find(receiver);
        loudest = std::max(loudest, r == src.at_receiver.end() ? src.mean_dbm : r->second);
    }
    return loudest;
}

double Medium::shadow(Rng& rng) const {
    if (shadow_sigma_db_ == 0.0) return 0.0;
    boost::random::normal_distribution<double> dist(0.0, shadow_sigma_db_);
    return dist(rng);
}

double Medium::sample_power(NodeId receiver, ChannelId channel, Rng& rng) const {
    return mean_power(receiver, channel) + shadow(rng);
}

void Medium::set_link_mean(NodeId node, ChannelId channel, double mean_dbm) {
    link_means_[{node, channel}] = mean_dbm;
}

double Medium::link_mean(NodeId node, ChannelId channel) const {
    const auto it = link_means_.find({node, channel});
    return it == link_means_.end() ? default_link_dbm_ : it->second;
}

double Medium::sample_link_power(NodeId node, ChannelId channel, Rng& rng) const {
    return link_mean(node, channel) + shadow(rng);
}

void Medium::transmit(Transmission tx) { in_flight_[tx.channel].push_back(std::move(tx)); }

std::size_t Medium::in_flight() const {
    std::size_t n = 0;
    for (const auto& [c, txs] : in_flight_) n += txs.size();
    return n;
}

SlotOutcome Medium::resolve_slot(ChannelId channel) {
    SlotOutcome out;
    const auto it = in_flight_.find(channel);
    if (it == in_flight_.end()) return out;
    auto txs = std::move(it->second);
    in_flight_.erase(it);
    for (const auto& tx : txs) out.transmitters.push_back(tx.sender);
    if (txs.size() == 1) {
        out.kind = nodes::SlotResultKind::Delivered;
        out.delivered = std::move(txs.front());
    } else if (txs.size() > 1) {
        out.kind = nodes::SlotResultKind::Collision;
    }
    return out;
}

std::map<ChannelId, SlotOutcome> Medium::resolve_all() {
    std::map<ChannelId, SlotOutcome> out;
    while (!in_flight_.empty()) {
        const auto channel = in_flight_.begin()->first;
        out[channel] = resolve_slot(channel);
    }
    return out;
}

// ---------------------------------------------------------------- engine

class Engine::Chooser : public nodes::SlotChooser {
public:
    Chooser(const SlotScript& script, Rng& rng) : script_(script), random_(rng) {}

    int choose(NodeId node, std::span<const int> free_slots) override {
        if (script_) {
            if (const auto forced = script_(node, free_slots)) return *forced;
        }
        return random_.choose(node, free_slots);
    }

private:
    const SlotScript& script_;
    nodes::RandomSlotChooser random_;
};

Engine::Engine(const ScenarioConfig& scenario, std::uint64_t seed)
    : scenario_((validate(scenario), scenario)),
      sensing_channels_(scenario.sensing_channels()),
      limits_{scenario.slots_per_state, scenario.num_channels},
      detection_{scenario.radio.threshold_dbm},
      clock_(scenario.slots_per_state, scenario.slot_duration_s, scenario.guard_s),
      slot_rng_(make_rng(seed, RngStream::SlotChoice)),
      sensing_rng_(make_rng(seed, RngStream::SensingShadow)),
      link_rng_(make_rng(seed, RngStream::LinkShadow)),
      primary_rng_(make_rng(seed, RngStream::PrimaryActivity)),
      medium_(scenario.radio.noise_floor_dbm, scenario.radio.shadow_sigma_db, scenario.radio.link_power_dbm),
      base_(scenario.slots_per_state, sensing_channels_, scenario.lease_frames) {
    auto specs = scenario_.secondaries;
    std::sort(specs.begin(), specs.end(),
              [](const SecondarySpec& a, const SecondarySpec& b) { return a.id < b.id; });
    for (const auto& spec : specs) {
        nodes::SecondaryConfig cfg;
        cfg.id = spec.id;
        cfg.traffic = spec.traffic;
        cfg.requested_slots = spec.requested_slots;
        cfg.dt_values = scenario_.dt;
        cfg.pd_policy = scenario_.pd_policy;
        cfg.payload_bytes = static_cast<std::size_t>(scenario_.payload_bytes);
        secondaries_.emplace_back(cfg);
        if (spec.link_dbm) {
            for (auto c : sensing_channels_) medium_.set_link_mean(spec.id, c, *spec.link_dbm);
        }
    }
    if (scenario_.primary) {
        const auto& p = *scenario_.primary;
        primary_ = nodes::PrimaryNode{p.channel, p.activity, p.p_on, p.power_dbm};
    }

    log_.seed = seed;
    log_.scenario_hash = scenario_hash(scenario_);
    log_.slots_per_state = scenario_.slots_per_state;
}

void Engine::set_slot_script(SlotScript script) { script_ = std::move(script); }

void Engine::set_frame_observer(std::function<void(const FrameTrace&)> observer) {
    observer_ = std::move(observer);
}

const nodes::SecondaryNode& Engine::secondary(NodeId id) const {
    const auto it = std::find_if(secondaries_.begin(), secondaries_.end(),
                                 [&](const nodes::SecondaryNode& n) { return n.id() == id; });
    if (it == secondaries_.end()) throw Error(fmt::format("no secondary node {}", id.value));
    return *it;
}

nodes::SecondaryNode& Engine::node_by_id(NodeId id) {
    const auto it = std::find_if(secondaries_.begin(), secondaries_.end(),
                                 [&](const nodes::SecondaryNode& n) { return n.id() == id; });
    if (it == secondaries_.end()) throw Error(fmt::format("no secondary node {}", id.value));
    return *it;
}

void Engine::step() {
    const auto pos = clock_.position();
    const int n = clock_.slots_per_state();
    switch (pos.phase.state) {
    case StateKind::Sync:
        on_sync(pos.frame);
        break;
    case StateKind::Ddsat:
        on_ddsat(pos.phase.slot);
        if (pos.phase.slot == n - 1) end_ddsat_state();
        break;
    case StateKind::Data:
        on_data(pos.phase.slot);
        if (pos.phase.slot == n - 1) end_frame();
        break;
    }
    clock_ = clock_.next();
}

void Engine::run_frames(std::int64_t frames) {
    const std::int64_t ticks = frames * clock_.frame_length();
    for (std::int64_t i = 0; i < ticks; ++i) step();
}

void Engine::on_sync(std::int64_t frame) {
    frame_ = FrameTrace{};
    frame_.frame = frame;
    frame_.start_time_s = clock_.virtual_time_s();
    heard_.clear();
    sent_priority_.clear();
    data_sent_.clear();

    medium_.clear_sources();
    if (primary_) {
        frame_.primary_active = primary_->active(frame, primary_rng_);
        if (frame_.primary_active) medium_.add_source(primary_->channel, primary_->power_dbm);
    }

    frame_.beacon = base_.make_beacon();
    frame_.beacon_bytes = wire::encode_beacon(frame_.beacon, limits_);
    medium_.transmit(Transmission{kBaseNode, kCcc, frame_.beacon_bytes});
    auto outcome = medium_.resolve_slot(kCcc);
    const auto beacon = wire::decode_beacon(outcome.delivered->frame, limits_);

    Chooser chooser(script_, slot_rng_);
    for (auto& sn : secondaries_) {
        NodeFrameTrace t;
        t.node = sn.id();
        t.beacon_action = sn.on_beacon(beacon, clock_.slots_per_state(), chooser);
        t.ddsat_slot = sn.ddsat_slot();
        frame_.nodes.push_back(t);
    }
}

void Engine::on_ddsat(int slot) {
    for (auto& sn : secondaries_) {
        if (sn.ddsat_slot() != slot) continue;
        const auto packet = sn.on_own_ddsat_slot(sensing_channels_, medium_, detection_, sensing_rng_);
        sent_priority_[sn.id()] = packet.priority_index;
        medium_.transmit(Transmission{sn.id(), kCcc, wire::encode_ddsat(packet, limits_)});
    }
    auto outcome = medium_.resolve_slot(kCcc);

    DdsatSlotTrace t{slot, outcome.kind, outcome.transmitters, std::nullopt};
    if (outcome.kind == nodes::SlotResultKind::Delivered) {
        const auto packet = wire::decode_ddsat(outcome.delivered->frame, limits_);
        base_.on_ddsat_slot_result(slot, outcome.kind, packet.sender);
        heard_.push_back(packet);
        t.packet = packet;
    } else {
        if (outcome.kind == nodes::SlotResultKind::Collision) ++log_.counters.ddsat_collisions;
        base_.on_ddsat_slot_result(slot, outcome.kind, std::nullopt);
    }
    frame_.ddsat.push_back(std::move(t));
}

void Engine::end_ddsat_state() {
    const nodes::SecondaryNode* reference = nullptr;
    bool consistent = true;
    for (std::size_t i = 0; i < secondaries_.size(); ++i) {
        auto& sn = secondaries_[i];
        auto& t = frame_.nodes[i];
        t.psa = sn.on_ddsat_state_end(heard_, sensing_channels_, clock_.slots_per_state());
        t.own_report = sn.own_report();
        t.fusion = sn.last_fusion();
        t.table = sn.last_table();
        t.grant = sn.grant();
        t.pd = sn.pd();
        if (t.psa == nodes::PsaOutcome::NotParticipating) continue;
        if (!reference) {
            reference = &sn;
        } else if (sn.last_fusion() != reference->last_fusion() ||
                   sn.last_table() != reference->last_table()) {
            consistent = false;
        }
    }
    if (reference) {
        ++log_.counters.consistency_checks;
        if (!consistent) ++log_.counters.consistency_mismatches;
    }
    frame_.consistent = consistent;
}

void Engine::on_data(int slot) {
    std::map<std::pair<ChannelId, NodeId>, const nodes::SecondaryNode*> senders;
    for (auto& sn : secondaries_) {
        const auto packet = sn.on_data_slot(slot);
        if (!packet) continue;
        const auto channel = sn.grant()->channel;
        medium_.transmit(Transmission{sn.id(), channel, wire::encode_data(*packet)});
        senders[{channel, sn.id()}] = &sn;

        auto& c = log_.counters;
        ++c.data_transmissions;
        ++data_sent_[sn.id()];
        if (!sn.last_table() || sn.last_table()->owner(channel, slot) != sn.id()) {
            ++c.out_of_grant_transmissions;
        }
        if (!sn.last_fusion() || !sn.last_fusion()->empty_channels.contains(channel)) {
            ++c.transmissions_on_fused_occupied;
        }
        if (primary_ && primary_->channel == channel) {
            ++c.transmissions_on_primary_channel;
            if (frame_.primary_active) ++c.transmissions_on_active_primary;
        }
    }

    for (auto& [channel, outcome] : medium_.resolve_all()) {
        if (outcome.kind == nodes::SlotResultKind::Collision) ++log_.counters.data_collisions;
        for (auto sender : outcome.transmitters) {
            frame_.data.push_back(DataTxTrace{slot, sender, channel, outcome.kind});
        }
        if (outcome.kind != nodes::SlotResultKind::Delivered) continue;
        const auto sender = outcome.delivered->sender;
        auto& sn = node_by_id(sender);
        sn.record_link_power(channel, medium_.sample_link_power(sender, channel, link_rng_));
    }
}

void Engine::end_frame() {
    std::set<ChannelId> truly_empty(sensing_channels_.begin(), sensing_channels_.end());
    if (primary_ && frame_.primary_active) truly_empty.erase(primary_->channel);

    for (std::size_t i = 0; i < secondaries_.size(); ++i) {
        auto& sn = secondaries_[i];
        const auto& t = frame_.nodes[i];

        metrics::FrameRecord r;
        r.frame = frame_.frame;
        r.node = sn.id();
        if (!t.ddsat_slot) {
            r.status = metrics::NodeStatus::SyncWait;
        } else if (t.psa == nodes::PsaOutcome::Served) {
            r.status = metrics::NodeStatus::Allocated;
        } else if (t.beacon_action == nodes::BeaconAction::Reserved) {
            r.status = metrics::NodeStatus::Joining;
        } else {
            r.status = metrics::NodeStatus::Reserved;
        }
        r.granted_slots = data_sent_.contains(sn.id()) ? data_sent_.at(sn.id()) : 0;
        r.pd = sn.pd();
        r.priority_index = sent_priority_.contains(sn.id()) ? sent_priority_.at(sn.id()) : 0;
        if (t.grant) r.channel = t.grant->channel;
        if (t.fusion) {
            r.fusion_correct = t.fusion->empty_channels == truly_empty;
            r.channels_sensed = static_cast<int>(sensing_channels_.size());
            for (auto c : sensing_channels_) {
                if (t.fusion->empty_channels.contains(c) == truly_empty.contains(c)) ++r.channels_correct;
            }
        }
        log_.append(r);
        sn.on_data_state_end();
    }
    if (observer_) observer_(frame_);
}

metrics::MetricsLog run(const ScenarioConfig& scenario, std::uint64_t seed, std::int64_t frames) {
    Engine engine(scenario, seed);
    engine.run_frames(frames);
    return engine.take_log();
}

// ---------------------------------------------------------------- sensing trials

SensingTrialResult run_sensing_trials(const SensingTrialConfig& cfg, Rng& rng) {
    if (cfg.nodes < 1 || cfg.nodes > kMaxSecondaryId) throw Error("cooperating node count out of range");
    if (cfg.trials < 1) throw Error("need at least one trial");

    const ChannelId channel{2};
    const std::vector<ChannelId> channels{channel};
    const sensing::DetectionConfig detection{cfg.threshold_dbm};
    Medium medium(cfg.noise_floor_dbm, cfg.sigma_db);
    boost::random::bernoulli_distribution<double> primary_on(cfg.p_on);

    std::int64_t fused_correct = 0;
    std::int64_t node_correct = 0;
    std::vector<sensing::SensingReport> reports(static_cast<std::size_t>(cfg.nodes));
    for (std::int64_t trial = 0; trial < cfg.trials; ++trial) {
        const bool on = primary_on(rng);
        medium.clear_sources();
        if (on) medium.add_source(channel, cfg.primary_dbm);
        const auto truth = on ? sensing::Verdict::Occupied : sensing::Verdict::Empty;

        for (int i = 0; i < cfg.nodes; ++i) {
            reports[static_cast<std::size_t>(i)] =
                sensing::sense_all(NodeId(static_cast<std::uint8_t>(i + 1)), channels, medium, detection, rng);
            if (reports[static_cast<std::size_t>(i)].verdicts.at(channel) == truth) ++node_correct;
        }
        const auto fused = sensing::fuse_majority(reports, channels);
        const auto fused_verdict =
            fused.empty_channels.contains(channel) ? sensing::Verdict::Empty : sensing::Verdict::Occupied;
        if (fused_verdict == truth) ++fused_correct;
    }
    const auto trials = static_cast<double>(cfg.trials);
    return SensingTrialResult{static_cast<double>(fused_correct) / trials,
                              static_cast<double>(node_correct) / (trials * cfg.nodes), cfg.trials};
}

double detector_accuracy(double sigma_db, double primary_dbm, double noise_floor_dbm,
                         double threshold_dbm, double p_on) {
    if (sigma_db <= 0.0) {
        const double hit = primary_dbm > threshold_dbm ? 1.0 : 0.0;
        const double reject = noise_floor_dbm > threshold_dbm ? 0.0 : 1.0;
        return p_on * hit + (1.0 - p_on) * reject;
    }
    const boost::math::normal unit;
    const double detect = boost::math::cdf(unit, (primary_dbm - threshold_dbm) / sigma_db);
    const double reject = boost::math::cdf(unit, (threshold_dbm - noise_floor_dbm) / sigma_db);
    return p_on * detect + (1.0 - p_on) * reject;
}

double sigma_for_accuracy(double target, double primary_dbm, double noise_floor_dbm,
                          double threshold_dbm, double p_on) {
    if (!(primary_dbm > threshold_dbm && noise_floor_dbm < threshold_dbm)) {
        throw Error("tuning needs the primary above the threshold and the noise floor below it");
    }
    if (!(target > 0.5 && target < 1.0)) throw Error("target accuracy must lie in (0.5, 1)");
    auto f = [&](double sigma) {
        return detector_accuracy(sigma, primary_dbm, noise_floor_dbm, threshold_dbm, p_on) - target;
    };
    double lo = 1e-6;
    double hi = 1.0;
    while (f(hi) > 0.0) {
        hi *= 2.0;
        if (hi > 1e6) throw Error("cannot reach the target accuracy");
    }
    boost::math::tools::eps_tolerance<double> tol(50);
    const auto [a, b] = boost::math::tools::bisect(f, lo, hi, tol);
    return 0.5 * (a + b);
}

}  // namespace ddsat::sim
