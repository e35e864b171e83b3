#pragma once

#include "ddsat/core.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ddsat::metrics {

enum class MetricsErrorKind { EmptyLog, Empty, AllZero, IoError, ParseError };

class MetricsError : public Error {
public:
    MetricsError(MetricsErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
    MetricsErrorKind kind() const { return kind_; }

private:
    MetricsErrorKind kind_;
};

/// What a secondary node was doing in a frame, as seen after the DDSAT state.
enum class NodeStatus { SyncWait, Joining, Reserved, Allocated };

std::string_view to_string(NodeStatus s);

struct FrameRecord {
    std::int64_t frame = 0;
    NodeId node;
    NodeStatus status = NodeStatus::SyncWait;
    int granted_slots = 0;
    int pd = 0;
    int priority_index = 0;
    std::optional<ChannelId> channel;
    /// Set only when the node fused this frame: the fused empty set exactly
    /// matched the truly idle sensed channels.
    std::optional<bool> fusion_correct;
    int channels_correct = 0;
    int channels_sensed = 0;

    bool operator==(const FrameRecord&) const = default;
};

/// Whole-run counters filled in by the engine's transmission monitor.
struct RunCounters {
    std::int64_t data_transmissions = 0;
    std::int64_t out_of_grant_transmissions = 0;
    std::int64_t transmissions_on_fused_occupied = 0;
    std::int64_t transmissions_on_primary_channel = 0;
    std::int64_t transmissions_on_active_primary = 0;
    std::int64_t data_collisions = 0;
    std::int64_t ddsat_collisions = 0;
    std::int64_t consistency_checks = 0;
    std::int64_t consistency_mismatches = 0;

    bool operator==(const RunCounters&) const = default;
};

struct MetricsLog {
    std::uint64_t seed = 0;
    std::uint64_t scenario_hash = 0;
    int slots_per_state = 4;
    std::vector<FrameRecord> records;
    RunCounters counters;

    /// Records must arrive ordered by (frame, node).
    void append(const FrameRecord& r);
    std::vector<NodeId> nodes() const;
    std::int64_t frames() const;

    bool operator==(const MetricsLog&) const = default;
};

inline constexpr int kDefaultWarmupFrames = 10;

/// Mean granted data slots per frame for `node`, ignoring frames before
/// `warmup`.
double throughput(const MetricsLog& log, NodeId node, int warmup = kDefaultWarmupFrames);

/// (sum x)^2 / (n * sum x^2)
double jain_index(std::span<const double> values);

/// Fraction of fused (frame, node) records whose fusion matched the truth.
double sensing_accuracy(const MetricsLog& log, int warmup = 0);

/// Same, but counted per sensed channel rather than per whole set.
double channel_sensing_accuracy(const MetricsLog& log, int warmup = 0);

struct NodeSummary {
    NodeId node;
    double mean_throughput = 0.0;
    /// x_i * sum(x) / (n * sum(x^2)); these add up to the Jain index.
    double jain_contribution = 0.0;
};

std::vector<NodeSummary> summarize(const MetricsLog& log, int warmup = kDefaultWarmupFrames);

struct MeanCi {
    double mean = 0.0;
    double ci95 = 0.0;  // half-width, Student t
};

MeanCi mean_ci95(std::span<const double> samples);

struct SweepRow {
    std::string param;
    double value = 0.0;
    std::string metric;
    double mean = 0.0;
    double ci95 = 0.0;
};

/// Run metadata written as a leading "# ..." comment line in every CSV.
struct CsvMetadata {
    std::uint64_t seed = 0;
    std::uint64_t scenario_hash = 0;
    std::string extra;
};

std::string format_real(double v);
std::string csv_quote(std::string_view field);
/// RFC-4180 field splitting of one line (no embedded newlines).
std::vector<std::string> csv_split(std::string_view line);

void write_frames_csv(const MetricsLog& log, std::ostream& os);
std::vector<FrameRecord> parse_frames_csv(std::istream& is);

void write_summary_csv(const MetricsLog& log, std::ostream& os, int warmup = kDefaultWarmupFrames);
void write_sweep_csv(std::span<const SweepRow> rows, const CsvMetadata& meta, std::ostream& os);

/// Opens `path`, hands the stream to `writer`, and turns failures into
/// MetricsError(IoError).
void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

}  // namespace ddsat::metrics
