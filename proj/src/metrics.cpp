#include "ddsat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

namespace ddsat::metrics {

namespace {

constexpr std::string_view kFramesHeader =
    "frame,node,granted_slots,pd,priority_index,channel,fusion_correct";

void write_metadata(std::ostream& os, const CsvMetadata& meta) {
    os << fmt::format("# seed={} scenario_hash={:016x}", meta.seed, meta.scenario_hash);
    if (!meta.extra.empty()) os << ' ' << meta.extra;
    os << '\n';
}

template <typename F>
double mean_over(const MetricsLog& log, int warmup, F&& pick) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : log.records) {
        if (r.frame < warmup) continue;
        if (const auto v = pick(r)) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) throw MetricsError(MetricsErrorKind::EmptyLog, "no records after warm-up");
    return sum / static_cast<double>(n);
}

long long parse_int(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw MetricsError(MetricsErrorKind::ParseError,
                           fmt::format("line {}: '{}' is not an integer", line, s));
    }
}

}  // namespace

std::string_view to_string(NodeStatus s) {
    switch (s) {
    case NodeStatus::SyncWait: return "SyncWait";
    case NodeStatus::Joining: return "Joining";
    case NodeStatus::Reserved: return "Reserved";
    case NodeStatus::Allocated: return "Allocated";
    }
    return "?";
}

void MetricsLog::append(const FrameRecord& r) {
    if (!records.empty()) {
        const auto& last = records.back();
        if (std::tie(r.frame, r.node) <= std::tie(last.frame, last.node)) {
            throw Error(fmt::format("record ({}, {}) out of order", r.frame, r.node.value));
        }
    }
    records.push_back(r);
}

std::vector<NodeId> MetricsLog::nodes() const {
    std::vector<NodeId> out;
    for (const auto& r : records) out.push_back(r.node);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::int64_t MetricsLog::frames() const { return records.empty() ? 0 : records.back().frame + 1; }

double throughput(const MetricsLog& log, NodeId node, int warmup) {
    if (log.records.empty()) throw MetricsError(MetricsErrorKind::EmptyLog, "empty log");
    return mean_over(log, warmup, [&](const FrameRecord& r) -> std::optional<double> {
        if (r.node != node) return std::nullopt;
        return r.granted_slots;
    });
}

double jain_index(std::span<const double> values) {
    if (values.empty()) throw MetricsError(MetricsErrorKind::Empty, "Jain index of no values");
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double x : values) {
        if (x < 0.0) throw Error("Jain index needs non-negative values");
        sum += x;
        sum_sq += x * x;
    }
    if (sum_sq == 0.0) throw MetricsError(MetricsErrorKind::AllZero, "Jain index of all-zero values");
    return sum * sum / (static_cast<double>(values.size()) * sum_sq);
}

double sensing_accuracy(const MetricsLog& log, int warmup) {
    if (log.records.empty()) throw MetricsError(MetricsErrorKind::EmptyLog, "empty log");
    return mean_over(log, warmup, [](const FrameRecord& r) -> std::optional<double> {
        if (!r.fusion_correct) return std::nullopt;
        return *r.fusion_correct ? 1.0 : 0.0;
    });
}

double channel_sensing_accuracy(const MetricsLog& log, int warmup) {
    if (log.records.empty()) throw MetricsError(MetricsErrorKind::EmptyLog, "empty log");
    double correct = 0.0;
    double sensed = 0.0;
    for (const auto& r : log.records) {
        if (r.frame < warmup || !r.fusion_correct) continue;
        correct += r.channels_correct;
        sensed += r.channels_sensed;
    }
    if (sensed == 0.0) throw MetricsError(MetricsErrorKind::EmptyLog, "no fused records after warm-up");
    return correct / sensed;
}

std::vector<NodeSummary> summarize(const MetricsLog& log, int warmup) {
    std::vector<NodeSummary> out;
    std::vector<double> values;
    for (auto node : log.nodes()) {
        out.push_back(NodeSummary{node, throughput(log, node, warmup), 0.0});
        values.push_back(out.back().mean_throughput);
    }
    const double sum = std::accumulate(values.begin(), values.end(), 0.0);
    const double sum_sq = std::inner_product(values.begin(), values.end(), values.begin(), 0.0);
    if (sum_sq > 0.0) {
        for (auto& s : out) {
            s.jain_contribution = s.mean_throughput * sum / (static_cast<double>(out.size()) * sum_sq);
        }
    }
    return out;
}

MeanCi mean_ci95(std::span<const double> samples) {
    if (samples.empty()) throw MetricsError(MetricsErrorKind::Empty, "no samples");
    const auto n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    if (samples.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    const boost::math::students_t dist(n - 1.0);
    const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
    return {mean, t * sd / std::sqrt(n)};
}

std::string format_real(double v) { return fmt::format("{:.6g}", v); }

std::string csv_quote(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> csv_split(std::string_view line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else if (c != '\r') {
            fields.back() += c;
        }
    }
    return fields;
}

void write_frames_csv(const MetricsLog& log, std::ostream& os) {
    write_metadata(os, CsvMetadata{log.seed, log.scenario_hash, {}});
    os << kFramesHeader << '\n';
    for (const auto& r : log.records) {
        os << r.frame << ',' << int{r.node.value} << ',' << r.granted_slots << ',' << r.pd << ','
           << r.priority_index << ',';
        if (r.channel) os << int{r.channel->index};
        os << ',';
        if (r.fusion_correct) os << (*r.fusion_correct ? 1 : 0);
        os << '\n';
    }
}

std::vector<FrameRecord> parse_frames_csv(std::istream& is) {
    std::vector<FrameRecord> out;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != kFramesHeader) {
                throw MetricsError(MetricsErrorKind::ParseError, fmt::format("line {}: bad header", line_no));
            }
            header_seen = true;
            continue;
        }
        const auto f = csv_split(line);
        if (f.size() != 7) {
            throw MetricsError(MetricsErrorKind::ParseError,
                               fmt::format("line {}: expected 7 fields, got {}", line_no, f.size()));
        }
        FrameRecord r;
        r.frame = parse_int(f[0], line_no);
        r.node = NodeId(static_cast<std::uint8_t>(parse_int(f[1], line_no)));
        r.granted_slots = static_cast<int>(parse_int(f[2], line_no));
        r.pd = static_cast<int>(parse_int(f[3], line_no));
        r.priority_index = static_cast<int>(parse_int(f[4], line_no));
        if (!f[5].empty()) r.channel = ChannelId(static_cast<std::uint8_t>(parse_int(f[5], line_no)));
        if (!f[6].empty()) r.fusion_correct = parse_int(f[6], line_no) != 0;
        out.push_back(r);
    }
    if (!header_seen) throw MetricsError(MetricsErrorKind::ParseError, "missing header");
    return out;
}

void write_summary_csv(const MetricsLog& log, std::ostream& os, int warmup) {
    write_metadata(os, CsvMetadata{log.seed, log.scenario_hash, fmt::format("warmup={}", warmup)});
    os << "node,mean_throughput,jain_contribution\n";
    if (log.records.empty()) return;
    const auto rows = summarize(log, warmup);
    double total = 0.0;
    double jain = 0.0;
    for (const auto& s : rows) {
        os << int{s.node.value} << ',' << format_real(s.mean_throughput) << ','
           << format_real(s.jain_contribution) << '\n';
        total += s.mean_throughput;
        jain += s.jain_contribution;
    }
    os << "all," << format_real(total) << ',' << format_real(jain) << '\n';
}

void write_sweep_csv(std::span<const SweepRow> rows, const CsvMetadata& meta, std::ostream& os) {
    write_metadata(os, meta);
    os << "param,value,metric,mean,ci95\n";
    for (const auto& r : rows) {
        os << csv_quote(r.param) << ',' << format_real(r.value) << ',' << csv_quote(r.metric) << ','
           << format_real(r.mean) << ',' << format_real(r.ci95) << '\n';
    }
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw MetricsError(MetricsErrorKind::IoError, fmt::format("cannot open {}", path.string()));
    writer(os);
    os.flush();
    if (!os) throw MetricsError(MetricsErrorKind::IoError, fmt::format("write to {} failed", path.string()));
}

}  // namespace ddsat::metrics
