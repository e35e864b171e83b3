#pragma once

// Reference implementations used only by tests. They are deliberately
// written differently from the library code they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace oracle {

/// Bit-by-bit CRC-16/CCITT-FALSE.
inline std::uint16_t crc16(const std::vector<std::uint8_t>& bytes) {
    std::uint16_t crc = 0xFFFF;
    for (std::uint8_t b : bytes) {
        for (int bit = 7; bit >= 0; --bit) {
            const bool in = ((b >> bit) & 1u) != 0;
            const bool top = (crc & 0x8000u) != 0;
            crc = static_cast<std::uint16_t>(crc << 1);
            if (in != top) crc ^= 0x1021;
        }
    }
    return crc;
}

inline double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// P(strict majority of m independent detectors with accuracy q is right);
/// an even split counts against.
inline double majority_accuracy(int m, double q) {
    double p = 0.0;
    for (int k = m / 2 + 1; k <= m; ++k) p += binom(m, k) * std::pow(q, k) * std::pow(1.0 - q, m - k);
    return p;
}

/// P(N(mean, sigma) > x)
inline double gaussian_tail(double mean, double sigma, double x) {
    return 0.5 * std::erfc((x - mean) / (sigma * std::sqrt(2.0)));
}

inline double jain(const std::vector<double>& x) {
    double s = 0.0, s2 = 0.0;
    for (double v : x) {
        s += v;
        s2 += v * v;
    }
    return s * s / (static_cast<double>(x.size()) * s2);
}

struct Req {
    int node;
    int pi;
    int slots;
    int first;
    int second;  // 0: none
};

struct Cell {
    int channel;
    int slot;
    auto operator<=>(const Cell&) const = default;
};

struct Alloc {
    std::map<Cell, int> owner;
    std::set<int> unserved;
};

/// Straight reading of the allocation rules over a cell grid, without any
/// shared code: sort, then try first, second, and the rest in order.
inline Alloc allocate(std::vector<Req> reqs, const std::set<int>& empty, int n) {
    std::sort(reqs.begin(), reqs.end(),
              [](const Req& a, const Req& b) { return a.pi != b.pi ? a.pi > b.pi : a.node < b.node; });
    Alloc out;
    std::map<int, int> used;
    for (const auto& r : reqs) {
        if (r.slots == 0) continue;
        std::vector<int> order;
        if (empty.count(r.first)) order.push_back(r.first);
        if (r.second && empty.count(r.second)) order.push_back(r.second);
        for (int c : empty) {
            if (std::find(order.begin(), order.end(), c) == order.end()) order.push_back(c);
        }
        bool done = false;
        for (int c : order) {
            if (n - used[c] >= r.slots) {
                for (int s = used[c]; s < used[c] + r.slots; ++s) out.owner[{c, s}] = r.node;
                used[c] += r.slots;
                done = true;
                break;
            }
        }
        if (!done) out.unserved.insert(r.node);
    }
    return out;
}

}  // namespace oracle
