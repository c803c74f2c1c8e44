#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "kinecluster/labeling.hpp"

namespace kinecluster {

// Contingency table between two labelings of the same objects. Rows index the
// distinct labels of X, columns the distinct labels of Y.
struct ContingencyTable {
    int r = 0;
    int s = 0;
    std::vector<std::int64_t> counts;  // r*s, row-major
    std::vector<std::int64_t> row_sums;
    std::vector<std::int64_t> col_sums;
    std::int64_t n = 0;

    std::int64_t at(int i, int j) const { return counts[static_cast<std::size_t>(i) * s + j]; }

    static ContingencyTable from_labels(std::span<const int> x, std::span<const int> y) {
        if (x.size() != y.size())
            throw ValidationError("contingency table: label vectors differ in length");
        std::map<int, int> xid, yid;
        for (int v : x) xid.emplace(v, 0);
        for (int v : y) yid.emplace(v, 0);
        int next = 0;
        for (auto& kv : xid) kv.second = next++;
        next = 0;
        for (auto& kv : yid) kv.second = next++;

        ContingencyTable t;
        t.r = static_cast<int>(xid.size());
        t.s = static_cast<int>(yid.size());
        t.n = static_cast<std::int64_t>(x.size());
        t.counts.assign(static_cast<std::size_t>(t.r) * t.s, 0);
        t.row_sums.assign(t.r, 0);
        t.col_sums.assign(t.s, 0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const int a = xid[x[i]];
            const int b = yid[y[i]];
            ++t.counts[static_cast<std::size_t>(a) * t.s + b];
            ++t.row_sums[a];
            ++t.col_sums[b];
        }
        return t;
    }
};

namespace detail {
inline double comb2(std::int64_t m) { return 0.5 * static_cast<double>(m) * static_cast<double>(m - 1); }
}  // namespace detail

// Chance-corrected pair-counting agreement; range [-0.5, 1].
inline double adjusted_rand_index(const ContingencyTable& t) {
    double sum_nij = 0.0;
    for (std::int64_t c : t.counts) sum_nij += detail::comb2(c);
    double sum_a = 0.0;
    for (std::int64_t a : t.row_sums) sum_a += detail::comb2(a);
    double sum_b = 0.0;
    for (std::int64_t b : t.col_sums) sum_b += detail::comb2(b);
    const double pairs = detail::comb2(t.n);
    if (pairs == 0.0) return 1.0;

    const double expected = sum_a * sum_b / pairs;
    const double maximum = 0.5 * (sum_a + sum_b);
    const double denom = maximum - expected;
    // Degenerate tables (both partitions trivial) agree exactly.
    if (denom == 0.0) return 1.0;
    return (sum_nij - expected) / denom;
}

inline double adjusted_rand_index(std::span<const int> x, std::span<const int> y) {
    return adjusted_rand_index(ContingencyTable::from_labels(x, y));
}

inline double adjusted_rand_index(const Labeling& x, const Labeling& y) {
    if (x.size() != y.size())
        throw ValidationError("adjusted_rand_index: labelings differ in length");
    return adjusted_rand_index(std::span<const int>(x.labels), std::span<const int>(y.labels));
}

}  // namespace kinecluster
