#pragma once

#include <array>
#include <limits>
#include <vector>

#include "kinecluster/labeling.hpp"

namespace kinecluster {

enum class Connectivity { four = 4, eight = 8 };

// Positional segmentation: two nodes share an output label iff they have the
// same input label and are connected through same-label neighbors. Output
// labels are densely renumbered in first-encounter scan order (row-major).
inline Labeling connected_components(const Labeling& in, Connectivity conn = Connectivity::four) {
    if (!in.grid.valid()) throw ValidationError("connected_components: labeling has no grid shape");
    in.check_consistent();
    const int rows = in.grid.rows, cols = in.grid.cols;
    const int n = rows * cols;

    Labeling out;
    out.grid = in.grid;
    out.method = in.method.empty() ? "ccl" : in.method + "+ccl";
    out.labels.assign(n, -2);

    const std::array<std::pair<int, int>, 8> offsets{{{0, 1}, {1, 0}, {0, -1}, {-1, 0},
                                                      {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
    const int n_offsets = (conn == Connectivity::four) ? 4 : 8;

    int next = 0;
    std::vector<int> stack;
    for (int start = 0; start < n; ++start) {
        if (out.labels[start] != -2) continue;
        const int value = in.labels[start];
        const int comp = next++;
        stack.assign(1, start);
        out.labels[start] = comp;
        while (!stack.empty()) {
            const int node = stack.back();
            stack.pop_back();
            const int r = node / cols, c = node % cols;
            for (int o = 0; o < n_offsets; ++o) {
                const int rr = r + offsets[o].first, cc = c + offsets[o].second;
                if (rr < 0 || cc < 0 || rr >= rows || cc >= cols) continue;
                const int nb = rr * cols + cc;
                if (out.labels[nb] == -2 && in.labels[nb] == value) {
                    out.labels[nb] = comp;
                    stack.push_back(nb);
                }
            }
        }
    }
    out.num_clusters = next;
    return out;
}

// Absorbs clusters below min_size: each node of a removed cluster adopts the
// label of the nearest node (Euclidean distance in grid coordinates) that
// belongs to a surviving cluster; distance ties break toward the smaller
// label id. Surviving labels are densely renumbered in scan order when any
// cluster was removed, otherwise the input is returned unchanged.
inline Labeling enforce_min_size(const Labeling& segmented, int min_size = 5) {
    if (!segmented.grid.valid()) throw ValidationError("enforce_min_size: labeling has no grid shape");
    segmented.check_consistent();
    if (min_size <= 1) return segmented;

    const auto sizes = cluster_sizes(segmented);
    bool any_removed = false, any_kept = false;
    std::vector<char> survives(sizes.size(), 0);
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        survives[c] = sizes[c] >= min_size;
        (survives[c] ? any_kept : any_removed) = true;
    }
    if (!any_kept) throw ClusteringError("enforce_min_size: no cluster reaches the minimum size");
    if (!any_removed) return segmented;

    const int rows = segmented.grid.rows, cols = segmented.grid.cols;
    const int n = rows * cols;
    std::vector<int> keepers;
    keepers.reserve(n);
    for (int i = 0; i < n; ++i)
        if (survives[segmented.labels[i]]) keepers.push_back(i);

    Labeling out = segmented;
    out.method = segmented.method + "+minsize";
    for (int i = 0; i < n; ++i) {
        if (survives[segmented.labels[i]]) continue;
        const int r = i / cols, c = i % cols;
        long best_d2 = std::numeric_limits<long>::max();
        int best_label = std::numeric_limits<int>::max();
        for (int j : keepers) {
            const long dr = j / cols - r, dc = j % cols - c;
            const long d2 = dr * dr + dc * dc;
            const int lbl = segmented.labels[j];
            if (d2 < best_d2 || (d2 == best_d2 && lbl < best_label)) {
                best_d2 = d2;
                best_label = lbl;
            }
        }
        out.labels[i] = best_label;
    }

    // dense renumbering, first-encounter scan order
    std::vector<int> remap(sizes.size(), -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        int& l = out.labels[i];
        if (remap[l] < 0) remap[l] = next++;
        l = remap[l];
    }
    out.num_clusters = next;
    return out;
}

}  // namespace kinecluster
