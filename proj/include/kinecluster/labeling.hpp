#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "kinecluster/common.hpp"

namespace kinecluster {

// Sentinel for objects without an assigned cluster (hypergraph "?").
constexpr int kUnlabeled = -1;

// Integer cluster assignment per object. When the objects are grid nodes the
// grid shape is attached so image-style post-processing (CCL, heatmaps) can
// interpret the rows.
struct Labeling {
    std::vector<int> labels;
    int num_clusters = 0;
    GridShape grid{};
    std::string method;
    std::map<std::string, std::string> params;
    // k-means reports its within-cluster sum-of-squares here; NaN otherwise.
    double objective = std::numeric_limits<double>::quiet_NaN();
    bool empty_cluster = false;

    int size() const { return static_cast<int>(labels.size()); }

    static Labeling from_labels(std::vector<int> labels, std::string method = {}) {
        Labeling out;
        out.labels = std::move(labels);
        out.method = std::move(method);
        int max_label = -1;
        for (int l : out.labels) max_label = std::max(max_label, l);
        out.num_clusters = max_label + 1;
        return out;
    }

    // Throws if any label lies outside [0, num_clusters) (kUnlabeled allowed).
    void check_consistent() const {
        for (int l : labels) {
            if (l == kUnlabeled) continue;
            if (l < 0 || l >= num_clusters)
                throw ValidationError("labeling: label " + std::to_string(l) +
                                      " outside [0, " + std::to_string(num_clusters) + ")");
        }
        if (grid.valid() && grid.size() != size())
            throw ValidationError("labeling: grid shape does not match label count");
    }
};

inline std::vector<int> cluster_sizes(const Labeling& labeling) {
    std::vector<int> sizes(std::max(labeling.num_clusters, 0), 0);
    for (int l : labeling.labels)
        if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
    return sizes;
}

}  // namespace kinecluster
