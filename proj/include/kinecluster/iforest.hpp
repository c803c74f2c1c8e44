#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "kinecluster/kinematics.hpp"
#include "kinecluster/labeling.hpp"
#include "kinecluster/rng.hpp"

namespace kinecluster {

struct IsolationForestOptions {
    int trees = 100;
    int subsample = 256;
    std::optional<double> contamination;  // top fraction labeled anomalous
};

// Average unsuccessful-search path length in a BST of m points; the
// normalizer c(m) from the isolation forest construction.
inline double iforest_path_normalizer(int m) {
    if (m <= 1) return 0.0;
    if (m == 2) return 1.0;
    constexpr double euler_gamma = 0.5772156649015329;
    const double h = std::log(static_cast<double>(m - 1)) + euler_gamma;
    return 2.0 * h - 2.0 * static_cast<double>(m - 1) / m;
}

namespace detail {

struct ITreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    int size = 0;  // leaf population
};

struct ITree {
    std::vector<ITreeNode> nodes;

    double path_length(const Eigen::MatrixXd& x, int row) const {
        int node = 0;
        double depth = 0.0;
        for (;;) {
            const ITreeNode& nd = nodes[node];
            if (nd.feature < 0) return depth + iforest_path_normalizer(nd.size);
            node = (x(row, nd.feature) < nd.threshold) ? nd.left : nd.right;
            depth += 1.0;
        }
    }
};

inline int build_itree_node(ITree& tree, const Eigen::MatrixXd& x, std::vector<int>& idx, int begin,
                            int end, int depth, int depth_cap, Rng& rng) {
    const int node = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int size = end - begin;
    if (size <= 1 || depth >= depth_cap) {
        tree.nodes[node].size = size;
        return node;
    }
    // candidate features are the non-constant ones over this node's points
    const int d = static_cast<int>(x.cols());
    std::vector<int> usable;
    usable.reserve(d);
    for (int f = 0; f < d; ++f) {
        double lo = x(idx[begin], f), hi = lo;
        for (int t = begin + 1; t < end; ++t) {
            lo = std::min(lo, x(idx[t], f));
            hi = std::max(hi, x(idx[t], f));
        }
        if (hi > lo) usable.push_back(f);
    }
    if (usable.empty()) {
        tree.nodes[node].size = size;
        return node;
    }
    const int f = usable[rng.index(usable.size())];
    double lo = x(idx[begin], f), hi = lo;
    for (int t = begin + 1; t < end; ++t) {
        lo = std::min(lo, x(idx[t], f));
        hi = std::max(hi, x(idx[t], f));
    }
    const double threshold = rng.uniform(lo, hi);
    auto mid_it = std::partition(idx.begin() + begin, idx.begin() + end,
                                 [&](int i) { return x(i, f) < threshold; });
    const int mid = static_cast<int>(mid_it - idx.begin());
    if (mid == begin || mid == end) {
        tree.nodes[node].size = size;
        return node;
    }
    tree.nodes[node].feature = f;
    tree.nodes[node].threshold = threshold;
    tree.nodes[node].left = build_itree_node(tree, x, idx, begin, mid, depth + 1, depth_cap, rng);
    tree.nodes[node].right = build_itree_node(tree, x, idx, mid, end, depth + 1, depth_cap, rng);
    return node;
}

}  // namespace detail

// Anomaly scores s(x) = 2^(-E[h(x)] / c(subsample)); higher is more isolated.
inline Eigen::VectorXd iforest_scores(const Eigen::MatrixXd& x, std::uint64_t seed,
                                      const IsolationForestOptions& opts = {}) {
    const int n = static_cast<int>(x.rows());
    if (n < 8) throw ValidationError("iforest: need at least 8 points");
    const int psi = std::min(opts.subsample, n);
    const int depth_cap = static_cast<int>(std::ceil(std::log2(std::max(2, psi))));

    std::vector<detail::ITree> forest(opts.trees);
    parallel_for(static_cast<std::size_t>(opts.trees), [&](std::size_t t) {
        Rng rng(mix_seed(seed, t));
        // subsample without replacement (partial Fisher-Yates)
        std::vector<int> pool(n);
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < psi; ++i) std::swap(pool[i], pool[i + rng.index(n - i)]);
        std::vector<int> idx(pool.begin(), pool.begin() + psi);
        detail::build_itree_node(forest[t], x, idx, 0, psi, 0, depth_cap, rng);
    });

    const double c_psi = iforest_path_normalizer(psi);
    Eigen::VectorXd scores(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        double mean_path = 0.0;
        for (const auto& tree : forest) mean_path += tree.path_length(x, static_cast<int>(i));
        mean_path /= opts.trees;
        scores[i] = std::pow(2.0, -mean_path / c_psi);
    });
    return scores;
}

// Two-cluster labeling: 0 = normal, 1 = anomalous. With no contamination
// override, the classic s > 0.5 threshold applies; constant inputs collapse
// to a single cluster (flagged).
inline Labeling iforest(const FeatureMatrix& features, std::uint64_t seed,
                        const IsolationForestOptions& opts = {}) {
    const Eigen::VectorXd scores = iforest_scores(features.values, seed, opts);
    const int n = static_cast<int>(scores.size());
    std::vector<int> labels(n, 0);
    if (opts.contamination) {
        const double c = *opts.contamination;
        if (c < 0.0 || c > 1.0) throw ValidationError("iforest: contamination must lie in [0,1]");
        const int count = std::clamp(static_cast<int>(std::llround(c * n)), 0, n);
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return scores[a] > scores[b]; });
        for (int i = 0; i < count; ++i) labels[order[i]] = 1;
    } else {
        for (int i = 0; i < n; ++i) labels[i] = scores[i] > 0.5 ? 1 : 0;
    }
    Labeling out = Labeling::from_labels(std::move(labels), "iforest");
    out.num_clusters = 2;
    out.grid = features.grid;
    out.params["trees"] = std::to_string(opts.trees);
    out.params["subsample"] = std::to_string(opts.subsample);
    out.params["seed"] = std::to_string(seed);
    const auto sizes = cluster_sizes(out);
    out.empty_cluster = sizes[0] == 0 || sizes[1] == 0;
    return out;
}

}  // namespace kinecluster
