#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kinecluster/ccl.hpp"
#include "kinecluster/hypergraph.hpp"
#include "kinecluster/kmeans.hpp"
#include "kinecluster/spectral.hpp"

namespace kinecluster {

struct CspaResult {
    Labeling labeling;
    Eigen::VectorXd eigenvalues;  // of the normalized consensus operator
};

// CSPA: spectral partitioning of the consensus similarity S = (1/r) H H^T.
// Small problems materialize S and take the dense path; larger ones work
// through the implicit operator.
inline CspaResult cspa_full(const std::vector<Labeling>& labelings, int k_final, std::uint64_t seed,
                            const SpectralOptions& opts = {}) {
    if (labelings.size() < 2) throw ValidationError("cspa: need at least 2 labelings (r >= 2)");
    if (k_final < 2) throw ValidationError("cspa: k_final must be >= 2");
    const Hypergraph hg = build_hypergraph(labelings);
    const ConsensusSimilarityOp op(hg);

    SpectralResult res;
    if (hg.n <= opts.dense_threshold) {
        const Eigen::MatrixXd H = hg.materialize();
        const Eigen::MatrixXd S = (H * H.transpose()) / static_cast<double>(hg.r);
        res = spectral_affinity_full(S, k_final, seed, opts);
    } else {
        res = spectral_operator_full(op, k_final, seed, opts);
    }
    res.labeling.method = "cspa";
    res.labeling.params["r"] = std::to_string(hg.r);
    res.labeling.params["k_final"] = std::to_string(k_final);
    res.labeling.grid = labelings.front().grid;
    return {std::move(res.labeling), std::move(res.eigenvalues)};
}

inline Labeling cspa(const std::vector<Labeling>& labelings, int k_final, std::uint64_t seed,
                     const SpectralOptions& opts = {}) {
    return cspa_full(labelings, k_final, seed, opts).labeling;
}

struct EnsembleOptions {
    int k_base = 2;
    std::optional<int> k_final;  // defaults to k_base
    int min_size = 5;
    Connectivity connectivity = Connectivity::four;
    KMeansOptions kmeans_opts{};
    SpectralOptions spectral_opts{};
};

struct EnsembleResult {
    Labeling consensus;                 // final segmented consensus
    Labeling consensus_raw;             // CSPA output before re-segmentation
    std::vector<Labeling> base;         // per-feature-set k-means labelings
    std::vector<Labeling> segmented;    // after CCL + min-size, input to CSPA
    Eigen::VectorXd consensus_eigenvalues;
};

// Full ensemble pipeline: per feature set k-means -> positional segmentation
// -> min-size filtering; CSPA consensus over the segmented labelings; final
// positional segmentation + min-size filtering of the consensus.
inline EnsembleResult ensemble_pipeline(const std::vector<FeatureMatrix>& feature_sets,
                                        std::uint64_t seed, const EnsembleOptions& opts = {}) {
    if (feature_sets.size() < 2)
        throw ValidationError("ensemble_pipeline: need at least 2 feature sets (r >= 2)");
    const GridShape grid = feature_sets.front().grid;
    if (!grid.valid()) throw ValidationError("ensemble_pipeline: feature sets must carry a grid shape");
    for (const auto& f : feature_sets)
        if (!(f.grid == grid))
            throw ValidationError("ensemble_pipeline: feature sets disagree on the grid");

    EnsembleResult out;
    const auto stage = [](const std::string& name, auto&& fn) {
        try {
            return fn();
        } catch (const ValidationError& e) {
            throw ValidationError("ensemble stage '" + name + "': " + e.what());
        } catch (const ClusteringError& e) {
            throw ClusteringError("ensemble stage '" + name + "': " + e.what());
        }
    };

    for (std::size_t l = 0; l < feature_sets.size(); ++l) {
        Labeling base = stage("kmeans", [&] {
            return kmeans(feature_sets[l], opts.k_base, mix_seed(seed, l), opts.kmeans_opts);
        });
        Labeling seg = stage("connected_components",
                             [&] { return connected_components(base, opts.connectivity); });
        seg = stage("min_size", [&] { return enforce_min_size(seg, opts.min_size); });
        out.base.push_back(std::move(base));
        out.segmented.push_back(std::move(seg));
    }

    const int k_final = opts.k_final.value_or(opts.k_base);
    CspaResult consensus = stage("cspa", [&] {
        return cspa_full(out.segmented, k_final, mix_seed(seed, 0xc59aUL), opts.spectral_opts);
    });
    out.consensus_raw = std::move(consensus.labeling);
    out.consensus_eigenvalues = std::move(consensus.eigenvalues);

    Labeling final_seg = stage("connected_components",
                               [&] { return connected_components(out.consensus_raw, opts.connectivity); });
    out.consensus = stage("min_size", [&] { return enforce_min_size(final_seg, opts.min_size); });
    out.consensus.method = "ensemble";
    return out;
}

}  // namespace kinecluster
