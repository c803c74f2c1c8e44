#pragma once

#include <string>
#include <vector>

#include "kinecluster/ccl.hpp"
#include "kinecluster/ensemble.hpp"
#include "kinecluster/kmeans.hpp"

namespace kinecluster {

// Per cluster, the member minimizing the total Euclidean distance in feature
// space to all other members; ties break toward the smaller row index.
inline std::vector<int> cluster_medoids(const Eigen::MatrixXd& features, const Labeling& labeling) {
    const int n = static_cast<int>(features.rows());
    if (labeling.size() != n) throw ValidationError("cluster_medoids: labeling/feature size mismatch");
    const int k = labeling.num_clusters;
    std::vector<std::vector<int>> members(k);
    for (int i = 0; i < n; ++i) {
        const int l = labeling.labels[i];
        if (l < 0) throw ValidationError("cluster_medoids: labeling must cover all rows");
        members[l].push_back(i);
    }
    std::vector<int> medoids(k, -1);
    for (int c = 0; c < k; ++c) {
        if (members[c].empty()) throw ValidationError("cluster_medoids: empty cluster " + std::to_string(c));
        const auto& m = members[c];
        double best = std::numeric_limits<double>::infinity();
        int best_idx = m.front();
        for (int a : m) {
            double total = 0.0;
            for (int b : m) total += (features.row(a) - features.row(b)).norm();
            if (total < best) {  // strict: ties keep the smaller index
                best = total;
                best_idx = a;
            }
        }
        medoids[c] = best_idx;
    }
    return medoids;
}

// Piecewise-constant reconstruction: every node takes the value its cluster's
// medoid carries, per component.
inline Eigen::MatrixXd reconstruct_field(const Eigen::MatrixXd& values, const Labeling& labeling,
                                         const std::vector<int>& medoids) {
    if (labeling.size() != values.rows())
        throw ValidationError("reconstruct_field: labeling/value size mismatch");
    if (static_cast<int>(medoids.size()) != labeling.num_clusters)
        throw ValidationError("reconstruct_field: medoids inconsistent with labeling");
    Eigen::MatrixXd out(values.rows(), values.cols());
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        out.row(i) = values.row(medoids[labeling.labels[i]]);
    return out;
}

inline double reconstruction_mse(const Eigen::MatrixXd& original, const Eigen::MatrixXd& reconstructed) {
    if (original.rows() != reconstructed.rows() || original.cols() != reconstructed.cols())
        throw ValidationError("reconstruction_mse: shape mismatch");
    return (original - reconstructed).squaredNorm() / static_cast<double>(original.size());
}

struct ReconstructionReport {
    int target_k = 0;
    int realized_sensors = 0;  // spatial cluster count after segmentation
    std::vector<int> medoid_indices;
    double mse = 0.0;                     // aggregate over evaluated components
    std::vector<double> mse_per_component;
    std::string load_case;
};

struct SensorSweepOptions {
    Connectivity connectivity = Connectivity::four;
    int min_size = 5;                      // ensemble path only
    KMeansOptions kmeans_opts{};
    SpectralOptions spectral_opts{};
};

// Sweeps sensor budgets: clusters the strain features (k-means + CCL for a
// single load case, the full ensemble pipeline for several), places one
// sensor per spatial cluster at its feature-space medoid, and scores the
// piecewise-constant reconstruction of the evaluation strain component(s).
inline std::vector<ReconstructionReport> sensor_sweep(
    const std::vector<FeatureMatrix>& feature_sets, const FeatureMatrix& eval_features,
    const Eigen::MatrixXd& eval_values, const std::vector<int>& k_range, std::uint64_t seed,
    const SensorSweepOptions& opts = {}) {
    if (feature_sets.empty()) throw ValidationError("sensor_sweep: no feature sets");
    for (std::size_t i = 1; i < k_range.size(); ++i)
        if (k_range[i] <= k_range[i - 1])
            throw ValidationError("sensor_sweep: k_range must be strictly ascending");
    if (eval_values.rows() != eval_features.values.rows())
        throw ValidationError("sensor_sweep: evaluation values/features size mismatch");

    std::vector<ReconstructionReport> reports(k_range.size());
    parallel_for(k_range.size(), [&](std::size_t t) {
        const int k = k_range[t];
        Labeling segmented;
        if (feature_sets.size() == 1) {
            Labeling base = kmeans(feature_sets.front(), k, mix_seed(seed, t), opts.kmeans_opts);
            segmented = connected_components(base, opts.connectivity);
        } else {
            EnsembleOptions eopts;
            eopts.k_base = k;
            eopts.k_final = k;
            eopts.min_size = opts.min_size;
            eopts.connectivity = opts.connectivity;
            eopts.kmeans_opts = opts.kmeans_opts;
            eopts.spectral_opts = opts.spectral_opts;
            segmented = ensemble_pipeline(feature_sets, mix_seed(seed, t), eopts).consensus;
        }

        ReconstructionReport rep;
        rep.target_k = k;
        rep.realized_sensors = segmented.num_clusters;
        rep.medoid_indices = cluster_medoids(eval_features.values, segmented);
        const Eigen::MatrixXd rec = reconstruct_field(eval_values, segmented, rep.medoid_indices);
        rep.mse = reconstruction_mse(eval_values, rec);
        rep.mse_per_component.resize(eval_values.cols());
        for (Eigen::Index c = 0; c < eval_values.cols(); ++c)
            rep.mse_per_component[c] = (eval_values.col(c) - rec.col(c)).squaredNorm() /
                                       static_cast<double>(eval_values.rows());
        reports[t] = std::move(rep);
    });
    return reports;
}

}  // namespace kinecluster
