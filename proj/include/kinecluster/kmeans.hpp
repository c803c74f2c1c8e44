#pragma once

#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "kinecluster/kinematics.hpp"
#include "kinecluster/labeling.hpp"
#include "kinecluster/rng.hpp"

namespace kinecluster {

struct KMeansOptions {
    int max_iter = 300;
    int n_init = 10;
};

struct KMeansResult {
    std::vector<int> labels;
    Eigen::MatrixXd centroids;
    double objective = std::numeric_limits<double>::infinity();
    std::vector<double> objective_trace;  // after each Lloyd iteration
    bool empty_cluster_event = false;
};

namespace detail {

inline double sq_dist(const Eigen::MatrixXd& x, int i, const Eigen::MatrixXd& c, int j) {
    return (x.row(i) - c.row(j)).squaredNorm();
}

// k-means++ seeding: first centroid uniform, the rest sampled with
// probability proportional to squared distance from the chosen set.
inline std::vector<int> kmeanspp_indices(const Eigen::MatrixXd& x, int k, Rng& rng) {
    const int n = static_cast<int>(x.rows());
    std::vector<int> chosen;
    chosen.reserve(k);
    chosen.push_back(rng.index(n));
    Eigen::VectorXd d2 = (x.rowwise() - x.row(chosen[0])).rowwise().squaredNorm();
    while (static_cast<int>(chosen.size()) < k) {
        const double total = d2.sum();
        int pick;
        if (total <= 0.0) {
            pick = rng.index(n);  // all remaining points coincide with a centroid
        } else {
            double target = rng.uniform() * total;
            pick = n - 1;
            for (int i = 0; i < n; ++i) {
                target -= d2[i];
                if (target <= 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        chosen.push_back(pick);
        d2 = d2.cwiseMin((x.rowwise() - x.row(pick)).rowwise().squaredNorm());
    }
    return chosen;
}

inline KMeansResult lloyd(const Eigen::MatrixXd& x, const Eigen::MatrixXd& init, int max_iter) {
    const int n = static_cast<int>(x.rows());
    const int k = static_cast<int>(init.rows());
    KMeansResult res;
    res.centroids = init;
    res.labels.assign(n, 0);

    std::vector<int> counts(k);
    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment (ties go to the smaller centroid index)
        bool changed = false;
        double objective = 0.0;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sq_dist(x, i, res.centroids, 0);
            for (int j = 1; j < k; ++j) {
                const double d = sq_dist(x, i, res.centroids, j);
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            objective += best_d;
            if (res.labels[i] != best) {
                res.labels[i] = best;
                changed = true;
            }
        }
        res.objective_trace.push_back(objective);
        if (!changed && iter > 0) break;

        // update
        std::fill(counts.begin(), counts.end(), 0);
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
        for (int i = 0; i < n; ++i) {
            sums.row(res.labels[i]) += x.row(i);
            ++counts[res.labels[i]];
        }
        for (int j = 0; j < k; ++j) {
            if (counts[j] > 0) {
                res.centroids.row(j) = sums.row(j) / counts[j];
            } else {
                // reseed an emptied centroid at the point farthest from its
                // currently assigned centroid
                res.empty_cluster_event = true;
                int far = 0;
                double far_d = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double d = sq_dist(x, i, res.centroids, res.labels[i]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                res.centroids.row(j) = x.row(far);
            }
        }
    }

    // final assignment pass so labels are argmin w.r.t. the final centroids
    // and the reported objective is the within-cluster sum-of-squares
    double objective = 0.0;
    for (int i = 0; i < n; ++i) {
        int best = 0;
        double best_d = sq_dist(x, i, res.centroids, 0);
        for (int j = 1; j < k; ++j) {
            const double d = sq_dist(x, i, res.centroids, j);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        res.labels[i] = best;
        objective += best_d;
    }
    res.objective = objective;
    return res;
}

}  // namespace detail

// Lloyd iterations from k-means++ starts; best of n_init restarts by the
// within-cluster sum-of-squares objective. `init_indices`, when given,
// overrides the seeding (single run) — used by tests and by spectral
// embeddings that need reproducible starts.
inline KMeansResult kmeans_full(const Eigen::MatrixXd& x, int k, std::uint64_t seed,
                                const KMeansOptions& opts = {},
                                const std::vector<int>* init_indices = nullptr) {
    const int n = static_cast<int>(x.rows());
    if (k < 1) throw ValidationError("kmeans: k must be >= 1");
    if (k > n) throw ValidationError("kmeans: k exceeds the number of points");
    if (k == n) {
        KMeansResult res;
        res.labels.resize(n);
        std::iota(res.labels.begin(), res.labels.end(), 0);
        res.centroids = x;
        res.objective = 0.0;
        res.objective_trace = {0.0};
        return res;
    }

    const auto run_from = [&](const std::vector<int>& idx) {
        Eigen::MatrixXd init(k, x.cols());
        for (int j = 0; j < k; ++j) init.row(j) = x.row(idx[j]);
        return detail::lloyd(x, init, opts.max_iter);
    };

    if (init_indices) {
        if (static_cast<int>(init_indices->size()) != k)
            throw ValidationError("kmeans: init_indices size must equal k");
        return run_from(*init_indices);
    }

    KMeansResult best;
    for (int restart = 0; restart < std::max(1, opts.n_init); ++restart) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(restart)));
        KMeansResult res = run_from(detail::kmeanspp_indices(x, k, rng));
        if (res.objective < best.objective) best = std::move(res);
    }
    return best;
}

inline Labeling kmeans(const FeatureMatrix& features, int k, std::uint64_t seed,
                       const KMeansOptions& opts = {}) {
    KMeansResult res = kmeans_full(features.values, k, seed, opts);
    Labeling out = Labeling::from_labels(std::move(res.labels), "kmeans");
    out.num_clusters = k;
    out.grid = features.grid;
    out.objective = res.objective;
    out.params["k"] = std::to_string(k);
    out.params["seed"] = std::to_string(seed);
    out.params["n_init"] = std::to_string(opts.n_init);
    const auto sizes = cluster_sizes(out);
    out.empty_cluster = std::any_of(sizes.begin(), sizes.end(), [](int s) { return s == 0; });
    return out;
}

// Eq.-style within-cluster sum-of-squares of an arbitrary labeling (centroids
// recomputed from the labels). Used to cross-check reported objectives.
inline double kmeans_objective(const Eigen::MatrixXd& x, const std::vector<int>& labels, int k) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    std::vector<int> counts(k, 0);
    const int n = static_cast<int>(x.rows());
    for (int i = 0; i < n; ++i) {
        sums.row(labels[i]) += x.row(i);
        ++counts[labels[i]];
    }
    for (int j = 0; j < k; ++j)
        if (counts[j] > 0) sums.row(j) /= counts[j];
    double obj = 0.0;
    for (int i = 0; i < n; ++i) obj += (x.row(i) - sums.row(labels[i])).squaredNorm();
    return obj;
}

}  // namespace kinecluster
