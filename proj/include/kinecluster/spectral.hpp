#pragma once

#include <algorithm>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "kinecluster/eigen_solvers.hpp"
#include "kinecluster/kmeans.hpp"

namespace kinecluster {

struct SpectralOptions {
    double gamma = 1.0;        // RBF width for feature input
    int knn = 32;              // sparse-affinity neighbor count for large n
    int dense_threshold = 3000;
    int subspace_max_iter = 2000;
    double subspace_tol = 1e-10;
    KMeansOptions kmeans_opts{};
};

struct SpectralResult {
    Labeling labeling;
    Eigen::VectorXd eigenvalues;  // of D^{-1} A, descending (1 - these are the L_rw eigenvalues)
    int zero_degree_fixes = 0;
};

namespace detail {

// k-means on the rows of the random-walk eigenvector embedding.
inline SpectralResult cluster_embedding(Eigen::MatrixXd embedding, Eigen::VectorXd eigenvalues,
                                        int zero_fixes, int k, std::uint64_t seed,
                                        const SpectralOptions& opts) {
    SpectralResult res;
    KMeansResult km = kmeans_full(embedding, k, mix_seed(seed, 0xe31bedUL), opts.kmeans_opts);
    res.labeling = Labeling::from_labels(std::move(km.labels), "spectral");
    res.labeling.num_clusters = k;
    res.labeling.params["k"] = std::to_string(k);
    res.labeling.params["seed"] = std::to_string(seed);
    res.eigenvalues = std::move(eigenvalues);
    res.zero_degree_fixes = zero_fixes;
    return res;
}

}  // namespace detail

// Dense path: random-walk normalized spectral clustering of a precomputed
// affinity matrix. Uses the symmetric similarity transform, so eigenvectors
// of D^{-1}A are recovered as D^{-1/2} v.
inline SpectralResult spectral_affinity_full(const Eigen::MatrixXd& A, int k, std::uint64_t seed,
                                             const SpectralOptions& opts = {}) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n) throw ValidationError("spectral: affinity must be square");
    if (k < 1 || k > n) throw ValidationError("spectral: k out of range");
    if (((A - A.transpose()).cwiseAbs().maxCoeff()) > 1e-10)
        throw ValidationError("spectral: affinity must be symmetric");
    if (A.minCoeff() < -1e-12) throw ValidationError("spectral: affinity must be non-negative");

    Eigen::VectorXd deg = A.rowwise().sum();
    int zero_fixes = 0;
    Eigen::MatrixXd Awork = A;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (deg[i] <= 0.0) {
            // isolated vertex: tiny self-loop keeps D invertible
            Awork(i, i) += 1e-12;
            deg[i] = Awork.row(i).sum();
            ++zero_fixes;
        }
    }
    const Eigen::VectorXd dinv_sqrt = deg.array().rsqrt();
    Eigen::MatrixXd M = dinv_sqrt.asDiagonal() * Awork * dinv_sqrt.asDiagonal();
    M = 0.5 * (M + M.transpose()).eval();

    EigenPairs pairs = top_eigenpairs_dense(M, k);
    Eigen::MatrixXd embedding = dinv_sqrt.asDiagonal() * pairs.vectors;
    return detail::cluster_embedding(std::move(embedding), std::move(pairs.values), zero_fixes, k,
                                     seed, opts);
}

// Implicit path: the affinity is only available as matrix-vector products
// (e.g. the CSPA consensus operator). Degrees come from one product with the
// ones vector; the shifted normalized operator (M + I)/2 keeps the target
// eigenvalues dominant in magnitude for the block power iteration.
inline SpectralResult spectral_operator_full(const SymmetricOp& affinity, int k, std::uint64_t seed,
                                             const SpectralOptions& opts = {}) {
    const Eigen::Index n = affinity.size();
    if (k < 1 || k > n) throw ValidationError("spectral: k out of range");

    Eigen::VectorXd deg(n), ones = Eigen::VectorXd::Ones(n);
    affinity.apply(ones, deg);
    int zero_fixes = 0;
    std::vector<char> isolated(n, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (deg[i] <= 0.0) {
            isolated[i] = 1;
            deg[i] = 1e-12;
            ++zero_fixes;
        }
    }
    const Eigen::VectorXd dinv_sqrt = deg.array().rsqrt();

    class ShiftedNormalizedOp final : public SymmetricOp {
    public:
        ShiftedNormalizedOp(const SymmetricOp& aff, const Eigen::VectorXd& dinv_sqrt,
                            const std::vector<char>& isolated)
            : aff_(aff), dinv_sqrt_(dinv_sqrt), isolated_(isolated) {}
        Eigen::Index size() const override { return dinv_sqrt_.size(); }
        void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const override {
            Eigen::VectorXd z = dinv_sqrt_.cwiseProduct(x);
            for (Eigen::Index i = 0; i < z.size(); ++i)
                if (isolated_[i]) z[i] = 0.0;
            Eigen::VectorXd w(z.size());
            aff_.apply(z, w);
            w = dinv_sqrt_.cwiseProduct(w);
            for (Eigen::Index i = 0; i < w.size(); ++i)
                if (isolated_[i]) w[i] = x[i];  // self-loop only
            y = 0.5 * (w + x);
        }

    private:
        const SymmetricOp& aff_;
        const Eigen::VectorXd& dinv_sqrt_;
        const std::vector<char>& isolated_;
    } shifted(affinity, dinv_sqrt, isolated);

    EigenPairs pairs = top_eigenpairs_subspace(shifted, k, mix_seed(seed, 0x59ecUL),
                                               opts.subspace_max_iter, opts.subspace_tol);
    pairs.values = (2.0 * pairs.values.array() - 1.0).matrix();  // undo the shift
    Eigen::MatrixXd embedding = dinv_sqrt.asDiagonal() * pairs.vectors;
    return detail::cluster_embedding(std::move(embedding), std::move(pairs.values), zero_fixes, k,
                                     seed, opts);
}

namespace detail {

// Sparse symmetrized k-NN RBF affinity for feature inputs too large for the
// dense path.
inline Eigen::SparseMatrix<double> knn_rbf_affinity(const Eigen::MatrixXd& x, int knn, double gamma) {
    const int n = static_cast<int>(x.rows());
    const int k = std::min(knn, n - 1);
    using T = Eigen::Triplet<double>;
    std::vector<std::vector<T>> rows(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        std::vector<std::pair<double, int>> d;
        d.reserve(n - 1);
        for (int j = 0; j < n; ++j) {
            if (j == static_cast<int>(i)) continue;
            d.emplace_back((x.row(i) - x.row(j)).squaredNorm(), j);
        }
        std::partial_sort(d.begin(), d.begin() + k, d.end());
        rows[i].reserve(k);
        for (int t = 0; t < k; ++t)
            rows[i].emplace_back(static_cast<int>(i), d[t].second, std::exp(-gamma * d[t].first));
    });
    std::vector<T> trip;
    trip.reserve(static_cast<std::size_t>(n) * k * 2);
    for (auto& r : rows)
        for (auto& t : r) {
            trip.push_back(t);
            trip.emplace_back(t.col(), t.row(), t.value());
        }
    Eigen::SparseMatrix<double> A(n, n);
    // duplicate (i,j) entries are identical RBF values; averaging keeps them
    A.setFromTriplets(trip.begin(), trip.end(),
                      [](const double& a, const double& b) { return 0.5 * (a + b); });
    return A;
}

class SparseSymOp final : public SymmetricOp {
public:
    explicit SparseSymOp(const Eigen::SparseMatrix<double>& m) : m_(m) {}
    Eigen::Index size() const override { return m_.rows(); }
    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const override { y = m_ * x; }

private:
    const Eigen::SparseMatrix<double>& m_;
};

}  // namespace detail

// Spectral clustering of feature rows: RBF affinity (dense for small n,
// symmetrized k-NN for large n), random-walk normalization, k-means on the
// leading eigenvector embedding.
inline SpectralResult spectral_full(const FeatureMatrix& features, int k, std::uint64_t seed,
                                    const SpectralOptions& opts = {}) {
    const int n = features.rows();
    if (n <= opts.dense_threshold) {
        Eigen::MatrixXd A(n, n);
        for (int i = 0; i < n; ++i) {
            A(i, i) = 1.0;
            for (int j = i + 1; j < n; ++j) {
                const double v =
                    std::exp(-opts.gamma * (features.values.row(i) - features.values.row(j)).squaredNorm());
                A(i, j) = v;
                A(j, i) = v;
            }
        }
        SpectralResult res = spectral_affinity_full(A, k, seed, opts);
        res.labeling.grid = features.grid;
        res.labeling.params["gamma"] = std::to_string(opts.gamma);
        return res;
    }

    const Eigen::SparseMatrix<double> A = detail::knn_rbf_affinity(features.values, opts.knn, opts.gamma);
    detail::SparseSymOp op(A);
    SpectralResult res = spectral_operator_full(op, k, seed, opts);
    res.labeling.grid = features.grid;
    res.labeling.params["gamma"] = std::to_string(opts.gamma);
    res.labeling.params["knn"] = std::to_string(opts.knn);
    return res;
}

inline Labeling spectral(const FeatureMatrix& features, int k, std::uint64_t seed,
                         const SpectralOptions& opts = {}) {
    return spectral_full(features, k, seed, opts).labeling;
}

inline Labeling spectral_affinity(const Eigen::MatrixXd& A, int k, std::uint64_t seed,
                                  const SpectralOptions& opts = {}) {
    return spectral_affinity_full(A, k, seed, opts).labeling;
}

}  // namespace kinecluster
