#pragma once

#include <vector>

#include <Eigen/Dense>

#include "kinecluster/common.hpp"
#include "kinecluster/rng.hpp"

namespace kinecluster {

// Symmetric linear operator applied without materializing the matrix.
class SymmetricOp {
public:
    virtual ~SymmetricOp() = default;
    virtual Eigen::Index size() const = 0;
    virtual void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const = 0;

    Eigen::MatrixXd apply_block(const Eigen::MatrixXd& X) const {
        Eigen::MatrixXd Y(X.rows(), X.cols());
        Eigen::VectorXd x(X.rows()), y(X.rows());
        for (Eigen::Index c = 0; c < X.cols(); ++c) {
            x = X.col(c);
            apply(x, y);
            Y.col(c) = y;
        }
        return Y;
    }
};

struct EigenPairs {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // column i pairs with values[i]
};

// k largest eigenpairs of a dense symmetric matrix (Householder
// tridiagonalization + implicit QL, via Eigen's SelfAdjointEigenSolver).
inline EigenPairs top_eigenpairs_dense(const Eigen::MatrixXd& M, int k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) throw ClusteringError("eigensolver: dense decomposition failed");
    const Eigen::Index n = M.rows();
    k = std::min<Eigen::Index>(k, n);
    EigenPairs out;
    out.values.resize(k);
    out.vectors.resize(n, k);
    for (int i = 0; i < k; ++i) {
        out.values[i] = es.eigenvalues()[n - 1 - i];
        out.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    return out;
}

// Block power iteration with Rayleigh-Ritz extraction for the k largest
// eigenvalues of a symmetric operator. The caller must arrange (shift) the
// spectrum so the k largest eigenvalues are also largest in magnitude.
inline EigenPairs top_eigenpairs_subspace(const SymmetricOp& op, int k, std::uint64_t seed,
                                          int max_iter = 1000, double tol = 1e-9) {
    const Eigen::Index n = op.size();
    const int block = static_cast<int>(std::min<Eigen::Index>(n, k + std::max(4, k / 2 + 2)));
    k = static_cast<int>(std::min<Eigen::Index>(k, n));

    Rng rng(mix_seed(seed, 0x5ee9u));
    Eigen::MatrixXd V(n, block);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < block; ++j) V(i, j) = rng.normal();
    {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
        V = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
    }

    Eigen::VectorXd prev_ritz;
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::MatrixXd W = op.apply_block(V);
        Eigen::MatrixXd T = V.transpose() * W;
        T = 0.5 * (T + T.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        Eigen::VectorXd ritz(k);
        for (int i = 0; i < k; ++i) ritz[i] = es.eigenvalues()[block - 1 - i];

        if (prev_ritz.size() == k && it >= 2) {
            const double change = (ritz - prev_ritz).cwiseAbs().maxCoeff();
            if (change <= tol * std::max(1.0, ritz.cwiseAbs().maxCoeff())) {
                EigenPairs out;
                out.values = ritz;
                out.vectors.resize(n, k);
                for (int i = 0; i < k; ++i) out.vectors.col(i) = V * es.eigenvectors().col(block - 1 - i);
                return out;
            }
        }
        prev_ritz = ritz;

        Eigen::HouseholderQR<Eigen::MatrixXd> qr(W);
        V = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
    }

    // return the best available estimate after max_iter sweeps
    const Eigen::MatrixXd W = op.apply_block(V);
    Eigen::MatrixXd T = V.transpose() * W;
    T = 0.5 * (T + T.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    EigenPairs out;
    out.values.resize(k);
    out.vectors.resize(n, k);
    for (int i = 0; i < k; ++i) {
        out.values[i] = es.eigenvalues()[block - 1 - i];
        out.vectors.col(i) = V * es.eigenvectors().col(block - 1 - i);
    }
    return out;
}

}  // namespace kinecluster
