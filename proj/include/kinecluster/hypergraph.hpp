#pragma once

#include <map>
#include <vector>

#include <Eigen/Dense>

#include "kinecluster/eigen_solvers.hpp"
#include "kinecluster/labeling.hpp"

namespace kinecluster {

// Binary object-by-cluster indicator matrix concatenated across labelings,
// stored as one global column id per (labeling, object); -1 marks an
// unlabeled object (all-zero block row).
struct Hypergraph {
    int n = 0;  // objects
    int r = 0;  // labelings
    int total_columns = 0;
    std::vector<int> block_offset;           // per labeling, first global column
    std::vector<std::vector<int>> column_of;  // [labeling][object] -> global column or -1

    // Dense H for small problems and oracle comparisons.
    Eigen::MatrixXd materialize() const {
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, total_columns);
        for (int l = 0; l < r; ++l)
            for (int i = 0; i < n; ++i)
                if (column_of[l][i] >= 0) H(i, column_of[l][i]) = 1.0;
        return H;
    }
};

// One indicator column per (labeling, cluster) pair, ordered by labeling and
// then ascending cluster id within the labeling.
inline Hypergraph build_hypergraph(const std::vector<Labeling>& labelings) {
    if (labelings.size() < 2) throw ValidationError("build_hypergraph: need at least 2 labelings");
    const int n = labelings.front().size();
    Hypergraph hg;
    hg.n = n;
    hg.r = static_cast<int>(labelings.size());
    hg.column_of.resize(hg.r);
    for (int l = 0; l < hg.r; ++l) {
        const Labeling& lab = labelings[l];
        if (lab.size() != n) throw ValidationError("build_hypergraph: labelings differ in length");
        std::map<int, int> cluster_col;  // ascending cluster id -> local column
        for (int v : lab.labels)
            if (v != kUnlabeled) cluster_col.emplace(v, 0);
        int local = 0;
        for (auto& kv : cluster_col) kv.second = local++;
        hg.block_offset.push_back(hg.total_columns);
        hg.column_of[l].resize(n);
        for (int i = 0; i < n; ++i) {
            const int v = lab.labels[i];
            hg.column_of[l][i] = (v == kUnlabeled) ? -1 : hg.total_columns + cluster_col[v];
        }
        hg.total_columns += local;
    }
    return hg;
}

// Consensus similarity S = (1/r) H H^T applied as v -> (1/r) H (H^T v); the
// n x n matrix is never formed. Entries lie in [0,1]; S is symmetric PSD.
class ConsensusSimilarityOp final : public SymmetricOp {
public:
    explicit ConsensusSimilarityOp(const Hypergraph& hg) : hg_(hg) {}

    Eigen::Index size() const override { return hg_.n; }

    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const override {
        y.setZero(hg_.n);
        Eigen::VectorXd col_acc(hg_.total_columns);
        col_acc.setZero();
        for (int l = 0; l < hg_.r; ++l) {
            const auto& cols = hg_.column_of[l];
            for (int i = 0; i < hg_.n; ++i)
                if (cols[i] >= 0) col_acc[cols[i]] += x[i];
        }
        for (int l = 0; l < hg_.r; ++l) {
            const auto& cols = hg_.column_of[l];
            for (int i = 0; i < hg_.n; ++i)
                if (cols[i] >= 0) y[i] += col_acc[cols[i]];
        }
        y /= static_cast<double>(hg_.r);
    }

    // S entry, computed straight from the label structure.
    double entry(int i, int j) const {
        int agree = 0;
        for (int l = 0; l < hg_.r; ++l) {
            const int ci = hg_.column_of[l][i], cj = hg_.column_of[l][j];
            if (ci >= 0 && ci == cj) ++agree;
        }
        return static_cast<double>(agree) / hg_.r;
    }

    const Hypergraph& hypergraph() const { return hg_; }

private:
    const Hypergraph& hg_;
};

}  // namespace kinecluster
