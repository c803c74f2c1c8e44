#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kinecluster/markers.hpp"

namespace kinecluster {

// Regular R x R lattice over the unit square carrying interpolated
// displacements and the per-node kinematic tensors derived from them.
// Node index = row*R + col with row 0 at physical y = 0.
struct GridField {
    int R = 0;
    Eigen::MatrixX2d disp;
    std::vector<Mat2> grad_u, F, C, E;
    Eigen::VectorXd I1, I2;
    std::vector<std::uint8_t> valid;  // det F > 0 before imputation
    int imputed_nodes = 0;
    int mls_linear_fallbacks = 0;
    int mls_idw_fallbacks = 0;
    int coverage_warnings = 0;

    GridShape shape() const { return {R, R}; }
    int num_nodes() const { return R * R; }
    double spacing() const { return 1.0 / (R - 1); }
    Vec2 node_pos(int idx) const { return Vec2((idx % R) * spacing(), (idx / R) * spacing()); }
};

namespace detail {

// Uniform bucket grid over [0,1]^2 for k-nearest-neighbor marker queries.
class MarkerIndex {
public:
    explicit MarkerIndex(const Eigen::MatrixX2d& pts) : pts_(pts) {
        const int n = static_cast<int>(pts.rows());
        nb_ = std::max(1, static_cast<int>(std::sqrt(n / 4.0)));
        buckets_.resize(static_cast<std::size_t>(nb_) * nb_);
        for (int i = 0; i < n; ++i) buckets_[bucket_of(pts.row(i))].push_back(i);
    }

    // k nearest markers to q, sorted by (distance, index).
    void knn(const Vec2& q, int k, std::vector<std::pair<double, int>>& out) const {
        out.clear();
        const double cell = 1.0 / nb_;
        const int bi = coord(q.x()), bj = coord(q.y());
        // max-heap on distance so the worst of the current k is on top
        std::priority_queue<std::pair<double, int>> heap;
        for (int ring = 0; ring < 2 * nb_; ++ring) {
            bool any_bucket = false;
            for (int dj = -ring; dj <= ring; ++dj) {
                for (int di = -ring; di <= ring; ++di) {
                    if (std::max(std::abs(di), std::abs(dj)) != ring) continue;
                    const int ci = bi + di, cj = bj + dj;
                    if (ci < 0 || cj < 0 || ci >= nb_ || cj >= nb_) continue;
                    any_bucket = true;
                    for (int idx : buckets_[static_cast<std::size_t>(cj) * nb_ + ci]) {
                        const double d2 = (pts_.row(idx).transpose() - q).squaredNorm();
                        if (static_cast<int>(heap.size()) < k)
                            heap.emplace(d2, idx);
                        else if (d2 < heap.top().first) {
                            heap.pop();
                            heap.emplace(d2, idx);
                        }
                    }
                }
            }
            if (static_cast<int>(heap.size()) == k) {
                // buckets at ring r+1 are at least r*cell away from q
                const double safe = static_cast<double>(ring) * cell;
                if (heap.top().first <= safe * safe) break;
            }
            if (!any_bucket && ring > 2 * nb_) break;
        }
        while (!heap.empty()) {
            out.emplace_back(std::sqrt(heap.top().first), heap.top().second);
            heap.pop();
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first < b.first : a.second < b.second;
        });
    }

private:
    int coord(double x) const { return std::clamp(static_cast<int>(x * nb_), 0, nb_ - 1); }
    int bucket_of(const Eigen::RowVector2d& p) const { return coord(p.y()) * nb_ + coord(p.x()); }

    const Eigen::MatrixX2d& pts_;
    int nb_ = 1;
    std::vector<std::vector<int>> buckets_;
};

inline double wendland_c2(double r) {
    if (r >= 1.0) return 0.0;
    const double s = 1.0 - r;
    const double s2 = s * s;
    return s2 * s2 * (4.0 * r + 1.0);
}

}  // namespace detail

// Moving-least-squares interpolation of scattered marker displacements onto
// the regular grid. Quadratic basis over the k nearest markers; rank-deficient
// fits fall back to a linear basis, then to inverse-distance weighting.
inline GridField interpolate_to_grid(const MarkerSet& markers, int R = 89, int k = 16) {
    markers.validate();
    if (k < 6) throw ValidationError("interpolate_to_grid: neighbor count k must be >= 6");
    if (R < 2) throw ValidationError("interpolate_to_grid: grid size must be >= 2");
    const int n_markers = markers.size();
    const int k_eff = std::min(k, n_markers);

    GridField grid;
    grid.R = R;
    grid.disp.resize(R * R, 2);

    const detail::MarkerIndex index(markers.ref);
    std::vector<int> linear_fb(R * R, 0), idw_fb(R * R, 0), coverage(R * R, 0);

    parallel_chunks(static_cast<std::size_t>(R) * R, [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, int>> nbrs;
        for (std::size_t node = begin; node < end; ++node) {
            const Vec2 q = grid.node_pos(static_cast<int>(node));
            index.knn(q, k_eff, nbrs);
            const double dk = nbrs.back().first;
            if (dk > 0.25) coverage[node] = 1;
            const double h = std::max(1.05 * dk, 1e-12);

            Eigen::MatrixXd P(k_eff, 6);
            Eigen::VectorXd w(k_eff);
            Eigen::MatrixXd U(k_eff, 2);
            for (int i = 0; i < k_eff; ++i) {
                const int m = nbrs[i].second;
                const double xi = (markers.ref(m, 0) - q.x()) / h;
                const double eta = (markers.ref(m, 1) - q.y()) / h;
                P.row(i) << 1.0, xi, eta, xi * xi, xi * eta, eta * eta;
                w[i] = std::sqrt(detail::wendland_c2(nbrs[i].first / h));
                U.row(i) = markers.disp.row(m);
            }
            const Eigen::MatrixXd Pw = w.asDiagonal() * P;
            const Eigen::MatrixXd Uw = w.asDiagonal() * U;

            bool done = false;
            {
                Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Pw);
                if (qr.rank() == 6) {
                    const Eigen::MatrixXd coeff = qr.solve(Uw);
                    grid.disp.row(node) = coeff.row(0);  // basis is centered at q
                    done = true;
                }
            }
            if (!done) {
                Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Pw.leftCols(3));
                if (qr.rank() == 3) {
                    const Eigen::MatrixXd coeff = qr.solve(Uw);
                    grid.disp.row(node) = coeff.row(0);
                    linear_fb[node] = 1;
                    done = true;
                }
            }
            if (!done) {
                // inverse-distance weighting over the same neighborhood
                double wsum = 0.0;
                Eigen::RowVector2d acc = Eigen::RowVector2d::Zero();
                for (int i = 0; i < k_eff; ++i) {
                    const double wi = 1.0 / (nbrs[i].first * nbrs[i].first + 1e-14);
                    wsum += wi;
                    acc += wi * U.row(i);
                }
                grid.disp.row(node) = acc / wsum;
                idw_fb[node] = 1;
            }
        }
    });

    for (int i = 0; i < R * R; ++i) {
        grid.mls_linear_fallbacks += linear_fb[i];
        grid.mls_idw_fallbacks += idw_fb[i];
        grid.coverage_warnings += coverage[i];
    }
    return grid;
}

// Per-node displacement gradient: central differences on interior nodes,
// one-sided second-order stencils at the edges.
inline void displacement_gradient(GridField& grid) {
    const int R = grid.R;
    const double h = grid.spacing();
    grid.grad_u.assign(grid.num_nodes(), Mat2::Zero());

    const auto u = [&](int row, int col, int comp) { return grid.disp(row * R + col, comp); };
    const auto d1 = [&](int fixed, int var, bool along_x, int comp) {
        // derivative of u_comp along the varying index at position var
        const auto val = [&](int t) { return along_x ? u(fixed, t, comp) : u(t, fixed, comp); };
        if (var == 0) return (-3.0 * val(0) + 4.0 * val(1) - val(2)) / (2.0 * h);
        if (var == R - 1) return (3.0 * val(R - 1) - 4.0 * val(R - 2) + val(R - 3)) / (2.0 * h);
        return (val(var + 1) - val(var - 1)) / (2.0 * h);
    };

    for (int row = 0; row < R; ++row)
        for (int col = 0; col < R; ++col) {
            Mat2& g = grid.grad_u[row * R + col];
            for (int comp = 0; comp < 2; ++comp) {
                g(comp, 0) = d1(row, col, true, comp);   // d/dx
                g(comp, 1) = d1(col, row, false, comp);  // d/dy
            }
        }
}

// F = grad u + I, C = F^T F, E = (C - I)/2. Nodes with det F <= 0 are flagged
// invalid and imputed from the average F of their valid 4-neighbors; more than
// 1% invalid nodes is a hard error.
inline void strain_tensors(GridField& grid) {
    if (grid.grad_u.empty()) displacement_gradient(grid);
    const int n = grid.num_nodes();
    const int R = grid.R;
    grid.F.assign(n, Mat2::Zero());
    grid.C.assign(n, Mat2::Zero());
    grid.E.assign(n, Mat2::Zero());
    grid.valid.assign(n, 1);

    int invalid = 0;
    for (int i = 0; i < n; ++i) {
        grid.F[i] = grid.grad_u[i] + Mat2::Identity();
        if (grid.F[i].determinant() <= 0.0) {
            grid.valid[i] = 0;
            ++invalid;
        }
    }
    if (invalid > 0) {
        if (invalid > n / 100)
            throw ValidationError("strain_tensors: more than 1% of grid nodes have det F <= 0 (" +
                                  std::to_string(invalid) + " of " + std::to_string(n) + ")");
        for (int i = 0; i < n; ++i) {
            if (grid.valid[i]) continue;
            const int row = i / R, col = i % R;
            Mat2 acc = Mat2::Zero();
            int count = 0;
            const std::array<std::pair<int, int>, 4> nbrs{{{row - 1, col}, {row + 1, col}, {row, col - 1}, {row, col + 1}}};
            for (const auto& [r, c] : nbrs) {
                if (r < 0 || c < 0 || r >= R || c >= R) continue;
                const int j = r * R + c;
                if (grid.valid[j]) {
                    acc += grid.F[j];
                    ++count;
                }
            }
            if (count > 0) {
                grid.F[i] = acc / count;
                ++grid.imputed_nodes;
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        grid.C[i] = grid.F[i].transpose() * grid.F[i];
        grid.E[i] = 0.5 * (grid.C[i] - Mat2::Identity());
    }
}

// I1 = tr C; I2 = ((tr C)^2 - tr(C^2))/2, which equals det C for 2x2 tensors.
inline void invariants(GridField& grid) {
    if (grid.C.empty()) strain_tensors(grid);
    const int n = grid.num_nodes();
    grid.I1.resize(n);
    grid.I2.resize(n);
    for (int i = 0; i < n; ++i) {
        const Mat2& C = grid.C[i];
        const double tr = C.trace();
        grid.I1[i] = tr;
        grid.I2[i] = 0.5 * (tr * tr - (C * C).trace());
    }
}

inline void compute_kinematics(GridField& grid) {
    displacement_gradient(grid);
    strain_tensors(grid);
    invariants(grid);
}

// ---------------------------------------------------------------------------

enum class FeatureKind { displacement, deformation_gradient, green_lagrange, invariants };

inline std::string to_string(FeatureKind k) {
    switch (k) {
        case FeatureKind::displacement: return "displacement";
        case FeatureKind::deformation_gradient: return "deformation_gradient";
        case FeatureKind::green_lagrange: return "green_lagrange";
        case FeatureKind::invariants: return "invariants";
    }
    return "?";
}

inline FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "displacement" || s == "u") return FeatureKind::displacement;
    if (s == "deformation_gradient" || s == "F") return FeatureKind::deformation_gradient;
    if (s == "green_lagrange" || s == "E") return FeatureKind::green_lagrange;
    if (s == "invariants" || s == "I") return FeatureKind::invariants;
    throw ValidationError("unknown feature kind: " + s);
}

// Invariants and strains keep their physical scale by default; displacement
// and F components are z-scored since their magnitudes are dominated by the
// applied load.
inline bool default_standardize(FeatureKind k) {
    return k == FeatureKind::displacement || k == FeatureKind::deformation_gradient;
}

inline std::vector<std::string> feature_column_names(FeatureKind k) {
    switch (k) {
        case FeatureKind::displacement: return {"u_x", "u_y"};
        case FeatureKind::deformation_gradient: return {"F11", "F12", "F21", "F22"};
        case FeatureKind::green_lagrange: return {"E11", "E22", "E12"};
        case FeatureKind::invariants: return {"I1", "I2"};
    }
    return {};
}

// n x d feature matrix over grid nodes, rows in row-major grid order.
struct FeatureMatrix {
    Eigen::MatrixXd values;
    FeatureKind kind = FeatureKind::invariants;
    GridShape grid{};
    bool standardized = false;
    std::vector<double> col_mean, col_std;
    std::vector<std::uint8_t> zero_variance;

    int rows() const { return static_cast<int>(values.rows()); }
    int cols() const { return static_cast<int>(values.cols()); }
};

inline void standardize_columns(FeatureMatrix& f) {
    const int n = f.rows(), d = f.cols();
    f.col_mean.assign(d, 0.0);
    f.col_std.assign(d, 0.0);
    f.zero_variance.assign(d, 0);
    for (int c = 0; c < d; ++c) {
        const double mean = f.values.col(c).mean();
        const double var = (f.values.col(c).array() - mean).square().sum() / n;
        const double sd = std::sqrt(var);
        f.col_mean[c] = mean;
        f.col_std[c] = sd;
        if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
            f.zero_variance[c] = 1;
            f.values.col(c).setZero();
        } else {
            f.values.col(c) = (f.values.col(c).array() - mean) / sd;
        }
    }
    f.standardized = true;
}

inline FeatureMatrix assemble_features(const GridField& grid, FeatureKind kind,
                                       std::optional<bool> standardize = std::nullopt) {
    FeatureMatrix f;
    f.kind = kind;
    f.grid = grid.shape();
    const int n = grid.num_nodes();
    switch (kind) {
        case FeatureKind::displacement:
            f.values = grid.disp;
            break;
        case FeatureKind::deformation_gradient: {
            if (grid.F.empty()) throw ValidationError("assemble_features: tensors not computed");
            f.values.resize(n, 4);
            for (int i = 0; i < n; ++i)
                f.values.row(i) << grid.F[i](0, 0), grid.F[i](0, 1), grid.F[i](1, 0), grid.F[i](1, 1);
            break;
        }
        case FeatureKind::green_lagrange: {
            if (grid.E.empty()) throw ValidationError("assemble_features: tensors not computed");
            f.values.resize(n, 3);
            for (int i = 0; i < n; ++i)
                f.values.row(i) << grid.E[i](0, 0), grid.E[i](1, 1), grid.E[i](0, 1);
            break;
        }
        case FeatureKind::invariants: {
            if (grid.I1.size() != n) throw ValidationError("assemble_features: invariants not computed");
            f.values.resize(n, 2);
            f.values.col(0) = grid.I1;
            f.values.col(1) = grid.I2;
            break;
        }
    }
    if (!f.values.allFinite()) throw ValidationError("assemble_features: non-finite feature values");
    if (standardize.value_or(default_standardize(kind))) standardize_columns(f);
    return f;
}

}  // namespace kinecluster
