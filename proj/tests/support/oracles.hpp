#pragma once

// Independent oracles for the test suites. Everything here deliberately takes
// a different route from the library implementation it checks: pair counting
// instead of contingency algebra, union-find flood fill instead of BFS, a
// projected-gradient QP instead of SMO, finite differences instead of
// analytic derivatives.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

// ARI by explicit pair counting over all C(n,2) pairs.
inline double brute_force_ari(const std::vector<int>& x, const std::vector<int>& y) {
    const int n = static_cast<int>(x.size());
    double both = 0, in_x = 0, in_y = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const bool sx = x[i] == x[j];
            const bool sy = y[i] == y[j];
            if (sx) ++in_x;
            if (sy) ++in_y;
            if (sx && sy) ++both;
        }
    const double pairs = 0.5 * n * (n - 1);
    if (pairs == 0) return 1.0;
    const double expected = in_x * in_y / pairs;
    const double maximum = 0.5 * (in_x + in_y);
    if (maximum == expected) return 1.0;
    return (both - expected) / (maximum - expected);
}

// Connected components on a label raster via union-find (scan + merge).
inline int flood_fill_component_count(const std::vector<int>& labels, int rows, int cols,
                                      bool eight = false) {
    std::vector<int> parent(labels.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    const auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int i = r * cols + c;
            if (c + 1 < cols && labels[i] == labels[i + 1]) unite(i, i + 1);
            if (r + 1 < rows && labels[i] == labels[i + cols]) unite(i, i + cols);
            if (eight && r + 1 < rows && c + 1 < cols && labels[i] == labels[i + cols + 1])
                unite(i, i + cols + 1);
            if (eight && r + 1 < rows && c > 0 && labels[i] == labels[i + cols - 1])
                unite(i, i + cols - 1);
        }
    int count = 0;
    for (std::size_t i = 0; i < parent.size(); ++i)
        if (find(static_cast<int>(i)) == static_cast<int>(i)) ++count;
    return count;
}

// Exact Euclidean projection onto {0 <= a_i <= ub, sum a = 1} (continuous
// quadratic knapsack) by bisection on the shift.
inline Eigen::VectorXd project_box_simplex(const Eigen::VectorXd& v, double ub) {
    const auto clipped_sum = [&](double tau) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) s += std::clamp(v[i] - tau, 0.0, ub);
        return s;
    };
    double lo = v.minCoeff() - ub - 1.0, hi = v.maxCoeff() + 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (clipped_sum(mid) > 1.0 ? lo : hi) = mid;
    }
    const double tau = 0.5 * (lo + hi);
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = std::clamp(v[i] - tau, 0.0, ub);
    return out;
}

// min 1/2 a'Qa over the box-simplex via projected gradient; returns the
// optimal objective. Independent of any SMO machinery.
inline double box_simplex_qp_objective(const Eigen::MatrixXd& Q, double ub, int iters = 200000) {
    const Eigen::Index n = Q.rows();
    // Lipschitz constant of the gradient via power iteration
    Eigen::VectorXd z = Eigen::VectorXd::Ones(n).normalized();
    for (int i = 0; i < 100; ++i) z = (Q * z).normalized();
    const double L = std::max(z.dot(Q * z), 1e-12);
    Eigen::VectorXd a = project_box_simplex(Eigen::VectorXd::Constant(n, 1.0 / n), ub);
    for (int it = 0; it < iters; ++it) a = project_box_simplex(a - (Q * a) / L, ub);
    return 0.5 * a.dot(Q * a);
}

// Central-difference gradient of a scalar function of a flat vector.
inline Eigen::VectorXd central_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double h = 1e-6) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x;
    for (Eigen::Index d = 0; d < x.size(); ++d) {
        xp[d] = x[d] + h;
        const double fp = f(xp);
        xp[d] = x[d] - h;
        const double fm = f(xp);
        xp[d] = x[d];
        g[d] = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace oracles
