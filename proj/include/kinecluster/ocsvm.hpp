#pragma once

#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "kinecluster/kinematics.hpp"
#include "kinecluster/labeling.hpp"

namespace kinecluster {

struct OcsvmOptions {
    double nu = 0.2;
    std::optional<double> gamma;  // default: 1 / (d * Var(x)) over all entries
    double tol = 1e-4;            // KKT violation tolerance
    long max_iter = 0;            // 0 -> max(200000, 200 n)
    int cache_columns = 1024;
};

struct OcsvmModel {
    Eigen::VectorXd alpha;     // box [0,1], sum = nu*n
    double rho = 0.0;
    double gamma = 1.0;
    Eigen::VectorXd decision;  // per training point; < 0 is anomalous
    long iterations = 0;
    double kkt_violation = 0.0;
    double dual_objective = 0.0;  // -1/2 abar' Q abar with abar = alpha/(nu n)
};

inline double ocsvm_default_gamma(const Eigen::MatrixXd& x) {
    const double n_entries = static_cast<double>(x.size());
    const double mean = x.mean();
    const double var = (x.array() - mean).square().sum() / n_entries;
    if (!(var > 1e-300)) return 1.0;
    return 1.0 / (static_cast<double>(x.cols()) * var);
}

namespace detail {

// On-demand RBF kernel columns with a bounded FIFO cache; Q is dense in
// principle but never materialized.
class KernelCache {
public:
    KernelCache(const Eigen::MatrixXd& x, double gamma, int capacity)
        : x_(x), gamma_(gamma), capacity_(std::max(capacity, 2)) {}

    const Eigen::VectorXd& column(int j) {
        auto it = cache_.find(j);
        if (it != cache_.end()) return it->second;
        Eigen::VectorXd col = (-gamma_ * (x_.rowwise() - x_.row(j)).rowwise().squaredNorm()).array().exp();
        if (static_cast<int>(cache_.size()) >= capacity_) {
            cache_.erase(order_.front());
            order_.pop_front();
        }
        order_.push_back(j);
        return cache_.emplace(j, std::move(col)).first->second;
    }

private:
    const Eigen::MatrixXd& x_;
    double gamma_;
    int capacity_;
    std::unordered_map<int, Eigen::VectorXd> cache_;
    std::deque<int> order_;
};

}  // namespace detail

// nu-one-class SVM in the RBF feature space, solved by SMO-style maximal
// violating pair updates on the dual
//   min 1/2 a'Qa   s.t. 0 <= a_i <= 1, sum a = nu*n.
inline OcsvmModel ocsvm_fit(const Eigen::MatrixXd& x, const OcsvmOptions& opts = {}) {
    const int n = static_cast<int>(x.rows());
    if (n < 2) throw ValidationError("ocsvm: need at least 2 points");
    if (!(opts.nu > 0.0 && opts.nu < 1.0)) throw ValidationError("ocsvm: nu must lie in (0,1)");

    OcsvmModel model;
    model.gamma = opts.gamma.value_or(ocsvm_default_gamma(x));
    detail::KernelCache cache(x, model.gamma, opts.cache_columns);

    const double sum_target = opts.nu * n;
    model.alpha = Eigen::VectorXd::Zero(n);
    {
        const int full = static_cast<int>(std::floor(sum_target));
        for (int i = 0; i < full && i < n; ++i) model.alpha[i] = 1.0;
        if (full < n) model.alpha[full] = sum_target - full;
    }

    // G = Q alpha
    Eigen::VectorXd G = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j)
        if (model.alpha[j] > 0.0) G += model.alpha[j] * cache.column(j);

    const long max_iter = opts.max_iter > 0 ? opts.max_iter : std::max<long>(200000, 200L * n);
    constexpr double bound_eps = 1e-12;

    long it = 0;
    double violation = 0.0;
    for (; it < max_iter; ++it) {
        // maximal violating pair: raise the smallest gradient among movable-up
        // entries, lower the largest gradient among movable-down entries
        int i_up = -1, i_dn = -1;
        double g_up = std::numeric_limits<double>::infinity();
        double g_dn = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (model.alpha[i] < 1.0 - bound_eps && G[i] < g_up) {
                g_up = G[i];
                i_up = i;
            }
            if (model.alpha[i] > bound_eps && G[i] > g_dn) {
                g_dn = G[i];
                i_dn = i;
            }
        }
        violation = g_dn - g_up;
        if (i_up < 0 || i_dn < 0 || violation <= opts.tol) break;

        Eigen::VectorXd qi = cache.column(i_up);  // copy: the qj fetch may evict it
        const Eigen::VectorXd& qj = cache.column(i_dn);
        const double curvature = std::max(qi[i_up] + qj[i_dn] - 2.0 * qi[i_dn], 1e-12);
        double step = violation / curvature;
        step = std::min({step, 1.0 - model.alpha[i_up], model.alpha[i_dn]});
        model.alpha[i_up] += step;
        model.alpha[i_dn] -= step;
        G += step * (qi - qj);
    }
    model.iterations = it;
    model.kkt_violation = violation;

    // rho from the free support vectors (midpoint of the bound gradients if none)
    double rho_acc = 0.0;
    int free_count = 0;
    for (int i = 0; i < n; ++i) {
        if (model.alpha[i] > bound_eps && model.alpha[i] < 1.0 - bound_eps) {
            rho_acc += G[i];
            ++free_count;
        }
    }
    if (free_count > 0) {
        model.rho = rho_acc / free_count;
    } else {
        double g_up = std::numeric_limits<double>::infinity(), g_dn = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (model.alpha[i] < 1.0 - bound_eps) g_up = std::min(g_up, G[i]);
            if (model.alpha[i] > bound_eps) g_dn = std::max(g_dn, G[i]);
        }
        model.rho = 0.5 * (g_up + g_dn);
    }

    model.decision = G - Eigen::VectorXd::Constant(n, model.rho);
    model.dual_objective = -0.5 * model.alpha.dot(G) / (sum_target * sum_target);

    if (it >= max_iter && violation > opts.tol) {
        // duality gap in the Schoelkopf scaling, for the error report
        const Eigen::VectorXd abar = model.alpha / sum_target;
        const double w2 = abar.dot(G) / sum_target;
        const double rho_bar = model.rho / sum_target;
        double slack = 0.0;
        for (int i = 0; i < n; ++i) slack += std::max(0.0, rho_bar - G[i] / sum_target);
        const double primal = 0.5 * w2 - rho_bar + slack / sum_target;
        const double dual = -0.5 * w2;
        throw ClusteringError("ocsvm: SMO did not reach KKT tolerance " + std::to_string(opts.tol) +
                              " after " + std::to_string(max_iter) + " iterations (duality gap " +
                              std::to_string(primal - dual) + ")");
    }
    return model;
}

inline Labeling ocsvm(const FeatureMatrix& features, double nu = 0.2, const OcsvmOptions& base = {}) {
    OcsvmOptions opts = base;
    opts.nu = nu;
    const OcsvmModel model = ocsvm_fit(features.values, opts);
    const int n = static_cast<int>(model.decision.size());
    std::vector<int> labels(n, 0);
    for (int i = 0; i < n; ++i) labels[i] = model.decision[i] < 0.0 ? 1 : 0;
    Labeling out = Labeling::from_labels(std::move(labels), "ocsvm");
    out.num_clusters = 2;
    out.grid = features.grid;
    out.params["nu"] = std::to_string(nu);
    out.params["gamma"] = std::to_string(model.gamma);
    const auto sizes = cluster_sizes(out);
    out.empty_cluster = sizes[0] == 0 || sizes[1] == 0;
    return out;
}

}  // namespace kinecluster
