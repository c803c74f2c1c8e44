#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "kinecluster/boundary.hpp"
#include "kinecluster/domain.hpp"
#include "kinecluster/material.hpp"

namespace kinecluster {

struct SolverOptions {
    int max_newton_iters = 15;
    double rel_tol = 1e-8;            // residual reduction per load step
    double abs_floor = 1e-14;         // residual below this is converged outright
    int max_line_search_halvings = 15;
    int max_load_steps = 80;          // adaptive doubling cap
};

struct SolverDiagnostics {
    int load_steps = 0;
    int newton_iterations = 0;
    int line_search_backtracks = 0;
    int restarts = 0;
    double final_residual = 0.0;
    double final_relative_residual = 0.0;
    bool converged = false;
    // total energy at accepted iterates, one trace per load step
    std::vector<std::vector<double>> step_energy_traces;
};

struct DisplacementField {
    StructuredTriMesh mesh{1};
    Eigen::MatrixX2d u;  // per-node displacement
    SolverDiagnostics diagnostics;

    Vec2 displacement_at(const Vec2& x) const {
        const auto [e, w] = mesh.locate(x);
        const auto n = mesh.element_nodes(e);
        Vec2 out = Vec2::Zero();
        for (int a = 0; a < 3; ++a) out += w[a] * u.row(n[a]).transpose();
        return out;
    }
};

namespace fem {

// Per-element data that stays fixed over a solve.
struct ElementCache {
    std::array<int, 3> nodes;
    std::array<Vec2, 3> grad;  // shape-function gradients
    double area = 0.0;
    LameParams lame;
};

inline std::vector<ElementCache> build_element_cache(const MaterialDomain& domain) {
    const auto& mesh = domain.mesh();
    std::vector<ElementCache> cache(mesh.num_elements());
    for (int e = 0; e < mesh.num_elements(); ++e) {
        cache[e].nodes = mesh.element_nodes(e);
        cache[e].grad = mesh.shape_gradients(e);
        cache[e].area = mesh.element_area();
        cache[e].lame = domain.element_lame(e);
    }
    return cache;
}

inline Mat2 deformation_gradient(const ElementCache& ec, const Eigen::VectorXd& u) {
    Mat2 F = Mat2::Identity();
    for (int a = 0; a < 3; ++a) {
        const int n = ec.nodes[a];
        F(0, 0) += u[2 * n] * ec.grad[a].x();
        F(0, 1) += u[2 * n] * ec.grad[a].y();
        F(1, 0) += u[2 * n + 1] * ec.grad[a].x();
        F(1, 1) += u[2 * n + 1] * ec.grad[a].y();
    }
    return F;
}

// Total strain energy; empty when any element is inverted. Fixed summation
// order keeps results bitwise reproducible.
inline std::optional<double> total_energy(const std::vector<ElementCache>& cache,
                                          const Eigen::VectorXd& u) {
    double total = 0.0;
    for (const auto& ec : cache) {
        const Mat2 F = deformation_gradient(ec, u);
        const auto psi = neo_hookean_energy_checked(F, ec.lame.mu, ec.lame.lambda);
        if (!psi) return std::nullopt;
        total += ec.area * *psi;
    }
    return total;
}

// Gradient of the total energy with respect to every displacement dof.
inline Eigen::VectorXd assemble_gradient(const std::vector<ElementCache>& cache,
                                         const Eigen::VectorXd& u) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(u.size());
    for (const auto& ec : cache) {
        const Mat2 F = deformation_gradient(ec, u);
        const Mat2 P = neo_hookean_pk1(F, ec.lame.mu, ec.lame.lambda);
        for (int a = 0; a < 3; ++a) {
            const int n = ec.nodes[a];
            g[2 * n] += ec.area * (P(0, 0) * ec.grad[a].x() + P(0, 1) * ec.grad[a].y());
            g[2 * n + 1] += ec.area * (P(1, 0) * ec.grad[a].x() + P(1, 1) * ec.grad[a].y());
        }
    }
    return g;
}

inline void assemble_tangent_triplets(const std::vector<ElementCache>& cache,
                                      const Eigen::VectorXd& u, const std::vector<int>& free_index,
                                      std::vector<Eigen::Triplet<double>>& triplets) {
    triplets.clear();
    for (const auto& ec : cache) {
        const Mat2 F = deformation_gradient(ec, u);
        const Eigen::Matrix4d A = neo_hookean_tangent(F, ec.lame.mu, ec.lame.lambda);
        for (int a = 0; a < 3; ++a)
            for (int i = 0; i < 2; ++i) {
                const int row = free_index[2 * ec.nodes[a] + i];
                if (row < 0) continue;
                for (int b = 0; b < 3; ++b)
                    for (int k = 0; k < 2; ++k) {
                        const int col = free_index[2 * ec.nodes[b] + k];
                        if (col < 0) continue;
                        double v = 0.0;
                        for (int J = 0; J < 2; ++J)
                            for (int L = 0; L < 2; ++L)
                                v += A(2 * i + J, 2 * k + L) * ec.grad[a][J] * ec.grad[b][L];
                        triplets.emplace_back(row, col, ec.area * v);
                    }
            }
    }
}

}  // namespace fem

// Convenience wrappers over the element-level assembly (also used by tests).
inline std::optional<double> total_energy(const MaterialDomain& domain, const Eigen::MatrixX2d& u) {
    Eigen::VectorXd uv(2 * u.rows());
    for (Eigen::Index n = 0; n < u.rows(); ++n) {
        uv[2 * n] = u(n, 0);
        uv[2 * n + 1] = u(n, 1);
    }
    return fem::total_energy(fem::build_element_cache(domain), uv);
}

inline Eigen::VectorXd assemble_gradient(const MaterialDomain& domain, const Eigen::MatrixX2d& u) {
    Eigen::VectorXd uv(2 * u.rows());
    for (Eigen::Index n = 0; n < u.rows(); ++n) {
        uv[2 * n] = u(n, 0);
        uv[2 * n + 1] = u(n, 1);
    }
    return fem::assemble_gradient(fem::build_element_cache(domain), uv);
}

inline Mat2 element_deformation_gradient(const MaterialDomain& domain, const Eigen::MatrixX2d& u,
                                         int e) {
    fem::ElementCache ec;
    ec.nodes = domain.mesh().element_nodes(e);
    ec.grad = domain.mesh().shape_gradients(e);
    Eigen::VectorXd uv(2 * u.rows());
    for (Eigen::Index n = 0; n < u.rows(); ++n) {
        uv[2 * n] = u(n, 0);
        uv[2 * n + 1] = u(n, 1);
    }
    return fem::deformation_gradient(ec, uv);
}

namespace detail {

struct NewtonAttemptResult {
    Eigen::VectorXd u;
    SolverDiagnostics diag;
};

inline NewtonAttemptResult newton_solve(const std::vector<fem::ElementCache>& cache, int num_dofs,
                                        const std::vector<DofConstraint>& constraints, int steps,
                                        const SolverOptions& opts) {
    std::vector<int> free_index(num_dofs, 0);
    for (const auto& c : constraints) free_index[c.dof] = -1;
    int n_free = 0;
    for (int d = 0; d < num_dofs; ++d)
        if (free_index[d] == 0) free_index[d] = n_free++;

    NewtonAttemptResult res;
    res.u = Eigen::VectorXd::Zero(num_dofs);
    res.diag.load_steps = steps;

    Eigen::SparseMatrix<double> K(n_free, n_free);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    std::vector<Eigen::Triplet<double>> triplets;
    bool pattern_analyzed = false;

    const auto free_norm = [&](const Eigen::VectorXd& g) {
        double s = 0.0;
        for (int d = 0; d < num_dofs; ++d)
            if (free_index[d] >= 0) s += g[d] * g[d];
        return std::sqrt(s);
    };

    for (int step = 1; step <= steps; ++step) {
        const double t_load = static_cast<double>(step) / steps;
        for (const auto& c : constraints) res.u[c.dof] = t_load * c.value;

        auto energy_opt = fem::total_energy(cache, res.u);
        if (!energy_opt) throw SolverError("solver: element inversion at load step start");
        double energy = *energy_opt;

        std::vector<double> trace{energy};
        Eigen::VectorXd g = fem::assemble_gradient(cache, res.u);
        double r = free_norm(g);
        const double r0 = r;
        const double target = std::max(opts.rel_tol * r0, opts.abs_floor);

        int iter = 0;
        while (r > target && n_free > 0) {
            if (iter++ >= opts.max_newton_iters)
                throw SolverError("solver: Newton did not converge in " +
                                  std::to_string(opts.max_newton_iters) + " iterations (residual " +
                                  std::to_string(r) + ")");
            ++res.diag.newton_iterations;

            fem::assemble_tangent_triplets(cache, res.u, free_index, triplets);
            K.setFromTriplets(triplets.begin(), triplets.end());
            if (!pattern_analyzed) {
                ldlt.analyzePattern(K);
                pattern_analyzed = true;
            }
            ldlt.factorize(K);
            if (ldlt.info() != Eigen::Success)
                throw SolverError("solver: tangent factorization failed");

            Eigen::VectorXd g_free(n_free);
            for (int d = 0; d < num_dofs; ++d)
                if (free_index[d] >= 0) g_free[free_index[d]] = g[d];
            const Eigen::VectorXd du_free = ldlt.solve(-g_free);
            const double slope = g_free.dot(du_free);

            // backtracking halving line search on the total energy
            double alpha = 1.0;
            bool accepted = false;
            Eigen::VectorXd u_try = res.u;
            for (int ls = 0; ls <= opts.max_line_search_halvings; ++ls) {
                u_try = res.u;
                for (int d = 0; d < num_dofs; ++d)
                    if (free_index[d] >= 0) u_try[d] += alpha * du_free[free_index[d]];
                const auto e_try = fem::total_energy(cache, u_try);
                if (e_try) {
                    const double bound = energy + 1e-4 * alpha * std::min(slope, 0.0) +
                                         1e-12 * std::max(1.0, std::abs(energy));
                    if (*e_try <= bound) {
                        energy = *e_try;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
                ++res.diag.line_search_backtracks;
            }
            if (!accepted) throw SolverError("solver: line search failed to find a decrease");

            res.u = u_try;
            trace.push_back(energy);
            g = fem::assemble_gradient(cache, res.u);
            r = free_norm(g);
        }

        res.diag.step_energy_traces.push_back(std::move(trace));
        res.diag.final_residual = r;
        res.diag.final_relative_residual = (r0 > 0.0) ? r / r0 : 0.0;
    }
    res.diag.converged = true;
    return res;
}

}  // namespace detail

// Total-potential-energy minimizer under incremental displacement loading.
// Doubles the load-step count on failure, up to opts.max_load_steps.
inline DisplacementField solve_forward(const MaterialDomain& domain, const BoundaryCondition& bc,
                                       const SolverOptions& opts = {}) {
    const auto& mesh = domain.mesh();
    const auto constraints = boundary_constraints(mesh, bc);
    if (constraints.size() < 3)
        throw SolverError("solver: boundary condition does not remove rigid modes");

    const auto cache = fem::build_element_cache(domain);
    int steps = std::max(1, bc.load_steps);
    int restarts = 0;
    for (;;) {
        try {
            auto res = detail::newton_solve(cache, 2 * mesh.num_nodes(), constraints, steps, opts);
            res.diag.restarts = restarts;
            DisplacementField field;
            field.mesh = mesh;
            field.u.resize(mesh.num_nodes(), 2);
            for (int n = 0; n < mesh.num_nodes(); ++n) {
                field.u(n, 0) = res.u[2 * n];
                field.u(n, 1) = res.u[2 * n + 1];
            }
            field.diagnostics = res.diag;
            return field;
        } catch (const SolverError&) {
            if (steps >= opts.max_load_steps) throw;
            steps = std::min(2 * steps, opts.max_load_steps);
            ++restarts;
        }
    }
}

}  // namespace kinecluster
