#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "kinecluster/common.hpp"
#include "kinecluster/mesh.hpp"
#include "kinecluster/rng.hpp"

namespace kinecluster {

enum class BcKind {
    equibiaxial,
    uniaxial_x,
    uniaxial_y,
    shear,
    confined_compression,
    biaxial,
    random,
    affine,  // u = (A - I) X on the whole boundary; used by patch tests
};

inline std::string to_string(BcKind k) {
    switch (k) {
        case BcKind::equibiaxial: return "equibiaxial";
        case BcKind::uniaxial_x: return "uniaxial_x";
        case BcKind::uniaxial_y: return "uniaxial_y";
        case BcKind::shear: return "shear";
        case BcKind::confined_compression: return "confined_compression";
        case BcKind::biaxial: return "biaxial";
        case BcKind::random: return "random";
        case BcKind::affine: return "affine";
    }
    return "?";
}

inline BcKind bc_kind_from_string(const std::string& s) {
    if (s == "equibiaxial") return BcKind::equibiaxial;
    if (s == "uniaxial_x" || s == "uniaxial-x") return BcKind::uniaxial_x;
    if (s == "uniaxial_y" || s == "uniaxial-y") return BcKind::uniaxial_y;
    if (s == "shear") return BcKind::shear;
    if (s == "confined_compression" || s == "confined-compression") return BcKind::confined_compression;
    if (s == "biaxial") return BcKind::biaxial;
    if (s == "random") return BcKind::random;
    throw ValidationError("unknown boundary condition kind: " + s);
}

// Coefficients of the random edge profile
//   y(x) = c0 + c1 x + c2 x^2 + c3 x^3 + c4 x^4 + c5 sin(c6 (x - c7)).
struct RandomEdgeCoeffs {
    std::array<double, 8> c{};

    double evaluate(double x) const {
        return c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * c[4]))) +
               c[5] * std::sin(c[6] * (x - c[7]));
    }
};

// Edge order used everywhere a random draw or iteration happens.
enum class Edge { bottom = 0, right = 1, top = 2, left = 3 };

struct BoundaryCondition {
    BcKind kind = BcKind::equibiaxial;
    double delta = 0.3;         // magnitude for the named kinds
    double dx = 0.0, dy = 0.0;  // biaxial stretch offsets
    std::uint64_t seed = 0;     // random kind
    std::array<RandomEdgeCoeffs, 4> edge_coeffs{};  // bottom, right, top, left
    Mat2 affine_map = Mat2::Identity();
    int load_steps = 10;
};

inline RandomEdgeCoeffs draw_random_edge_coeffs(Rng& rng) {
    RandomEdgeCoeffs e;
    e.c[0] = rng.uniform(0.0, 0.2);
    for (int i = 1; i <= 4; ++i) e.c[i] = rng.uniform(-0.1, 0.1);
    e.c[5] = rng.uniform(0.0, M_PI / 32.0);
    e.c[6] = rng.uniform(0.0, 4.0 * M_PI);
    e.c[7] = rng.uniform(0.0, 2.0 * M_PI);
    return e;
}

inline BoundaryCondition make_boundary_condition(BcKind kind, double magnitude,
                                                 std::optional<std::uint64_t> seed = {}) {
    BoundaryCondition bc;
    bc.kind = kind;
    switch (kind) {
        case BcKind::random: {
            if (!seed) throw ValidationError("random boundary condition requires a seed");
            bc.seed = *seed;
            Rng rng(*seed);
            for (auto& e : bc.edge_coeffs) e = draw_random_edge_coeffs(rng);
            break;
        }
        case BcKind::biaxial:
            throw ValidationError("use make_biaxial(dx, dy) for the biaxial kind");
        case BcKind::affine:
            throw ValidationError("use make_affine(A) for the affine kind");
        default:
            if (magnitude <= 0.0)
                throw ValidationError("standard boundary condition requires magnitude > 0");
            bc.delta = magnitude;
    }
    return bc;
}

inline BoundaryCondition make_biaxial(double dx, double dy) {
    BoundaryCondition bc;
    bc.kind = BcKind::biaxial;
    if (!std::isfinite(dx) || !std::isfinite(dy))
        throw ValidationError("biaxial displacements must be finite");
    bc.dx = dx;
    bc.dy = dy;
    bc.delta = std::max(std::abs(dx), std::abs(dy));
    return bc;
}

inline BoundaryCondition make_affine(const Mat2& A) {
    BoundaryCondition bc;
    bc.kind = BcKind::affine;
    bc.affine_map = A;
    bc.delta = (A - Mat2::Identity()).norm();
    return bc;
}

// A Dirichlet constraint on one displacement dof; `value` is the prescribed
// displacement at full load (solver scales it by the load fraction).
struct DofConstraint {
    int dof = 0;  // 2*node + component
    double value = 0.0;
};

namespace detail {

class ConstraintBuilder {
public:
    explicit ConstraintBuilder(int num_nodes) : set_(2 * num_nodes, 0), value_(2 * num_nodes, 0.0) {}

    void set(int node, int comp, double value) {
        set_[2 * node + comp] = 1;
        value_[2 * node + comp] = value;
    }

    void set_if_unset(int node, int comp, double value) {
        if (!set_[2 * node + comp]) set(node, comp, value);
    }

    std::vector<DofConstraint> take() const {
        std::vector<DofConstraint> out;
        for (std::size_t d = 0; d < set_.size(); ++d)
            if (set_[d]) out.push_back({static_cast<int>(d), value_[d]});
        return out;
    }

private:
    std::vector<char> set_;
    std::vector<double> value_;
};

template <typename Fn>
void for_edge_nodes(const StructuredTriMesh& mesh, Edge edge, Fn&& fn) {
    // fn(node index, arclength parameter x in [0,1])
    const int nps = mesh.nodes_per_side();
    const double h = mesh.spacing();
    for (int t = 0; t < nps; ++t) {
        switch (edge) {
            case Edge::bottom: fn(mesh.node_index(t, 0), t * h); break;
            case Edge::top: fn(mesh.node_index(t, nps - 1), t * h); break;
            case Edge::left: fn(mesh.node_index(0, t), t * h); break;
            case Edge::right: fn(mesh.node_index(nps - 1, t), t * h); break;
        }
    }
}

}  // namespace detail

// Expands a boundary condition to per-dof prescribed displacements at full
// load. BCs that would otherwise leave a rigid translation mode (the uniaxial
// grips in this 2D setting clamp both components, so only zero-measure cases
// remain) are already well-posed by construction.
inline std::vector<DofConstraint> boundary_constraints(const StructuredTriMesh& mesh,
                                                       const BoundaryCondition& bc) {
    detail::ConstraintBuilder cb(mesh.num_nodes());
    const double d = bc.delta;
    const Vec2 center(0.5, 0.5);

    const auto clamp_all_edges = [&](auto&& displacement) {
        for (int n = 0; n < mesh.num_nodes(); ++n) {
            if (!mesh.is_boundary_node(n)) continue;
            const Vec2 u = displacement(mesh.node(n));
            cb.set(n, 0, u.x());
            cb.set(n, 1, u.y());
        }
    };

    switch (bc.kind) {
        case BcKind::equibiaxial:
            clamp_all_edges([&](const Vec2& x) { return Vec2(d * (x - center)); });
            break;
        case BcKind::biaxial:
            clamp_all_edges([&](const Vec2& x) {
                return Vec2(bc.dx * (x.x() - center.x()), bc.dy * (x.y() - center.y()));
            });
            break;
        case BcKind::affine:
            clamp_all_edges([&](const Vec2& x) { return Vec2((bc.affine_map - Mat2::Identity()) * x); });
            break;
        case BcKind::uniaxial_x:
            detail::for_edge_nodes(mesh, Edge::left, [&](int n, double) {
                cb.set(n, 0, -0.5 * d);
                cb.set(n, 1, 0.0);
            });
            detail::for_edge_nodes(mesh, Edge::right, [&](int n, double) {
                cb.set(n, 0, 0.5 * d);
                cb.set(n, 1, 0.0);
            });
            break;
        case BcKind::uniaxial_y:
            detail::for_edge_nodes(mesh, Edge::bottom, [&](int n, double) {
                cb.set(n, 0, 0.0);
                cb.set(n, 1, -0.5 * d);
            });
            detail::for_edge_nodes(mesh, Edge::top, [&](int n, double) {
                cb.set(n, 0, 0.0);
                cb.set(n, 1, 0.5 * d);
            });
            break;
        case BcKind::shear:
            detail::for_edge_nodes(mesh, Edge::bottom, [&](int n, double) {
                cb.set(n, 0, 0.0);
                cb.set(n, 1, 0.0);
            });
            detail::for_edge_nodes(mesh, Edge::top, [&](int n, double) {
                cb.set(n, 0, d);
                cb.set(n, 1, 0.0);
            });
            break;
        case BcKind::confined_compression:
            detail::for_edge_nodes(mesh, Edge::bottom, [&](int n, double) { cb.set(n, 1, 0.0); });
            detail::for_edge_nodes(mesh, Edge::top, [&](int n, double) { cb.set(n, 1, -d); });
            detail::for_edge_nodes(mesh, Edge::left, [&](int n, double) { cb.set(n, 0, 0.0); });
            detail::for_edge_nodes(mesh, Edge::right, [&](int n, double) { cb.set(n, 0, 0.0); });
            break;
        case BcKind::random: {
            // Each edge prescribes its outward-normal displacement y(x); the
            // tangential component is left free. Pinning the tangential to 0
            // would put an O(1) jump between a corner node (whose tangential
            // component is the adjacent edge's normal value) and its neighbor,
            // inverting boundary elements at any load increment. Corner nodes
            // get both components, one from each adjacent edge.
            const auto normals = std::array<Vec2, 4>{Vec2(0, -1), Vec2(1, 0), Vec2(0, 1), Vec2(-1, 0)};
            for (int e = 0; e < 4; ++e) {
                const Vec2 n_hat = normals[e];
                const int comp = (n_hat.x() != 0.0) ? 0 : 1;
                const double sign = (comp == 0) ? n_hat.x() : n_hat.y();
                detail::for_edge_nodes(mesh, static_cast<Edge>(e), [&](int n, double x) {
                    cb.set(n, comp, sign * bc.edge_coeffs[e].evaluate(x));
                });
            }
            break;
        }
    }
    return cb.take();
}

}  // namespace kinecluster
