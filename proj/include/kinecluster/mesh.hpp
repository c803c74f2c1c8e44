#pragma once

#include <array>
#include <cmath>

#include "kinecluster/common.hpp"

namespace kinecluster {

// Structured triangulation of the unit square: cells x cells quads, each split
// into two linear triangles with the diagonal direction alternating per cell
// parity (keeps the mesh symmetric under the standard load cases).
//
// Node (i, j) sits at (i*h, j*h) with h = 1/cells; node index = j*nps + i.
// Cell (ci, cj) owns elements 2*c and 2*c+1 with c = cj*cells + ci.
class StructuredTriMesh {
public:
    explicit StructuredTriMesh(int cells) : cells_(cells) {
        if (cells < 1) throw ValidationError("mesh: cells per side must be >= 1");
    }

    int cells() const { return cells_; }
    int nodes_per_side() const { return cells_ + 1; }
    int num_nodes() const { return nodes_per_side() * nodes_per_side(); }
    int num_elements() const { return 2 * cells_ * cells_; }
    double spacing() const { return 1.0 / cells_; }
    double element_area() const { return 0.5 * spacing() * spacing(); }

    int node_index(int i, int j) const { return j * nodes_per_side() + i; }

    Vec2 node(int idx) const {
        const int nps = nodes_per_side();
        return Vec2((idx % nps) * spacing(), (idx / nps) * spacing());
    }

    bool is_boundary_node(int idx) const {
        const int nps = nodes_per_side();
        const int i = idx % nps, j = idx / nps;
        return i == 0 || j == 0 || i == cells_ || j == cells_;
    }

    std::array<int, 3> element_nodes(int e) const {
        const int c = e / 2;
        const bool second = e % 2 != 0;
        const int ci = c % cells_, cj = c / cells_;
        const int n00 = node_index(ci, cj), n10 = node_index(ci + 1, cj);
        const int n01 = node_index(ci, cj + 1), n11 = node_index(ci + 1, cj + 1);
        if ((ci + cj) % 2 == 0) {
            // diagonal lower-left to upper-right
            return second ? std::array<int, 3>{n00, n11, n01} : std::array<int, 3>{n00, n10, n11};
        }
        // diagonal lower-right to upper-left
        return second ? std::array<int, 3>{n10, n11, n01} : std::array<int, 3>{n00, n10, n01};
    }

    Vec2 centroid(int e) const {
        const auto n = element_nodes(e);
        return (node(n[0]) + node(n[1]) + node(n[2])) / 3.0;
    }

    // Constant shape-function gradients of the three linear basis functions.
    std::array<Vec2, 3> shape_gradients(int e) const {
        const auto n = element_nodes(e);
        const Vec2 x0 = node(n[0]), x1 = node(n[1]), x2 = node(n[2]);
        const double two_area = (x1.x() - x0.x()) * (x2.y() - x0.y()) -
                                (x2.x() - x0.x()) * (x1.y() - x0.y());
        return {Vec2(x1.y() - x2.y(), x2.x() - x1.x()) / two_area,
                Vec2(x2.y() - x0.y(), x0.x() - x2.x()) / two_area,
                Vec2(x0.y() - x1.y(), x1.x() - x0.x()) / two_area};
    }

    // Element containing p (clamped to the unit square) and the barycentric
    // coordinates of p with respect to that element's nodes.
    std::pair<int, Vec3> locate(const Vec2& p) const {
        const double px = std::clamp(p.x(), 0.0, 1.0);
        const double py = std::clamp(p.y(), 0.0, 1.0);
        const int ci = std::min(static_cast<int>(px * cells_), cells_ - 1);
        const int cj = std::min(static_cast<int>(py * cells_), cells_ - 1);
        const double lx = px * cells_ - ci;
        const double ly = py * cells_ - cj;
        const int c = cj * cells_ + ci;
        int e;
        if ((ci + cj) % 2 == 0)
            e = 2 * c + (ly > lx ? 1 : 0);
        else
            e = 2 * c + (lx + ly > 1.0 ? 1 : 0);
        const auto n = element_nodes(e);
        const Vec2 a = node(n[0]), b = node(n[1]), cc = node(n[2]);
        const double det = (b.x() - a.x()) * (cc.y() - a.y()) - (cc.x() - a.x()) * (b.y() - a.y());
        const double w1 = ((px - a.x()) * (cc.y() - a.y()) - (cc.x() - a.x()) * (py - a.y())) / det;
        const double w2 = ((b.x() - a.x()) * (py - a.y()) - (px - a.x()) * (b.y() - a.y())) / det;
        return {e, Vec3(1.0 - w1 - w2, w1, w2)};
    }

private:
    int cells_;
};

}  // namespace kinecluster
