#pragma once

#include <string>

#include "kinecluster/rng.hpp"
#include "kinecluster/solver.hpp"

namespace kinecluster {

// Scattered material points with reference positions and displacements; the
// DIC-like raw input to the feature pipeline.
struct MarkerSet {
    Eigen::MatrixX2d ref;   // reference positions in [0,1]^2
    Eigen::MatrixX2d disp;  // displacement at each marker
    std::string provenance = "simulated";

    int size() const { return static_cast<int>(ref.rows()); }

    void validate() const {
        if (ref.rows() != disp.rows()) throw ValidationError("markers: position/displacement count mismatch");
        if (ref.rows() < 4) throw ValidationError("markers: need at least 4 markers");
        if (!ref.allFinite() || !disp.allFinite()) throw ValidationError("markers: non-finite values");
        if (ref.minCoeff() < 0.0 || ref.maxCoeff() > 1.0)
            throw ValidationError("markers: reference positions must lie in the unit square");
    }
};

// Uniformly sampled reference positions; displacements by FE shape-function
// interpolation of the solved field.
inline MarkerSet sample_markers(const DisplacementField& field, int n, std::uint64_t seed) {
    if (n < 4) throw ValidationError("sample_markers: n must be >= 4");
    MarkerSet markers;
    markers.ref.resize(n, 2);
    markers.disp.resize(n, 2);
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        const Vec2 x(rng.uniform(), rng.uniform());
        markers.ref.row(i) = x.transpose();
        markers.disp.row(i) = field.displacement_at(x).transpose();
    }
    return markers;
}

}  // namespace kinecluster
