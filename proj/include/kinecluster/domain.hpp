#pragma once

#include <array>
#include <vector>

#include "kinecluster/material.hpp"
#include "kinecluster/mesh.hpp"
#include "kinecluster/pattern.hpp"

namespace kinecluster {

struct PhaseMaterial {
    double E = 1.0;
    double nu = 0.3;
    LameParams lame{};
};

inline PhaseMaterial make_phase_material(double E, double nu) {
    PhaseMaterial m;
    m.E = E;
    m.nu = nu;
    m.lame = lame_from_youngs(E, nu);
    return m;
}

// Meshed two-phase sample: element phases are assigned from the pattern at
// element centroids, while ground-truth queries go straight to the pattern so
// they do not depend on the mesh resolution.
class MaterialDomain {
public:
    static MaterialDomain build(const PatternSpec& spec, int resolution,
                                const PhaseMaterial& background, const PhaseMaterial& inclusion) {
        if (resolution < 16) throw ValidationError("build_domain: resolution must be >= 16");
        MaterialDomain d(resolution);
        d.pattern_ = Pattern::from_spec(spec);
        d.materials_ = {background, inclusion};
        d.element_phase_.resize(d.mesh_.num_elements());
        for (int e = 0; e < d.mesh_.num_elements(); ++e)
            d.element_phase_[e] = static_cast<std::uint8_t>(d.pattern_.inside(d.mesh_.centroid(e)) ? 1 : 0);
        return d;
    }

    static MaterialDomain homogeneous(int resolution, const PhaseMaterial& material) {
        MaterialDomain d(resolution);
        d.pattern_ = Pattern::from_spec(PatternSpec::circle_spec({0.5, 0.5}, 0.0));
        d.materials_ = {material, material};
        d.element_phase_.assign(d.mesh_.num_elements(), 0);
        return d;
    }

    const StructuredTriMesh& mesh() const { return mesh_; }
    const Pattern& pattern() const { return pattern_; }
    int element_phase(int e) const { return element_phase_[e]; }
    const PhaseMaterial& material(int phase) const { return materials_[phase]; }
    const LameParams& element_lame(int e) const { return materials_[element_phase_[e]].lame; }

    int truth_label(const Vec2& x) const { return pattern_.truth_label(x); }

    double inclusion_area_fraction() const {
        // uniform element areas, so the count fraction is the area fraction
        std::size_t inc = 0;
        for (auto p : element_phase_) inc += p;
        return static_cast<double>(inc) / element_phase_.size();
    }

private:
    explicit MaterialDomain(int resolution) : mesh_(resolution) {}

    StructuredTriMesh mesh_;
    Pattern pattern_;
    std::array<PhaseMaterial, 2> materials_{};
    std::vector<std::uint8_t> element_phase_;
};

}  // namespace kinecluster
