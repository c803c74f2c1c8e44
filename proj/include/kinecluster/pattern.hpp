#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kinecluster/common.hpp"
#include "kinecluster/image.hpp"

namespace kinecluster {

enum class PatternKind { circle, ring, cross, four_circles, raster, split };

inline std::string to_string(PatternKind k) {
    switch (k) {
        case PatternKind::circle: return "circle";
        case PatternKind::ring: return "ring";
        case PatternKind::cross: return "cross";
        case PatternKind::four_circles: return "four_circles";
        case PatternKind::raster: return "raster";
        case PatternKind::split: return "split";
    }
    return "?";
}

inline PatternKind pattern_kind_from_string(const std::string& s) {
    if (s == "circle") return PatternKind::circle;
    if (s == "ring") return PatternKind::ring;
    if (s == "cross") return PatternKind::cross;
    if (s == "four_circles" || s == "four-circles" || s == "4circles") return PatternKind::four_circles;
    if (s == "raster") return PatternKind::raster;
    if (s == "split") return PatternKind::split;
    throw ValidationError("unknown pattern kind: " + s);
}

// Two-phase geometry on the unit square. Phase 1 is the inclusion.
struct PatternSpec {
    PatternKind kind = PatternKind::circle;

    Vec2 center{0.5, 0.5};
    double radius = 0.2;  // circle

    double inner_radius = 0.15;  // ring
    double outer_radius = 0.35;

    // cross: two overlapping centered rectangles, one rotated 90 degrees
    double cross_length = 0.50;
    double cross_width = 0.20;

    std::vector<Vec2> circle_centers{{0.25, 0.25}, {0.75, 0.75}, {0.33, 0.67}, {0.67, 0.33}};
    double circles_radius = 0.125;  // four_circles

    double split_at = 0.5;  // split: phase 1 where y >= split_at

    std::string raster_path;

    static PatternSpec circle_spec(Vec2 c = {0.5, 0.5}, double r = 0.2) {
        PatternSpec p;
        p.kind = PatternKind::circle;
        p.center = c;
        p.radius = r;
        return p;
    }
    static PatternSpec ring_spec(double inner = 0.15, double outer = 0.35) {
        PatternSpec p;
        p.kind = PatternKind::ring;
        p.inner_radius = inner;
        p.outer_radius = outer;
        return p;
    }
    static PatternSpec cross_spec() {
        PatternSpec p;
        p.kind = PatternKind::cross;
        return p;
    }
    static PatternSpec four_circles_spec() {
        PatternSpec p;
        p.kind = PatternKind::four_circles;
        return p;
    }
    static PatternSpec split_spec() {
        PatternSpec p;
        p.kind = PatternKind::split;
        return p;
    }
    static PatternSpec raster_spec(std::string path) {
        PatternSpec p;
        p.kind = PatternKind::raster;
        p.raster_path = std::move(path);
        return p;
    }

    void validate() const {
        const auto in_square = [](const Vec2& c, double r) {
            return c.x() - r >= 0.0 && c.x() + r <= 1.0 && c.y() - r >= 0.0 && c.y() + r <= 1.0;
        };
        switch (kind) {
            case PatternKind::circle:
                if (radius < 0.0) throw ValidationError("pattern: circle radius must be >= 0");
                if (radius > 0.0 && !in_square(center, radius))
                    throw ValidationError("pattern: circle leaves the unit square");
                break;
            case PatternKind::ring:
                if (inner_radius <= 0.0 || outer_radius <= 0.0)
                    throw ValidationError("pattern: ring radii must be > 0");
                if (inner_radius >= outer_radius)
                    throw ValidationError("pattern: ring inner radius must be < outer radius");
                if (!in_square(center, outer_radius))
                    throw ValidationError("pattern: ring leaves the unit square");
                break;
            case PatternKind::cross:
                if (cross_length <= 0.0 || cross_width <= 0.0 || cross_width > cross_length)
                    throw ValidationError("pattern: invalid cross dimensions");
                if (center.x() - cross_length / 2 < 0.0 || center.x() + cross_length / 2 > 1.0 ||
                    center.y() - cross_length / 2 < 0.0 || center.y() + cross_length / 2 > 1.0)
                    throw ValidationError("pattern: cross leaves the unit square");
                break;
            case PatternKind::four_circles:
                if (circles_radius <= 0.0) throw ValidationError("pattern: circle radius must be > 0");
                if (circle_centers.empty()) throw ValidationError("pattern: no circle centers given");
                for (const Vec2& c : circle_centers)
                    if (!in_square(c, circles_radius))
                        throw ValidationError("pattern: a circle leaves the unit square");
                break;
            case PatternKind::split:
                if (split_at <= 0.0 || split_at >= 1.0)
                    throw ValidationError("pattern: split position must lie strictly inside (0,1)");
                break;
            case PatternKind::raster:
                if (raster_path.empty()) throw ValidationError("pattern: raster path missing");
                break;
        }
    }
};

// Resolved pattern with any raster data loaded; answers point-in-inclusion
// queries independently of mesh resolution.
class Pattern {
public:
    static Pattern from_spec(const PatternSpec& spec) {
        spec.validate();
        Pattern p;
        p.spec_ = spec;
        if (spec.kind == PatternKind::raster) {
            GrayImage img;
            try {
                img = read_gray_raster(spec.raster_path);
            } catch (const IoError& e) {
                throw ValidationError(std::string("pattern: raster unreadable: ") + e.what());
            }
            p.mask_.assign(img.pixels.size(), 0);
            bool any0 = false, any1 = false;
            for (std::size_t i = 0; i < img.pixels.size(); ++i) {
                const bool inc = img.pixels[i] >= 128;
                p.mask_[i] = inc ? 1 : 0;
                (inc ? any1 : any0) = true;
            }
            if (!any0 || !any1)
                throw ValidationError("pattern: raster is not two-phase after thresholding at 128");
            p.mask_w_ = img.width;
            p.mask_h_ = img.height;
        }
        return p;
    }

    const PatternSpec& spec() const { return spec_; }

    bool inside(const Vec2& x) const {
        switch (spec_.kind) {
            case PatternKind::circle:
                return spec_.radius > 0.0 && (x - spec_.center).norm() < spec_.radius;
            case PatternKind::ring: {
                const double d = (x - spec_.center).norm();
                return d >= spec_.inner_radius && d <= spec_.outer_radius;
            }
            case PatternKind::cross: {
                const double dx = std::abs(x.x() - spec_.center.x());
                const double dy = std::abs(x.y() - spec_.center.y());
                const double hl = spec_.cross_length / 2, hw = spec_.cross_width / 2;
                return (dx <= hl && dy <= hw) || (dx <= hw && dy <= hl);
            }
            case PatternKind::four_circles:
                return std::any_of(spec_.circle_centers.begin(), spec_.circle_centers.end(),
                                   [&](const Vec2& c) { return (x - c).norm() < spec_.circles_radius; });
            case PatternKind::split:
                return x.y() >= spec_.split_at;
            case PatternKind::raster: {
                // nearest-pixel lookup; image row 0 maps to y=1
                const int col = std::clamp(static_cast<int>(std::floor(x.x() * mask_w_)), 0, mask_w_ - 1);
                const int row = std::clamp(static_cast<int>(std::floor((1.0 - x.y()) * mask_h_)), 0, mask_h_ - 1);
                return mask_[static_cast<std::size_t>(row) * mask_w_ + col] != 0;
            }
        }
        return false;
    }

    int truth_label(const Vec2& x) const { return inside(x) ? 1 : 0; }

private:
    PatternSpec spec_;
    std::vector<std::uint8_t> mask_;
    int mask_w_ = 0, mask_h_ = 0;
};

}  // namespace kinecluster
