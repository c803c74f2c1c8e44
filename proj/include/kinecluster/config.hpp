#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinecluster/boundary.hpp"
#include "kinecluster/kinematics.hpp"
#include "kinecluster/pattern.hpp"

namespace kinecluster {

namespace detail {

inline void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                       const std::string& context) {
    if (!obj.is_object()) throw ValidationError("config: '" + context + "' must be an object");
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw ValidationError("config: unknown key '" + item.key() + "' in " + context);
}

}  // namespace detail

inline PatternSpec pattern_spec_from_json(const nlohmann::json& j) {
    detail::check_keys(j, {"kind", "center", "radius", "inner_radius", "outer_radius", "cross_length",
                           "cross_width", "centers", "circles_radius", "split_at", "path"},
                       "pattern");
    PatternSpec p;
    p.kind = pattern_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("center")) p.center = Vec2(j["center"][0].get<double>(), j["center"][1].get<double>());
    if (j.contains("radius")) p.radius = j["radius"].get<double>();
    if (j.contains("inner_radius")) p.inner_radius = j["inner_radius"].get<double>();
    if (j.contains("outer_radius")) p.outer_radius = j["outer_radius"].get<double>();
    if (j.contains("cross_length")) p.cross_length = j["cross_length"].get<double>();
    if (j.contains("cross_width")) p.cross_width = j["cross_width"].get<double>();
    if (j.contains("circles_radius")) p.circles_radius = j["circles_radius"].get<double>();
    if (j.contains("split_at")) p.split_at = j["split_at"].get<double>();
    if (j.contains("path")) p.raster_path = j["path"].get<std::string>();
    if (j.contains("centers")) {
        p.circle_centers.clear();
        for (const auto& c : j["centers"]) p.circle_centers.emplace_back(c[0].get<double>(), c[1].get<double>());
    }
    p.validate();
    return p;
}

inline nlohmann::json pattern_spec_to_json(const PatternSpec& p) {
    nlohmann::json j{{"kind", to_string(p.kind)}};
    switch (p.kind) {
        case PatternKind::circle:
            j["center"] = {p.center.x(), p.center.y()};
            j["radius"] = p.radius;
            break;
        case PatternKind::ring:
            j["center"] = {p.center.x(), p.center.y()};
            j["inner_radius"] = p.inner_radius;
            j["outer_radius"] = p.outer_radius;
            break;
        case PatternKind::cross:
            j["center"] = {p.center.x(), p.center.y()};
            j["cross_length"] = p.cross_length;
            j["cross_width"] = p.cross_width;
            break;
        case PatternKind::four_circles: {
            auto centers = nlohmann::json::array();
            for (const auto& c : p.circle_centers) centers.push_back({c.x(), c.y()});
            j["centers"] = centers;
            j["circles_radius"] = p.circles_radius;
            break;
        }
        case PatternKind::split:
            j["split_at"] = p.split_at;
            break;
        case PatternKind::raster:
            j["path"] = p.raster_path;
            break;
    }
    return j;
}

inline BoundaryCondition bc_from_json(const nlohmann::json& j) {
    detail::check_keys(j, {"kind", "delta", "dx", "dy", "seed", "load_steps"}, "bc");
    const BcKind kind = bc_kind_from_string(j.at("kind").get<std::string>());
    BoundaryCondition bc;
    if (kind == BcKind::biaxial) {
        bc = make_biaxial(j.at("dx").get<double>(), j.at("dy").get<double>());
    } else if (kind == BcKind::random) {
        bc = make_boundary_condition(kind, 0.0, j.at("seed").get<std::uint64_t>());
    } else {
        bc = make_boundary_condition(kind, j.value("delta", 0.3));
    }
    if (j.contains("load_steps")) bc.load_steps = j["load_steps"].get<int>();
    return bc;
}

inline nlohmann::json bc_to_json(const BoundaryCondition& bc) {
    nlohmann::json j{{"kind", to_string(bc.kind)}};
    switch (bc.kind) {
        case BcKind::biaxial:
            j["dx"] = bc.dx;
            j["dy"] = bc.dy;
            break;
        case BcKind::random: {
            j["seed"] = bc.seed;
            auto edges = nlohmann::json::array();
            for (const auto& e : bc.edge_coeffs) edges.push_back(e.c);
            j["coefficients"] = edges;  // emitted for metadata, not accepted as input
            break;
        }
        default:
            j["delta"] = bc.delta;
    }
    j["load_steps"] = bc.load_steps;
    return j;
}

// Full experiment description; serializable, rejects unknown keys.
struct RunConfig {
    PatternSpec pattern;
    double E_background = 1.0;
    double E_inclusion = 10.0;
    double nu = 0.3;
    int resolution = 64;
    int grid = 89;
    int markers = 1000;
    std::uint64_t marker_seed = 7;
    int mls_neighbors = 16;
    std::vector<BoundaryCondition> bcs;
    FeatureKind feature_kind = FeatureKind::invariants;
    std::optional<bool> standardize;
    std::string method = "kmeans";  // single-BC runs; multi-BC runs use the ensemble
    int k = 2;
    std::optional<int> k_final;
    int min_size = 5;
    std::uint64_t seed = 3;
    double ocsvm_nu = 0.2;
    std::optional<double> contamination;
    struct Reconstruct {
        std::vector<int> k_range;
        std::string component = "E22";
        int eval_case = 0;
    };
    std::optional<Reconstruct> reconstruct;
    std::string out_dir = "run";

    static RunConfig from_json(const nlohmann::json& j) {
        detail::check_keys(j, {"pattern", "materials", "resolution", "grid", "markers", "marker_seed",
                               "mls_neighbors", "bcs", "features", "cluster", "reconstruct", "out"},
                           "config");
        RunConfig c;
        c.pattern = pattern_spec_from_json(j.at("pattern"));
        if (j.contains("materials")) {
            const auto& m = j["materials"];
            detail::check_keys(m, {"E_background", "E_inclusion", "nu"}, "materials");
            c.E_background = m.value("E_background", 1.0);
            c.E_inclusion = m.value("E_inclusion", 10.0);
            c.nu = m.value("nu", 0.3);
        }
        c.resolution = j.value("resolution", 64);
        c.grid = j.value("grid", 89);
        c.markers = j.value("markers", 1000);
        c.marker_seed = j.value("marker_seed", std::uint64_t{7});
        c.mls_neighbors = j.value("mls_neighbors", 16);
        if (!j.contains("bcs") || !j["bcs"].is_array() || j["bcs"].empty())
            throw ValidationError("config: 'bcs' must be a non-empty array");
        for (const auto& b : j["bcs"]) c.bcs.push_back(bc_from_json(b));
        if (j.contains("features")) {
            const auto& f = j["features"];
            detail::check_keys(f, {"kind", "standardize"}, "features");
            if (f.contains("kind")) c.feature_kind = feature_kind_from_string(f["kind"].get<std::string>());
            if (f.contains("standardize")) c.standardize = f["standardize"].get<bool>();
        }
        if (j.contains("cluster")) {
            const auto& cl = j["cluster"];
            detail::check_keys(cl, {"method", "k", "k_final", "min_size", "seed", "nu", "contamination"},
                               "cluster");
            c.method = cl.value("method", std::string("kmeans"));
            if (c.method != "kmeans" && c.method != "spectral" && c.method != "iforest" &&
                c.method != "ocsvm")
                throw ValidationError("config: unknown cluster method '" + c.method + "'");
            c.k = cl.value("k", 2);
            if (cl.contains("k_final")) c.k_final = cl["k_final"].get<int>();
            c.min_size = cl.value("min_size", 5);
            c.seed = cl.value("seed", std::uint64_t{3});
            c.ocsvm_nu = cl.value("nu", 0.2);
            if (cl.contains("contamination")) c.contamination = cl["contamination"].get<double>();
        }
        if (j.contains("reconstruct")) {
            const auto& r = j["reconstruct"];
            detail::check_keys(r, {"k_range", "component", "eval_case"}, "reconstruct");
            Reconstruct rec;
            for (const auto& v : r.at("k_range")) rec.k_range.push_back(v.get<int>());
            rec.component = r.value("component", std::string("E22"));
            rec.eval_case = r.value("eval_case", 0);
            c.reconstruct = rec;
        }
        if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
        return c;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["pattern"] = pattern_spec_to_json(pattern);
        j["materials"] = {{"E_background", E_background}, {"E_inclusion", E_inclusion}, {"nu", nu}};
        j["resolution"] = resolution;
        j["grid"] = grid;
        j["markers"] = markers;
        j["marker_seed"] = marker_seed;
        j["mls_neighbors"] = mls_neighbors;
        auto bcs_json = nlohmann::json::array();
        for (const auto& bc : bcs) bcs_json.push_back(bc_to_json(bc));
        j["bcs"] = bcs_json;
        j["features"] = {{"kind", to_string(feature_kind)}};
        if (standardize) j["features"]["standardize"] = *standardize;
        j["cluster"] = {{"method", method}, {"k", k}, {"min_size", min_size}, {"seed", seed}};
        if (k_final) j["cluster"]["k_final"] = *k_final;
        if (reconstruct) {
            j["reconstruct"] = {{"k_range", reconstruct->k_range},
                                {"component", reconstruct->component},
                                {"eval_case", reconstruct->eval_case}};
        }
        j["out"] = out_dir;
        return j;
    }
};

}  // namespace kinecluster
