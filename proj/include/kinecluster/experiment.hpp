#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "kinecluster/ari.hpp"
#include "kinecluster/config.hpp"
#include "kinecluster/ensemble.hpp"
#include "kinecluster/iforest.hpp"
#include "kinecluster/io.hpp"
#include "kinecluster/ocsvm.hpp"
#include "kinecluster/reconstruct.hpp"
#include "kinecluster/solver.hpp"
#include "kinecluster/version.hpp"

namespace kinecluster {

// One solved load case reduced to grid kinematics.
struct LoadCase {
    BoundaryCondition bc;
    GridField grid;
    SolverDiagnostics diagnostics;
    MarkerSet markers;
};

// solve -> sample markers -> MLS grid -> kinematic tensors
inline LoadCase simulate_load_case(const MaterialDomain& domain, const BoundaryCondition& bc,
                                   int n_markers, std::uint64_t marker_seed, int grid_R = 89,
                                   int mls_k = 16) {
    LoadCase lc;
    lc.bc = bc;
    const DisplacementField field = solve_forward(domain, bc);
    lc.diagnostics = field.diagnostics;
    lc.markers = sample_markers(field, n_markers, marker_seed);
    lc.grid = interpolate_to_grid(lc.markers, grid_R, mls_k);
    compute_kinematics(lc.grid);
    return lc;
}

inline std::vector<int> truth_on_grid(const MaterialDomain& domain, int grid_R) {
    GridField g;
    g.R = grid_R;
    std::vector<int> truth(static_cast<std::size_t>(grid_R) * grid_R);
    for (int i = 0; i < grid_R * grid_R; ++i) truth[i] = domain.truth_label(g.node_pos(i));
    return truth;
}

inline Labeling truth_labeling(const MaterialDomain& domain, int grid_R) {
    Labeling t = Labeling::from_labels(truth_on_grid(domain, grid_R), "ground_truth");
    t.grid = {grid_R, grid_R};
    return t;
}

// Positionally split ground truth (each connected same-material region gets
// its own label), matching how the ensemble pipeline is scored.
inline Labeling truth_per_component(const MaterialDomain& domain, int grid_R) {
    return connected_components(truth_labeling(domain, grid_R));
}

inline Eigen::VectorXd strain_component_values(const GridField& grid, const std::string& component) {
    const int n = grid.num_nodes();
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
        if (component == "E11") v[i] = grid.E[i](0, 0);
        else if (component == "E22") v[i] = grid.E[i](1, 1);
        else if (component == "E12") v[i] = grid.E[i](0, 1);
        else throw ValidationError("unknown strain component '" + component + "' (want E11/E22/E12)");
    }
    return v;
}

namespace detail {

template <typename Fn>
auto run_stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const ValidationError& e) {
        throw ValidationError("stage '" + name + "': " + e.what());
    } catch (const SolverError& e) {
        throw SolverError("stage '" + name + "': " + e.what());
    } catch (const ClusteringError& e) {
        throw ClusteringError("stage '" + name + "': " + e.what());
    } catch (const IoError& e) {
        throw IoError("stage '" + name + "': " + e.what());
    }
}

inline nlohmann::json diagnostics_to_json(const SolverDiagnostics& d) {
    return {{"load_steps", d.load_steps},
            {"newton_iterations", d.newton_iterations},
            {"line_search_backtracks", d.line_search_backtracks},
            {"restarts", d.restarts},
            {"final_residual", d.final_residual},
            {"final_relative_residual", d.final_relative_residual},
            {"converged", d.converged}};
}

}  // namespace detail

// Executes generate -> features -> cluster/ensemble -> score -> (optional)
// reconstruct, writing every intermediate artifact plus report.json into
// config.out_dir. Returns the report.
inline nlohmann::json run_experiment(const RunConfig& config) {
    namespace fs = std::filesystem;
    const fs::path out(config.out_dir);
    fs::create_directories(out);

    nlohmann::json report;
    report["version"] = KINECLUSTER_VERSION;
    report["config"] = config.to_json();
    report["generated_at"] =
        static_cast<long>(std::chrono::duration_cast<std::chrono::seconds>(
                              std::chrono::system_clock::now().time_since_epoch())
                              .count());

    const MaterialDomain domain = detail::run_stage("generate", [&] {
        return MaterialDomain::build(config.pattern, config.resolution,
                                     make_phase_material(config.E_background, config.nu),
                                     make_phase_material(config.E_inclusion, config.nu));
    });

    const Labeling truth_material = truth_labeling(domain, config.grid);
    const Labeling truth_component = truth_per_component(domain, config.grid);
    {
        GridField g;
        g.R = config.grid;
        write_ground_truth_csv((out / "ground_truth.csv").string(), g, truth_material.labels);
        emit_label_heatmap(truth_component, (out / "ground_truth.ppm").string());
    }

    std::vector<LoadCase> cases(config.bcs.size());
    detail::run_stage("generate", [&] {
        parallel_for(config.bcs.size(), [&](std::size_t i) {
            cases[i] = simulate_load_case(domain, config.bcs[i], config.markers,
                                          mix_seed(config.marker_seed, i), config.grid,
                                          config.mls_neighbors);
        });
        return 0;
    });

    std::vector<FeatureMatrix> features(cases.size());
    report["cases"] = nlohmann::json::array();
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const fs::path case_dir = out / ("case_" + std::to_string(i));
        fs::create_directories(case_dir);
        detail::run_stage("features", [&] {
            features[i] = assemble_features(cases[i].grid, config.feature_kind, config.standardize);
            return 0;
        });
        write_markers_csv((case_dir / "markers.csv").string(), cases[i].markers);
        write_features_csv((case_dir / "features.csv").string(), features[i]);
        nlohmann::json cj;
        cj["bc"] = bc_to_json(cases[i].bc);
        cj["solver"] = detail::diagnostics_to_json(cases[i].diagnostics);
        cj["mls_fallbacks"] = cases[i].grid.mls_linear_fallbacks + cases[i].grid.mls_idw_fallbacks;
        cj["imputed_nodes"] = cases[i].grid.imputed_nodes;
        report["cases"].push_back(cj);
    }

    Labeling result;
    if (cases.size() == 1) {
        result = detail::run_stage("cluster", [&]() -> Labeling {
            if (config.method == "kmeans") return kmeans(features[0], config.k, config.seed);
            if (config.method == "spectral") return spectral(features[0], config.k, config.seed);
            if (config.method == "iforest") {
                IsolationForestOptions opts;
                opts.contamination = config.contamination;
                return iforest(features[0], config.seed, opts);
            }
            return ocsvm(features[0], config.ocsvm_nu);
        });
        report["method"] = config.method;
    } else {
        EnsembleOptions eopts;
        eopts.k_base = config.k;
        eopts.k_final = config.k_final;
        eopts.min_size = config.min_size;
        EnsembleResult ens = detail::run_stage("ensemble", [&] {
            return ensemble_pipeline(features, config.seed, eopts);
        });
        auto per_case_ari = nlohmann::json::array();
        for (std::size_t i = 0; i < ens.segmented.size(); ++i) {
            write_labels_csv((out / ("case_" + std::to_string(i)) / "labels.csv").string(),
                             ens.segmented[i]);
            emit_label_heatmap(ens.segmented[i],
                               (out / ("case_" + std::to_string(i)) / "labels.ppm").string());
            per_case_ari.push_back(adjusted_rand_index(ens.segmented[i], truth_component));
        }
        report["ari_per_case_component"] = per_case_ari;
        std::vector<double> eig(ens.consensus_eigenvalues.data(),
                                ens.consensus_eigenvalues.data() + ens.consensus_eigenvalues.size());
        report["consensus_eigenvalues"] = eig;
        result = std::move(ens.consensus);
        report["method"] = "ensemble";
    }

    write_labels_csv((out / "labels.csv").string(), result);
    emit_label_heatmap(result, (out / "labels.ppm").string());
    report["ari_material"] = adjusted_rand_index(result, truth_material);
    report["ari_component"] = adjusted_rand_index(result, truth_component);

    if (config.reconstruct) {
        detail::run_stage("reconstruct", [&] {
            const int eval_case = config.reconstruct->eval_case;
            if (eval_case < 0 || eval_case >= static_cast<int>(cases.size()))
                throw ValidationError("reconstruct: eval_case out of range");
            std::vector<FeatureMatrix> gl;
            for (const auto& c : cases) gl.push_back(assemble_features(c.grid, FeatureKind::green_lagrange));
            const Eigen::VectorXd eval =
                strain_component_values(cases[eval_case].grid, config.reconstruct->component);
            const auto reports = sensor_sweep(gl, gl[eval_case], eval, config.reconstruct->k_range,
                                              config.seed);
            auto sweep = nlohmann::json::array();
            for (const auto& r : reports)
                sweep.push_back({{"target_k", r.target_k},
                                 {"sensors", r.realized_sensors},
                                 {"mse", r.mse}});
            report["reconstruction"] = {{"component", config.reconstruct->component},
                                        {"eval_case", eval_case},
                                        {"sweep", sweep}};
            return 0;
        });
    }

    detail::open_out((out / "report.json").string()) << report.dump(2) << '\n';
    return report;
}

}  // namespace kinecluster
