// kinecluster: generate heterogeneous hyperelastic samples, extract kinematic
// features from scattered markers, cluster them (single-load or ensemble),
// and reconstruct strain fields from cluster medoids.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kinecluster/experiment.hpp"
#include "kinecluster/paper_suite.hpp"

namespace fs = std::filesystem;
using namespace kinecluster;

namespace {

PatternSpec pattern_from_cli(const std::string& kind, const std::string& raster_path) {
    PatternSpec spec;
    spec.kind = pattern_kind_from_string(kind);
    if (spec.kind == PatternKind::raster) {
        if (raster_path.empty()) throw ValidationError("raster pattern needs --raster <file>");
        spec.raster_path = raster_path;
    }
    spec.validate();
    return spec;
}

BoundaryCondition bc_from_cli(const std::string& kind, double delta, double dx, double dy,
                              std::optional<std::uint64_t> bc_seed) {
    const BcKind k = bc_kind_from_string(kind);
    if (k == BcKind::biaxial) return make_biaxial(dx, dy);
    if (k == BcKind::random) {
        if (!bc_seed) throw ValidationError("random boundary condition needs --bc-seed");
        return make_boundary_condition(k, 0.0, *bc_seed);
    }
    return make_boundary_condition(k, delta);
}

std::vector<int> parse_k_range(const std::string& text) {
    std::vector<int> ks;
    if (text.find(':') != std::string::npos) {
        const auto colon = text.find(':');
        const int lo = std::stoi(text.substr(0, colon));
        const int hi = std::stoi(text.substr(colon + 1));
        if (lo < 1 || hi < lo) throw ValidationError("bad --k-range '" + text + "'");
        for (int k = lo; k < hi; k *= 2) ks.push_back(k);
        ks.push_back(hi);
    } else {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) ks.push_back(std::stoi(item));
    }
    return ks;
}

FeatureMatrix load_features(const std::string& path) {
    FeatureMatrix f = read_features_csv(path);
    if (!f.grid.valid()) {
        const int R = static_cast<int>(std::lround(std::sqrt(static_cast<double>(f.rows()))));
        if (R * R == f.rows()) f.grid = {R, R};
    }
    return f;
}

int cmd_generate(const std::string& pattern, const std::string& raster, const std::string& bc_kind,
                 double delta, double dx, double dy, std::optional<std::uint64_t> bc_seed,
                 int markers, std::uint64_t seed, int resolution, int grid, const std::string& out_dir) {
    const PatternSpec spec = pattern_from_cli(pattern, raster);
    const MaterialDomain domain =
        MaterialDomain::build(spec, resolution, make_phase_material(1.0, 0.3),
                              make_phase_material(10.0, 0.3));
    const BoundaryCondition bc = bc_from_cli(bc_kind, delta, dx, dy, bc_seed);

    const DisplacementField field = solve_forward(domain, bc);
    const MarkerSet marker_set = sample_markers(field, markers, seed);

    fs::create_directories(out_dir);
    write_markers_csv((fs::path(out_dir) / "markers.csv").string(), marker_set);
    GridField g;
    g.R = grid;
    write_ground_truth_csv((fs::path(out_dir) / "ground_truth.csv").string(), g,
                           truth_on_grid(domain, grid));

    nlohmann::json meta;
    meta["version"] = KINECLUSTER_VERSION;
    meta["pattern"] = pattern_spec_to_json(spec);
    meta["materials"] = {{"E_background", 1.0}, {"E_inclusion", 10.0}, {"nu", 0.3}};
    meta["bc"] = bc_to_json(bc);
    meta["resolution"] = resolution;
    meta["grid"] = grid;
    meta["markers"] = markers;
    meta["marker_seed"] = seed;
    meta["solver"] = {{"load_steps", field.diagnostics.load_steps},
                      {"newton_iterations", field.diagnostics.newton_iterations},
                      {"final_residual", field.diagnostics.final_residual},
                      {"final_relative_residual", field.diagnostics.final_relative_residual},
                      {"restarts", field.diagnostics.restarts}};
    std::ofstream((fs::path(out_dir) / "meta.json").string()) << meta.dump(2) << '\n';
    std::cout << "wrote " << out_dir << " (markers.csv, ground_truth.csv, meta.json)\n";
    return 0;
}

int cmd_features(const std::string& in_path, int grid, const std::string& kind, int neighbors,
                 const std::string& standardize, const std::string& out_path) {
    const MarkerSet markers = read_markers_csv(in_path);
    GridField g = interpolate_to_grid(markers, grid, neighbors);
    compute_kinematics(g);
    std::optional<bool> std_override;
    if (standardize == "on") std_override = true;
    if (standardize == "off") std_override = false;
    const FeatureMatrix f = assemble_features(g, feature_kind_from_string(kind), std_override);
    write_features_csv(out_path, f);
    if (g.coverage_warnings > 0)
        std::cerr << "warning: " << g.coverage_warnings
                  << " grid nodes had their k-th neighbor farther than 0.25\n";
    std::cout << "wrote " << out_path << " (" << f.rows() << " x " << f.cols() << ")\n";
    return 0;
}

int cmd_cluster(const std::string& features_path, const std::string& method, int k,
                std::uint64_t seed, double nu, std::optional<double> contamination,
                double gamma, const std::string& out_path) {
    const FeatureMatrix f = load_features(features_path);
    Labeling labels;
    if (method == "kmeans") {
        labels = kmeans(f, k, seed);
    } else if (method == "spectral") {
        SpectralOptions opts;
        opts.gamma = gamma;
        labels = spectral(f, k, seed, opts);
    } else if (method == "iforest") {
        IsolationForestOptions opts;
        opts.contamination = contamination;
        labels = iforest(f, seed, opts);
    } else if (method == "ocsvm") {
        labels = ocsvm(f, nu);
    } else {
        throw ValidationError("unknown method '" + method + "'");
    }
    write_labels_csv(out_path, labels);
    std::cout << "wrote " << out_path << " (" << labels.num_clusters << " clusters)\n";
    return 0;
}

int cmd_ensemble(const std::vector<std::string>& feature_paths, int k, std::optional<int> k_final,
                 int min_size, std::uint64_t seed, const std::string& out_path,
                 const std::string& dump_dir) {
    std::vector<FeatureMatrix> features;
    for (const auto& p : feature_paths) features.push_back(load_features(p));
    EnsembleOptions opts;
    opts.k_base = k;
    opts.k_final = k_final;
    opts.min_size = min_size;
    const EnsembleResult res = ensemble_pipeline(features, seed, opts);
    write_labels_csv(out_path, res.consensus);
    if (!dump_dir.empty()) {
        fs::create_directories(dump_dir);
        for (std::size_t i = 0; i < res.base.size(); ++i) {
            write_labels_csv((fs::path(dump_dir) / ("base_" + std::to_string(i) + ".csv")).string(),
                             res.base[i]);
            write_labels_csv(
                (fs::path(dump_dir) / ("segmented_" + std::to_string(i) + ".csv")).string(),
                res.segmented[i]);
            emit_label_heatmap(res.segmented[i],
                               (fs::path(dump_dir) / ("segmented_" + std::to_string(i) + ".ppm")).string());
        }
        write_labels_csv((fs::path(dump_dir) / "consensus_raw.csv").string(), res.consensus_raw);
        emit_label_heatmap(res.consensus, (fs::path(dump_dir) / "consensus.ppm").string());
    }
    std::cout << "wrote " << out_path << " (" << res.consensus.num_clusters << " clusters)\n";
    return 0;
}

int cmd_score(const std::string& labels_path, const std::string& truth_path, bool per_component,
              const std::string& report_path) {
    Labeling labels = read_labels_csv(labels_path);
    Labeling truth = read_ground_truth_csv(truth_path);
    if (labels.size() != truth.size())
        throw ValidationError("score: labels and truth differ in length");
    if (per_component) {
        if (!truth.grid.valid()) throw ValidationError("score: truth is not grid-shaped");
        truth = connected_components(truth);
    }
    const double ari = adjusted_rand_index(labels, truth);
    std::cout << format_double(ari) << '\n';

    nlohmann::json report{{"ari", ari},
                          {"n", labels.size()},
                          {"labels", labels_path},
                          {"truth", truth_path},
                          {"per_component", per_component},
                          {"label_clusters", labels.num_clusters},
                          {"truth_clusters", truth.num_clusters}};
    if (report_path.empty())
        std::cout << report.dump(2) << '\n';
    else
        std::ofstream(report_path) << report.dump(2) << '\n';
    return 0;
}

int cmd_reconstruct(const std::string& eval_path, const std::vector<std::string>& ensemble_paths,
                    const std::string& k_range_text, const std::string& component,
                    std::uint64_t seed, const std::string& out_path, const std::string& heatmap_dir) {
    const FeatureMatrix eval_features = load_features(eval_path);
    if (eval_features.kind != FeatureKind::green_lagrange)
        throw ValidationError("reconstruct: evaluation features must be green_lagrange strain");
    std::vector<FeatureMatrix> sets;
    if (ensemble_paths.empty()) {
        sets.push_back(eval_features);
    } else {
        for (const auto& p : ensemble_paths) sets.push_back(load_features(p));
    }
    const auto names = feature_column_names(FeatureKind::green_lagrange);
    int col = -1;
    for (std::size_t c = 0; c < names.size(); ++c)
        if (names[c] == component) col = static_cast<int>(c);
    if (col < 0) throw ValidationError("reconstruct: unknown component '" + component + "'");
    const Eigen::VectorXd eval_values = eval_features.values.col(col);

    const std::vector<int> k_range = parse_k_range(k_range_text);
    const auto reports = sensor_sweep(sets, eval_features, eval_values, k_range, seed);

    nlohmann::json sweep = nlohmann::json::array();
    for (const auto& r : reports) {
        sweep.push_back({{"target_k", r.target_k},
                         {"sensors", r.realized_sensors},
                         {"mse", r.mse},
                         {"medoids", r.medoid_indices}});
    }
    nlohmann::json out{{"component", component},
                       {"mode", ensemble_paths.empty() ? "single" : "ensemble"},
                       {"sweep", sweep}};
    std::ofstream(out_path) << out.dump(2) << '\n';
    if (!heatmap_dir.empty() && eval_features.grid.valid()) {
        fs::create_directories(heatmap_dir);
        emit_scalar_heatmap(eval_values, eval_features.grid,
                            (fs::path(heatmap_dir) / ("original_" + component + ".pgm")).string());
    }
    std::cout << "wrote " << out_path << " (" << reports.size() << " sweep points)\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open " + config_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig config = RunConfig::from_json(j);
    if (!out_override.empty()) config.out_dir = out_override;
    const nlohmann::json report = run_experiment(config);
    std::cout << "ari_material=" << report["ari_material"] << '\n';
    std::cout << "wrote " << config.out_dir << "/report.json\n";
    return 0;
}

int cmd_paper_suite(const std::string& out_dir, int resolution) {
    PaperSuiteConfig cfg;
    cfg.resolution = resolution;
    PaperSuite suite(cfg);
    const auto outcomes = suite.run_all();
    nlohmann::json report = nlohmann::json::array();
    bool all_pass = true;
    for (const auto& c : outcomes) {
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << "criterion " << c.id << " (" << c.name
                  << "): " << c.detail << '\n';
        report.push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail},
                          {"data", c.data}});
        all_pass = all_pass && c.pass;
    }
    std::cout << "note: criterion 7 (exact oracle suites) runs in the ctest acceptance binary\n";
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream(fs::path(out_dir) / "paper_suite.json") << report.dump(2) << '\n';
    }
    return all_pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kinecluster: clustering of kinematic features from hyperelastic simulations"};
    app.require_subcommand(1);

    // generate
    std::string g_pattern = "circle", g_raster, g_bc = "equibiaxial", g_out = "run";
    double g_delta = 0.3, g_dx = 0.0, g_dy = 0.0;
    std::optional<std::uint64_t> g_bc_seed;
    int g_markers = 1000, g_resolution = 64, g_grid = 89;
    std::uint64_t g_seed = 7;
    auto* generate = app.add_subcommand("generate", "solve a sample and write displacement markers");
    generate->add_option("--pattern", g_pattern, "circle|ring|cross|four_circles|split|raster");
    generate->add_option("--raster", g_raster, "raster image (PGM/PNG) for --pattern raster");
    generate->add_option("--bc", g_bc, "equibiaxial|uniaxial_x|uniaxial_y|shear|confined_compression|biaxial|random");
    generate->add_option("--delta", g_delta, "load magnitude for the named BCs");
    generate->add_option("--dx", g_dx, "biaxial x displacement");
    generate->add_option("--dy", g_dy, "biaxial y displacement");
    generate->add_option("--bc-seed", g_bc_seed, "seed for the random BC family");
    generate->add_option("--markers", g_markers, "number of sampled markers");
    generate->add_option("--seed", g_seed, "marker sampling seed");
    generate->add_option("--resolution", g_resolution, "mesh cells per side");
    generate->add_option("--grid", g_grid, "ground-truth grid size");
    generate->add_option("--out", g_out, "output directory")->required();

    // features
    std::string f_in, f_kind = "invariants", f_std = "auto", f_out;
    int f_grid = 89, f_neighbors = 16;
    auto* features = app.add_subcommand("features", "interpolate markers to a grid and emit features");
    features->add_option("--in", f_in, "markers.csv")->required();
    features->add_option("--grid", f_grid, "grid size R");
    features->add_option("--kind", f_kind, "displacement|deformation_gradient|green_lagrange|invariants");
    features->add_option("--neighbors", f_neighbors, "MLS neighbor count");
    features->add_option("--standardize", f_std, "auto|on|off")->check(CLI::IsMember({"auto", "on", "off"}));
    features->add_option("--out", f_out, "features.csv")->required();

    // cluster
    std::string c_features, c_method = "kmeans", c_out;
    int c_k = 2;
    std::uint64_t c_seed = 3;
    double c_nu = 0.2, c_gamma = 1.0;
    std::optional<double> c_contamination;
    auto* cluster = app.add_subcommand("cluster", "cluster a feature matrix");
    cluster->add_option("--features", c_features, "features.csv")->required();
    cluster->add_option("--method", c_method, "kmeans|spectral|iforest|ocsvm")
        ->check(CLI::IsMember({"kmeans", "spectral", "iforest", "ocsvm"}));
    cluster->add_option("--k", c_k, "cluster count (kmeans/spectral)");
    cluster->add_option("--seed", c_seed, "random seed");
    cluster->add_option("--nu", c_nu, "ocsvm nu");
    cluster->add_option("--contamination", c_contamination, "iforest anomalous fraction");
    cluster->add_option("--gamma", c_gamma, "spectral RBF gamma");
    cluster->add_option("--out", c_out, "labels.csv")->required();

    // ensemble
    std::vector<std::string> e_features;
    int e_k = 2, e_min_size = 5;
    std::optional<int> e_k_final;
    std::uint64_t e_seed = 3;
    std::string e_out, e_dump;
    auto* ensemble = app.add_subcommand("ensemble", "CSPA consensus over several feature sets");
    ensemble->add_option("--features", e_features, "two or more features.csv files")
        ->required()
        ->expected(-2);
    ensemble->add_option("--k", e_k, "base cluster count");
    ensemble->add_option("--k-final", e_k_final, "consensus cluster count (default: --k)");
    ensemble->add_option("--min-size", e_min_size, "minimum surviving cluster size");
    ensemble->add_option("--seed", e_seed, "random seed");
    ensemble->add_option("--out", e_out, "consensus labels.csv")->required();
    ensemble->add_option("--dump-intermediate", e_dump, "directory for per-stage labelings");

    // score
    std::string s_labels, s_truth, s_report;
    bool s_per_component = false;
    auto* score = app.add_subcommand("score", "ARI of a labeling against ground truth");
    score->add_option("--labels", s_labels, "labels.csv")->required();
    score->add_option("--truth", s_truth, "ground_truth.csv")->required();
    score->add_flag("--per-component", s_per_component, "split truth into connected components first");
    score->add_option("--report", s_report, "write the JSON report here instead of stdout");

    // reconstruct
    std::string r_features, r_krange = "2:64", r_component = "E22", r_out, r_heatmaps;
    std::vector<std::string> r_ensemble;
    std::uint64_t r_seed = 3;
    auto* reconstruct = app.add_subcommand("reconstruct", "medoid sensor placement + strain reconstruction sweep");
    reconstruct->add_option("--features", r_features, "green_lagrange features.csv of the evaluation case")
        ->required();
    reconstruct->add_option("--ensemble", r_ensemble, "feature sets for ensemble clustering");
    reconstruct->add_option("--k-range", r_krange, "e.g. 2:64 (doubling) or 2,3,5,9");
    reconstruct->add_option("--eval-component", r_component, "E11|E22|E12");
    reconstruct->add_option("--seed", r_seed, "random seed");
    reconstruct->add_option("--out", r_out, "sweep JSON")->required();
    reconstruct->add_option("--heatmaps", r_heatmaps, "directory for PGM heatmaps");

    // run
    std::string run_config, run_out;
    auto* run = app.add_subcommand("run", "config-driven experiment");
    run->add_option("--config", run_config, "config JSON")->required();
    run->add_option("--out", run_out, "override the config's output directory");

    // paper-suite
    std::string p_out;
    int p_resolution = 64;
    auto* paper = app.add_subcommand("paper-suite", "run the benchmark acceptance experiments");
    paper->add_option("--out", p_out, "directory for paper_suite.json");
    paper->add_option("--resolution", p_resolution, "mesh cells per side");

    try {
        app.parse(argc, argv);
        if (*generate)
            return cmd_generate(g_pattern, g_raster, g_bc, g_delta, g_dx, g_dy, g_bc_seed, g_markers,
                                g_seed, g_resolution, g_grid, g_out);
        if (*features) return cmd_features(f_in, f_grid, f_kind, f_neighbors, f_std, f_out);
        if (*cluster)
            return cmd_cluster(c_features, c_method, c_k, c_seed, c_nu, c_contamination, c_gamma, c_out);
        if (*ensemble) return cmd_ensemble(e_features, e_k, e_k_final, e_min_size, e_seed, e_out, e_dump);
        if (*score) return cmd_score(s_labels, s_truth, s_per_component, s_report);
        if (*reconstruct)
            return cmd_reconstruct(r_features, r_ensemble, r_krange, r_component, r_seed, r_out,
                                   r_heatmaps);
        if (*run) return cmd_run(run_config, run_out);
        if (*paper) return cmd_paper_suite(p_out, p_resolution);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 3;
    } catch (const ClusteringError& e) {
        std::cerr << "clustering error: " << e.what() << '\n';
        return 4;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
