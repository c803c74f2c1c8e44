#pragma once

#include <chrono>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "kinecluster/ari.hpp"
#include "kinecluster/experiment.hpp"

namespace kinecluster {

// Spearman rank correlation with average ranks for ties.
inline double spearman_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ValidationError("spearman: need two equal-length series");
    const auto ranks = [](std::span<const double> v) {
        const int n = static_cast<int>(v.size());
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        int i = 0;
        while (i < n) {
            int j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * (i + j) + 1.0;
            for (int t = i; t <= j; ++t) r[order[t]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const int n = static_cast<int>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

struct PaperSuiteConfig {
    int resolution = 64;
    int grid = 89;
    int markers = 1000;
    std::uint64_t marker_seed = 7;
    std::uint64_t cluster_seed = 3;
};

struct CriterionOutcome {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    nlohmann::json data;
};

// Runs the benchmark experiments behind the paper-suite CLI command and the
// acceptance tests. Load cases are solved once up front (in parallel) and
// shared across the individual checks.
class PaperSuite {
public:
    explicit PaperSuite(PaperSuiteConfig cfg = {}) : cfg_(cfg) {
        domains_.emplace("circle", MaterialDomain::build(PatternSpec::circle_spec(), cfg_.resolution,
                                                         soft(), stiff()));
        domains_.emplace("ring", MaterialDomain::build(PatternSpec::ring_spec(), cfg_.resolution,
                                                       soft(), stiff()));
        domains_.emplace("cross", MaterialDomain::build(PatternSpec::cross_spec(), cfg_.resolution,
                                                        soft(), stiff()));
        domains_.emplace("four_circles", MaterialDomain::build(PatternSpec::four_circles_spec(),
                                                               cfg_.resolution, soft(), stiff()));
        domains_.emplace("homogeneous", MaterialDomain::homogeneous(cfg_.resolution, soft()));
    }

    static PhaseMaterial soft() { return make_phase_material(1.0, 0.3); }
    static PhaseMaterial stiff() { return make_phase_material(10.0, 0.3); }

    static std::uint64_t random_bc_seed(int family, int index) {
        return 1000 + 100 * static_cast<std::uint64_t>(family) + index;
    }

    const MaterialDomain& domain(const std::string& name) const { return domains_.at(name); }

    // Solves every load case any criterion needs; safe to call once.
    void prefetch() {
        std::vector<std::pair<std::string, std::pair<std::string, BoundaryCondition>>> work;
        const auto standard = standard_bcs();
        for (const std::string pat : {"circle", "ring", "cross", "four_circles"})
            for (const auto& [bc_name, bc] : standard) work.push_back({key(pat, bc_name), {pat, bc}});
        for (const auto& [dx, dy] : biaxial_pairs())
            work.push_back({key("circle", biaxial_name(dx, dy)), {"circle", make_biaxial(dx, dy)}});
        for (int f = 0; f < 5; ++f)
            for (int j = 0; j < 6; ++j) {
                const auto seed = random_bc_seed(f, j);
                work.push_back({key("four_circles", "random" + std::to_string(seed)),
                                {"four_circles", make_boundary_condition(BcKind::random, 0.0, seed)}});
            }
        for (const std::string bc_name : {"equibiaxial", "uniaxial_x", "uniaxial_y", "shear"})
            work.push_back({key("homogeneous", bc_name), {"homogeneous", standard.at(bc_name)}});

        std::vector<LoadCase> solved(work.size());
        parallel_for(work.size(), [&](std::size_t i) {
            solved[i] = simulate_load_case(domains_.at(work[i].second.first), work[i].second.second,
                                           cfg_.markers, cfg_.marker_seed, cfg_.grid);
        });
        for (std::size_t i = 0; i < work.size(); ++i) cases_.emplace(work[i].first, std::move(solved[i]));
    }

    std::map<std::string, BoundaryCondition> standard_bcs() const {
        return {{"equibiaxial", make_boundary_condition(BcKind::equibiaxial, 0.3)},
                {"uniaxial_x", make_boundary_condition(BcKind::uniaxial_x, 0.3)},
                {"uniaxial_y", make_boundary_condition(BcKind::uniaxial_y, 0.3)},
                {"shear", make_boundary_condition(BcKind::shear, 0.3)},
                {"confined_compression", make_boundary_condition(BcKind::confined_compression, 0.3)}};
    }

    static std::vector<std::pair<double, double>> biaxial_pairs() {
        return {{0.3, 0.3}, {0.3, 0.225}, {0.3, 0.15}, {0.3, 0.075}, {0.3, 0.0}, {0.0, 0.0}};
    }

    const LoadCase& load_case(const std::string& pattern, const std::string& bc_name) const {
        return cases_.at(key(pattern, bc_name));
    }

    // ---- criteria -----------------------------------------------------------

    // Circle inclusion, equibiaxial, k-means on (I1, I2): ARI >= 0.95, and the
    // whole single-case pipeline runs within the 2-minute budget.
    CriterionOutcome criterion1() const {
        const auto t0 = std::chrono::steady_clock::now();
        const LoadCase lc = simulate_load_case(domains_.at("circle"),
                                               make_boundary_condition(BcKind::equibiaxial, 0.3),
                                               cfg_.markers, cfg_.marker_seed, cfg_.grid);
        const FeatureMatrix f = assemble_features(lc.grid, FeatureKind::invariants);
        const Labeling labels = kmeans(f, 2, cfg_.cluster_seed);
        const double ari = adjusted_rand_index(labels, truth_labeling(domains_.at("circle"), cfg_.grid));
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        CriterionOutcome out{1, "circle/equibiaxial k-means on invariants", false, "", {}};
        out.pass = ari >= 0.95 && seconds <= 120.0;
        std::ostringstream os;
        os << "ARI=" << ari << " (>=0.95), runtime=" << seconds << "s (<=120)";
        out.detail = os.str();
        out.data = {{"ari", ari}, {"seconds", seconds}};
        return out;
    }

    // Feature ordering: invariants beat deformation-gradient and displacement
    // features for k-means, per boundary condition.
    CriterionOutcome criterion2() const {
        CriterionOutcome out{2, "feature ordering (invariants best)", true, "", {}};
        const Labeling truth = truth_labeling(domains_.at("circle"), cfg_.grid);
        std::ostringstream os;
        for (const std::string bc : {"equibiaxial", "uniaxial_x", "shear"}) {
            const LoadCase& lc = load_case("circle", bc);
            const auto ari_for = [&](FeatureKind kind) {
                const FeatureMatrix f = assemble_features(lc.grid, kind);
                return adjusted_rand_index(kmeans(f, 2, cfg_.cluster_seed), truth);
            };
            const double a_inv = ari_for(FeatureKind::invariants);
            const double a_f = ari_for(FeatureKind::deformation_gradient);
            const double a_u = ari_for(FeatureKind::displacement);
            const bool ok = a_inv + 1e-12 >= a_f && a_inv + 1e-12 >= a_u;
            out.pass = out.pass && ok;
            os << bc << ": inv=" << a_inv << " F=" << a_f << " u=" << a_u << (ok ? " ok; " : " VIOLATED; ");
            out.data[bc] = {{"invariants", a_inv}, {"deformation_gradient", a_f}, {"displacement", a_u}};
        }
        out.detail = os.str();
        return out;
    }

    // Biaxial sweep: min ARI over deforming cases >= 0.80; the zero-deformation
    // case scores |ARI| <= 0.05.
    CriterionOutcome criterion3() const {
        CriterionOutcome out{3, "biaxial sweep", true, "", {}};
        const Labeling truth = truth_labeling(domains_.at("circle"), cfg_.grid);
        double min_ari = 1.0, zero_ari = 0.0;
        std::ostringstream os;
        for (const auto& [dx, dy] : biaxial_pairs()) {
            const LoadCase& lc = load_case("circle", biaxial_name(dx, dy));
            const FeatureMatrix f = assemble_features(lc.grid, FeatureKind::invariants);
            const double ari = adjusted_rand_index(kmeans(f, 2, cfg_.cluster_seed), truth);
            os << "(" << dx << "," << dy << ")=" << ari << " ";
            out.data[biaxial_name(dx, dy)] = ari;
            if (dx == 0.0 && dy == 0.0)
                zero_ari = ari;
            else
                min_ari = std::min(min_ari, ari);
        }
        out.pass = min_ari >= 0.80 && std::abs(zero_ari) <= 0.05;
        os << "| min=" << min_ari << " (>=0.8), zero=" << zero_ari << " (|.|<=0.05)";
        out.detail = os.str();
        return out;
    }

    struct EnsembleEval {
        double ensemble_ari = 0.0;
        std::vector<double> single_aris;
    };

    EnsembleEval evaluate_standard_ensemble(const std::string& pattern) const {
        const Labeling truth_comp = truth_per_component(domains_.at(pattern), cfg_.grid);
        std::vector<FeatureMatrix> features;
        EnsembleEval ev;
        for (const auto& [bc_name, bc] : standard_bcs()) {
            const LoadCase& lc = load_case(pattern, bc_name);
            features.push_back(assemble_features(lc.grid, FeatureKind::invariants));
            const Labeling single = enforce_min_size(
                connected_components(kmeans(features.back(), 2, cfg_.cluster_seed)), 5);
            ev.single_aris.push_back(adjusted_rand_index(single, truth_comp));
        }
        EnsembleOptions opts;
        opts.k_base = 2;
        opts.k_final = truth_comp.num_clusters;
        const EnsembleResult ens = ensemble_pipeline(features, cfg_.cluster_seed, opts);
        ev.ensemble_ari = adjusted_rand_index(ens.consensus, truth_comp);
        return ev;
    }

    // Ensemble over the 5 standard BCs at least matches the best single-BC
    // result (within 0.05) on all four inclusion patterns.
    CriterionOutcome criterion4() const {
        CriterionOutcome out{4, "standard-BC ensemble vs single BC", true, "", {}};
        std::ostringstream os;
        for (const std::string pattern : {"circle", "ring", "cross", "four_circles"}) {
            const EnsembleEval ev = evaluate_standard_ensemble(pattern);
            const double best = *std::max_element(ev.single_aris.begin(), ev.single_aris.end());
            const bool ok = ev.ensemble_ari >= best - 0.05;
            out.pass = out.pass && ok;
            os << pattern << ": ens=" << ev.ensemble_ari << " best_single=" << best
               << (ok ? " ok; " : " VIOLATED; ");
            out.data[pattern] = {{"ensemble", ev.ensemble_ari}, {"singles", ev.single_aris}};
        }
        out.detail = os.str();
        return out;
    }

    double random_ensemble_ari(int family, int count, int k_final) const {
        std::vector<FeatureMatrix> features;
        for (int j = 0; j < count; ++j) {
            const auto seed = random_bc_seed(family, j);
            const LoadCase& lc = load_case("four_circles", "random" + std::to_string(seed));
            features.push_back(assemble_features(lc.grid, FeatureKind::invariants));
        }
        EnsembleOptions opts;
        opts.k_base = 2;
        opts.k_final = k_final;
        const EnsembleResult ens = ensemble_pipeline(features, cfg_.cluster_seed, opts);
        return adjusted_rand_index(ens.consensus,
                                   truth_per_component(domains_.at("four_circles"), cfg_.grid));
    }

    // Random BCs: 5 of them recover the 4-circles pattern (ARI >= 0.70), and
    // ARI grows with the ensemble size on >= 4 of 5 seed families.
    CriterionOutcome criterion5() const {
        CriterionOutcome out{5, "random-BC ensembles", true, "", {}};
        const int k_final = truth_per_component(domains_.at("four_circles"), cfg_.grid).num_clusters;
        const double ari5 = random_ensemble_ari(0, 5, k_final);

        int positive_families = 0;
        auto family_data = nlohmann::json::array();
        for (int f = 0; f < 5; ++f) {
            std::vector<double> counts, aris;
            for (int m = 2; m <= 6; ++m) {
                counts.push_back(m);
                aris.push_back(random_ensemble_ari(f, m, k_final));
            }
            const double rho = spearman_correlation(counts, aris);
            if (rho > 0.0) ++positive_families;
            family_data.push_back({{"family", f}, {"aris", aris}, {"spearman", rho}});
        }
        out.pass = ari5 >= 0.70 && positive_families >= 4;
        std::ostringstream os;
        os << "ARI(5 random BCs)=" << ari5 << " (>=0.70), positive-trend families=" << positive_families
           << "/5 (>=4)";
        out.detail = os.str();
        out.data = {{"ari_5bc", ari5}, {"positive_families", positive_families}, {"families", family_data}};
        return out;
    }

    // Reconstruction sweep on the homogeneous sample, evaluated on E22 under
    // uniaxial-y: exact zero at k=n, a >=10x drop across the sweep, and single
    // load never worse than the ensemble at matched sensor budgets.
    CriterionOutcome criterion6() const {
        CriterionOutcome out{6, "reconstruction sensor sweep", true, "", {}};
        const LoadCase& eval_lc = load_case("homogeneous", "uniaxial_y");
        const FeatureMatrix eval_features = assemble_features(eval_lc.grid, FeatureKind::green_lagrange);
        const Eigen::VectorXd eval_values = strain_component_values(eval_lc.grid, "E22");

        const std::vector<int> k_range{2, 4, 8, 16, 32, 64};
        const std::vector<FeatureMatrix> single_sets{eval_features};
        const auto single = sensor_sweep(single_sets, eval_features, eval_values, k_range,
                                         cfg_.cluster_seed);

        std::vector<FeatureMatrix> ens_sets;
        for (const std::string bc : {"equibiaxial", "uniaxial_x", "uniaxial_y", "shear"})
            ens_sets.push_back(assemble_features(load_case("homogeneous", bc).grid,
                                                 FeatureKind::green_lagrange));
        const auto ensemble = sensor_sweep(ens_sets, eval_features, eval_values, k_range,
                                           cfg_.cluster_seed);

        const int n = eval_features.rows();
        const auto exact = sensor_sweep(single_sets, eval_features, eval_values, {n},
                                        cfg_.cluster_seed);
        const double mse_at_n = exact.front().mse;

        const double first = single.front().mse, last = single.back().mse;
        bool matched_ok = true;
        auto sweep_json = nlohmann::json::array();
        for (std::size_t i = 0; i < k_range.size(); ++i) {
            if (single[i].mse > ensemble[i].mse * (1.0 + 1e-9) + 1e-18) matched_ok = false;
            sweep_json.push_back({{"k", k_range[i]},
                                  {"single_mse", single[i].mse},
                                  {"single_sensors", single[i].realized_sensors},
                                  {"ensemble_mse", ensemble[i].mse},
                                  {"ensemble_sensors", ensemble[i].realized_sensors}});
        }
        out.pass = (mse_at_n == 0.0) && (last * 10.0 <= first) && matched_ok;
        std::ostringstream os;
        os << "MSE(k=n)=" << mse_at_n << " (==0), MSE(k=2)=" << first << ", MSE(k=64)=" << last
           << " (>=10x drop: " << (last * 10.0 <= first ? "yes" : "NO") << "), single<=ensemble: "
           << (matched_ok ? "yes" : "NO");
        out.detail = os.str();
        out.data = {{"mse_at_n", mse_at_n}, {"sweep", sweep_json}};
        return out;
    }

    std::vector<CriterionOutcome> run_all() {
        prefetch();
        return {criterion1(), criterion2(), criterion3(), criterion4(), criterion5(), criterion6()};
    }

private:
    static std::string key(const std::string& pattern, const std::string& bc) {
        return pattern + "|" + bc;
    }
    static std::string biaxial_name(double dx, double dy) {
        std::ostringstream os;
        os << "biaxial_" << dx << "_" << dy;
        return os.str();
    }

    PaperSuiteConfig cfg_;
    std::map<std::string, MaterialDomain> domains_;
    std::map<std::string, LoadCase> cases_;
};

}  // namespace kinecluster
