#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinecluster/image.hpp"
#include "kinecluster/kinematics.hpp"
#include "kinecluster/labeling.hpp"
#include "kinecluster/markers.hpp"

namespace kinecluster {

// Shortest round-trip decimal representation (std::to_chars), so a file read
// back and rewritten is byte-identical.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw IoError("csv: cannot parse number '" + std::string(s) + "'");
    return v;
}

inline long parse_long(std::string_view s) {
    long v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw IoError("csv: cannot parse integer '" + std::string(s) + "'");
    return v;
}

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

// "# key1=v1,key2=v2" metadata comment line
inline std::map<std::string, std::string> parse_meta_line(std::string_view line) {
    std::map<std::string, std::string> meta;
    if (line.empty() || line[0] != '#') return meta;
    line.remove_prefix(1);
    for (std::string_view item : split_csv(line)) {
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) continue;
        meta.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    }
    return meta;
}

inline std::ofstream open_out(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return in;
}

}  // namespace detail

// --- markers.csv -----------------------------------------------------------

inline void write_markers_csv(const std::string& path, const MarkerSet& markers) {
    auto out = detail::open_out(path);
    out << "x_ref,y_ref,u_x,u_y\n";
    for (int i = 0; i < markers.size(); ++i)
        out << format_double(markers.ref(i, 0)) << ',' << format_double(markers.ref(i, 1)) << ','
            << format_double(markers.disp(i, 0)) << ',' << format_double(markers.disp(i, 1)) << '\n';
}

inline MarkerSet read_markers_csv(const std::string& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    if (line != "x_ref,y_ref,u_x,u_y")
        throw IoError(path + ": unexpected header '" + line + "' (want x_ref,y_ref,u_x,u_y)");
    std::vector<std::array<double, 4>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != 4) throw IoError(path + ": malformed row '" + line + "'");
        rows.push_back({parse_double(f[0]), parse_double(f[1]), parse_double(f[2]), parse_double(f[3])});
    }
    MarkerSet m;
    m.provenance = "external";
    m.ref.resize(rows.size(), 2);
    m.disp.resize(rows.size(), 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m.ref(i, 0) = rows[i][0];
        m.ref(i, 1) = rows[i][1];
        m.disp(i, 0) = rows[i][2];
        m.disp(i, 1) = rows[i][3];
    }
    m.validate();
    return m;
}

// --- features.csv ----------------------------------------------------------

inline void write_features_csv(const std::string& path, const FeatureMatrix& f) {
    auto out = detail::open_out(path);
    out << "# kind=" << to_string(f.kind) << ",grid=" << f.grid.rows << 'x' << f.grid.cols
        << ",standardized=" << (f.standardized ? 1 : 0) << '\n';
    const auto names = feature_column_names(f.kind);
    for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
    out << '\n';
    for (int i = 0; i < f.rows(); ++i) {
        for (int c = 0; c < f.cols(); ++c) out << (c ? "," : "") << format_double(f.values(i, c));
        out << '\n';
    }
}

inline FeatureMatrix read_features_csv(const std::string& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    FeatureMatrix f;
    if (!line.empty() && line[0] == '#') {
        const auto meta = detail::parse_meta_line(line);
        if (auto it = meta.find("kind"); it != meta.end()) f.kind = feature_kind_from_string(it->second);
        if (auto it = meta.find("grid"); it != meta.end()) {
            const auto xpos = it->second.find('x');
            f.grid.rows = static_cast<int>(parse_long(std::string_view(it->second).substr(0, xpos)));
            f.grid.cols = static_cast<int>(parse_long(std::string_view(it->second).substr(xpos + 1)));
        }
        if (auto it = meta.find("standardized"); it != meta.end()) f.standardized = it->second == "1";
        if (!std::getline(in, line)) throw IoError(path + ": missing header");
    }
    const int d = static_cast<int>(detail::split_csv(line).size());  // header row
    std::vector<double> flat;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = detail::split_csv(line);
        if (static_cast<int>(fields.size()) != d) throw IoError(path + ": inconsistent column count");
        for (const auto& v : fields) flat.push_back(parse_double(v));
        ++rows;
    }
    f.values.resize(rows, d);
    for (int i = 0; i < rows; ++i)
        for (int c = 0; c < d; ++c) f.values(i, c) = flat[static_cast<std::size_t>(i) * d + c];
    if (f.grid.valid() && f.grid.size() != rows)
        throw IoError(path + ": row count does not match the declared grid");
    return f;
}

// --- labels.csv ------------------------------------------------------------

inline void write_labels_csv(const std::string& path, const Labeling& labeling) {
    auto out = detail::open_out(path);
    out << "# method=" << (labeling.method.empty() ? "unknown" : labeling.method)
        << ",k=" << labeling.num_clusters;
    if (labeling.grid.valid()) out << ",grid=" << labeling.grid.rows << 'x' << labeling.grid.cols;
    for (const auto& [key, value] : labeling.params)
        if (key != "k") out << ',' << key << '=' << value;
    out << '\n';
    out << "label\n";
    for (int l : labeling.labels) out << l << '\n';
}

inline Labeling read_labels_csv(const std::string& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    Labeling lab;
    if (!line.empty() && line[0] == '#') {
        const auto meta = detail::parse_meta_line(line);
        if (auto it = meta.find("method"); it != meta.end()) lab.method = it->second;
        if (auto it = meta.find("grid"); it != meta.end()) {
            const auto xpos = it->second.find('x');
            lab.grid.rows = static_cast<int>(parse_long(std::string_view(it->second).substr(0, xpos)));
            lab.grid.cols = static_cast<int>(parse_long(std::string_view(it->second).substr(xpos + 1)));
        }
        for (const auto& [key, value] : meta)
            if (key != "method" && key != "grid") lab.params[key] = value;
        if (!std::getline(in, line)) throw IoError(path + ": missing header");
    }
    if (line != "label") throw IoError(path + ": unexpected header '" + line + "'");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        lab.labels.push_back(static_cast<int>(parse_long(line)));
    }
    int max_label = -1;
    for (int l : lab.labels) max_label = std::max(max_label, l);
    lab.num_clusters = max_label + 1;
    if (auto it = lab.params.find("k"); it != lab.params.end())
        lab.num_clusters = std::max<int>(lab.num_clusters, static_cast<int>(parse_long(it->second)));
    return lab;
}

// --- ground_truth.csv ------------------------------------------------------

inline void write_ground_truth_csv(const std::string& path, const GridField& grid,
                                   const std::vector<int>& labels) {
    if (static_cast<int>(labels.size()) != grid.num_nodes())
        throw ValidationError("ground truth: label count does not match grid");
    auto out = detail::open_out(path);
    out << "x,y,label\n";
    for (int i = 0; i < grid.num_nodes(); ++i) {
        const Vec2 p = grid.node_pos(i);
        out << format_double(p.x()) << ',' << format_double(p.y()) << ',' << labels[i] << '\n';
    }
}

inline Labeling read_ground_truth_csv(const std::string& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    if (line != "x,y,label") throw IoError(path + ": unexpected header '" + line + "'");
    std::vector<int> labels;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != 3) throw IoError(path + ": malformed row");
        labels.push_back(static_cast<int>(parse_long(f[2])));
    }
    Labeling lab = Labeling::from_labels(std::move(labels), "ground_truth");
    const int R = static_cast<int>(std::lround(std::sqrt(static_cast<double>(lab.size()))));
    if (R * R == lab.size()) lab.grid = {R, R};
    return lab;
}

// --- heatmaps ----------------------------------------------------------------

// Deterministic label palette (golden-angle hue wheel; label 0 stays dark
// gray so backgrounds read as background).
inline std::array<std::uint8_t, 3> label_color(int label) {
    if (label == 0) return {64, 64, 64};
    const double hue = std::fmod(0.61803398875 * label, 1.0) * 6.0;
    const double s = 0.68, v = 0.95;
    const int sector = static_cast<int>(hue) % 6;
    const double frac = hue - std::floor(hue);
    const double p = v * (1 - s), q = v * (1 - s * frac), t = v * (1 - s * (1 - frac));
    double r = 0, g = 0, b = 0;
    switch (sector) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        case 5: r = v; g = p; b = q; break;
    }
    return {static_cast<std::uint8_t>(std::lround(r * 255)),
            static_cast<std::uint8_t>(std::lround(g * 255)),
            static_cast<std::uint8_t>(std::lround(b * 255))};
}

// Scalar field -> min-max scaled PGM; the scaling is recorded in a sidecar
// JSON next to the image. Image row 0 corresponds to physical y = 1.
inline void emit_scalar_heatmap(const Eigen::VectorXd& values, const GridShape& grid,
                                const std::string& path) {
    if (!grid.valid() || grid.size() != values.size())
        throw ValidationError("emit_heatmap: values do not match the grid");
    const double lo = values.minCoeff(), hi = values.maxCoeff();
    const double scale = (hi > lo) ? 255.0 / (hi - lo) : 0.0;
    GrayImage img;
    img.width = grid.cols;
    img.height = grid.rows;
    img.pixels.resize(static_cast<std::size_t>(grid.size()));
    for (int row = 0; row < grid.rows; ++row)
        for (int col = 0; col < grid.cols; ++col) {
            const double v = values[grid.index(grid.rows - 1 - row, col)];
            img.pixels[static_cast<std::size_t>(row) * grid.cols + col] =
                static_cast<std::uint8_t>(std::lround((v - lo) * scale));
        }
    write_pgm(path, img);
    nlohmann::json side{{"min", lo}, {"max", hi}, {"rows", grid.rows}, {"cols", grid.cols},
                        {"row0", "y=1"}};
    detail::open_out(path + ".json") << side.dump(2) << '\n';
}

// Label image -> indexed PPM + sidecar palette. Row 0 = physical y = 1.
inline void emit_label_heatmap(const Labeling& labeling, const std::string& path) {
    if (!labeling.grid.valid()) throw ValidationError("emit_heatmap: labeling has no grid shape");
    labeling.check_consistent();
    const GridShape grid = labeling.grid;
    RgbImage img;
    img.width = grid.cols;
    img.height = grid.rows;
    img.pixels.resize(static_cast<std::size_t>(grid.size()));
    for (int row = 0; row < grid.rows; ++row)
        for (int col = 0; col < grid.cols; ++col)
            img.pixels[static_cast<std::size_t>(row) * grid.cols + col] =
                label_color(labeling.labels[grid.index(grid.rows - 1 - row, col)]);
    write_ppm(path, img);
    nlohmann::json palette = nlohmann::json::array();
    for (int l = 0; l < labeling.num_clusters; ++l) {
        const auto c = label_color(l);
        palette.push_back({{"label", l}, {"rgb", {c[0], c[1], c[2]}}});
    }
    nlohmann::json side{{"rows", grid.rows}, {"cols", grid.cols}, {"row0", "y=1"},
                        {"num_clusters", labeling.num_clusters}, {"palette", palette}};
    detail::open_out(path + ".json") << side.dump(2) << '\n';
}

// Inverse of emit_label_heatmap via the sidecar palette.
inline Labeling read_label_heatmap(const std::string& path) {
    const RgbImage img = read_ppm(path);
    nlohmann::json side;
    detail::open_in(path + ".json") >> side;
    std::map<std::array<std::uint8_t, 3>, int> color_to_label;
    for (const auto& entry : side.at("palette")) {
        const auto rgb = entry.at("rgb");
        color_to_label[{rgb[0].get<std::uint8_t>(), rgb[1].get<std::uint8_t>(),
                        rgb[2].get<std::uint8_t>()}] = entry.at("label").get<int>();
    }
    Labeling lab;
    lab.grid = {img.height, img.width};
    lab.labels.assign(lab.grid.size(), 0);
    for (int row = 0; row < img.height; ++row)
        for (int col = 0; col < img.width; ++col) {
            const auto it = color_to_label.find(img.at(row, col));
            if (it == color_to_label.end()) throw IoError(path + ": pixel color not in palette");
            lab.labels[lab.grid.index(img.height - 1 - row, col)] = it->second;
        }
    lab.num_clusters = side.at("num_clusters").get<int>();
    lab.method = "heatmap";
    return lab;
}

}  // namespace kinecluster
