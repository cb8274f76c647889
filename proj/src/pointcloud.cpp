#include "gmedia/pointcloud.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>
#include <vector>

#include "gmedia/errors.hpp"

namespace gmedia {

std::array<double, 3> TrayPose::apply(const std::array<double, 3>& p) const {
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) {
        out[i] = translation[i];
        for (int j = 0; j < 3; ++j) {
            out[i] += rotation[i][j] * p[j];
        }
    }
    return out;
}

TrayPose parse_tray_pose(const std::string& json_text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed pose JSON: ") + e.what());
    }
    TrayPose pose;
    try {
        const auto& r = root.at("rotation");
        const auto& t = root.at("translation");
        if (!r.is_array() || r.size() != 3 || !t.is_array() || t.size() != 3) {
            throw ConfigError("");
        }
        for (int i = 0; i < 3; ++i) {
            if (!r[i].is_array() || r[i].size() != 3) {
                throw ConfigError("");
            }
            for (int j = 0; j < 3; ++j) {
                pose.rotation[i][j] = r[i][j].get<double>();
            }
            pose.translation[i] = t[i].get<double>();
        }
    } catch (const std::exception&) {
        throw ConfigError("pose needs a 3x3 \"rotation\" and a 3-element \"translation\"");
    }
    const auto& m = pose.rotation;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double dot = 0.0;
            for (int k = 0; k < 3; ++k) {
                dot += m[k][i] * m[k][j];
            }
            if (std::abs(dot - (i == j ? 1.0 : 0.0)) > 1e-6) {
                throw ConfigError("pose rotation is not orthonormal");
            }
        }
    }
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (det < 0.0) {
        throw ConfigError("pose rotation is a reflection");
    }
    return pose;
}

TrayPose load_tray_pose(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open pose '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_tray_pose(text.str());
}

HeightMap ingest_pointcloud(std::istream& points, const TrayPose& pose, const GridSpec& spec) {
    spec.validate();
    const double width = spec.cols * spec.cell_size;
    const double depth = spec.rows * spec.cell_size;
    std::vector<double> top(static_cast<std::size_t>(spec.cell_count()), -std::numeric_limits<double>::infinity());
    std::string line;
    int line_no = 0;
    while (std::getline(points, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream fields(line);
        std::array<double, 3> p{};
        if (!(fields >> p[0])) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                continue;
            }
            throw ParseError("expected three coordinates", line_no);
        }
        std::string extra;
        if (!(fields >> p[1] >> p[2]) || (fields >> extra)) {
            throw ParseError("expected exactly three coordinates", line_no);
        }
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) {
            throw ParseError("non-finite coordinate", line_no);
        }
        const auto q = pose.apply(p);
        const double x = q[0] * 1000.0;
        const double y = q[1] * 1000.0;
        if (!(x >= 0.0 && x < width && y >= 0.0 && y < depth)) {
            continue;
        }
        const int col = std::min(spec.cols - 1, static_cast<int>(x / spec.cell_size));
        const int row = std::min(spec.rows - 1, static_cast<int>(y / spec.cell_size));
        double& cell = top[static_cast<std::size_t>(spec.index(row, col))];
        cell = std::max(cell, q[2] * 1000.0);
    }
    if (points.bad()) {
        throw IoError("failed reading point cloud");
    }
    for (double& v : top) {
        v = std::isinf(v) ? 0.0 : std::clamp(v, 0.0, spec.max_height);
    }
    return HeightMap(spec, std::move(top));
}

HeightMap ingest_pointcloud(const std::string& path, const TrayPose& pose, const GridSpec& spec) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    return ingest_pointcloud(in, pose, spec);
}

}  // namespace gmedia
