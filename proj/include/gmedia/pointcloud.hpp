#pragma once

#include <array>
#include <iosfwd>
#include <string>

#include "gmedia/grid.hpp"

namespace gmedia {

/// Rigid transform from the camera frame to the tray frame, in meters: p_tray = R * p_cam + t.
/// The tray frame puts the outer corner of cell (0, 0) at the origin, x along columns,
/// y along rows and z up from the tray floor.
struct TrayPose {
    std::array<std::array<double, 3>, 3> rotation{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    std::array<double, 3> translation{0, 0, 0};

    std::array<double, 3> apply(const std::array<double, 3>& p) const;
};

/// JSON object {"rotation": [[...],[...],[...]], "translation": [x, y, z]}. Throws ConfigError
/// when malformed or when the rotation is not orthonormal with determinant +1.
TrayPose parse_tray_pose(const std::string& json_text);
TrayPose load_tray_pose(const std::string& path);

/// Projects ASCII "x y z" points (meters, camera frame; blank lines and '#' comments allowed)
/// onto the grid. Each cell takes the highest point above it, clamped to [0, max_height];
/// cells with no points are 0 and points outside the tray footprint are dropped.
/// Throws ParseError with the line number on a malformed line.
HeightMap ingest_pointcloud(std::istream& points, const TrayPose& pose, const GridSpec& spec);
HeightMap ingest_pointcloud(const std::string& path, const TrayPose& pose, const GridSpec& spec);

}  // namespace gmedia
