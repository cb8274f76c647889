#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gmedia/grid.hpp"
#include "gmedia/rng.hpp"

namespace gmedia {

/// Allowed angle ranges, in degrees.
inline constexpr double kMinScoopAngle = -45.0;
inline constexpr double kMaxScoopAngle = 45.0;
inline constexpr double kMinRollAngle = 0.0;
inline constexpr double kMaxRollAngle = 90.0;
/// Dump location must stay this many cells away from the tray walls.
inline constexpr double kDumpMargin = 1.0;

/// The nine scoop & dump parameters. Locations are cell coordinates; angles are degrees.
struct ScoopDumpParams {
    Point2 start;
    Point2 end;
    double start_angle = 0.0;
    double end_angle = 0.0;
    double roll_angle = 0.0;
    Point2 dump;

    static constexpr std::size_t kDims = 9;

    /// Field order: start.x, start.y, end.x, end.y, start_angle, end_angle, roll_angle, dump.x, dump.y.
    std::array<double, kDims> to_array() const;
    static ScoopDumpParams from_array(std::span<const double> values);

    bool operator==(const ScoopDumpParams&) const = default;
};

/// Every violated invariant, as human-readable strings; empty when valid.
std::vector<std::string> validate(const ScoopDumpParams& p, const GridSpec& spec);
/// Throws ValidationError listing the violations.
void require_valid(const ScoopDumpParams& p, const GridSpec& spec);

/// Rounds the three locations to the nearest cell centers.
ScoopDumpParams snap_to_grid(const ScoopDumpParams& p);

/// Lower/upper bound per parameter, in `to_array` order.
struct ParamBounds {
    std::array<double, ScoopDumpParams::kDims> lower{};
    std::array<double, ScoopDumpParams::kDims> upper{};
};
ParamBounds param_bounds(const GridSpec& spec);

/// Uniform draw inside param_bounds, snapped to the grid, redrawn until valid.
/// Throws SamplingError after `max_tries` invalid draws.
ScoopDumpParams sample_valid_params(const GridSpec& spec, Pcg32& rng, int max_tries = 10000);

/// Clamped scalar projection of `point` onto the start->end segment, in [0, 1].
double segment_parameter(const ScoopDumpParams& p, Point2 point);

/// Scoop angle at `point`, linearly interpolated between the start and end angles.
double interpolated_scoop_angle(const ScoopDumpParams& p, Point2 point);

struct Cell {
    int row = 0;
    int col = 0;

    bool operator==(const Cell&) const = default;
};

/// Bresenham line between two cells, inclusive, ordered from `from` to `to`.
std::vector<Cell> rasterize_line(Cell from, Cell to);

/// A cell swept by the scoop blade.
struct SwathCell {
    int index = 0;      // row-major cell index
    double t = 0.0;     // projection parameter along start->end
    double angle = 0.0; // interpolated scoop angle at the cell
};

/// Cells whose centers lie within width/2 (mm) of the start->end segment and project onto it,
/// sorted by t (ties by index).
std::vector<SwathCell> scoop_swath(const ScoopDumpParams& p, const GridSpec& spec, double width_mm);

/// Six-channel rendering of the action, pixel-aligned with the height map.
///   0: 1 - t along the rasterized line   1: t along the line   2: dump dot
///   3: start angle   4: end angle   5: roll angle   (angles normalized to [0, 1])
class ActionMap {
public:
    static constexpr int kChannels = 6;

    explicit ActionMap(const GridSpec& spec);

    const GridSpec& spec() const { return spec_; }
    float at(int channel, int row, int col) const {
        return data_[static_cast<std::size_t>((channel * spec_.rows + row) * spec_.cols + col)];
    }
    float& at(int channel, int row, int col) {
        return data_[static_cast<std::size_t>((channel * spec_.rows + row) * spec_.cols + col)];
    }
    /// Channel-major buffer (C, H, W).
    std::span<const float> data() const { return data_; }

    bool operator==(const ActionMap&) const = default;

private:
    GridSpec spec_;
    std::vector<float> data_;
};

ActionMap render_action_map(const ScoopDumpParams& p, const GridSpec& spec);

/// Nine little-endian f32 values in `to_array` order.
void write_params(std::ostream& out, const ScoopDumpParams& p);
ScoopDumpParams read_params(std::istream& in);
void write_params(const std::string& path, const ScoopDumpParams& p);
ScoopDumpParams read_params(const std::string& path);

}  // namespace gmedia
