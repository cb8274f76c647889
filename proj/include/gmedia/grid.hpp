#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gmedia {

/// Tray discretization. Heights are in mm; `cell_size` is the side of one square cell.
struct GridSpec {
    int rows = 32;
    int cols = 64;
    double cell_size = 10.0;
    int divider_col = 32;
    double max_height = 150.0;

    /// Throws ArgumentError when any invariant fails.
    void validate() const;

    int cell_count() const { return rows * cols; }
    double cell_area() const { return cell_size * cell_size; }
    int index(int row, int col) const { return row * cols + col; }
    bool contains(int row, int col) const { return row >= 0 && row < rows && col >= 0 && col < cols; }

    bool operator==(const GridSpec&) const = default;
};

/// Continuous cell coordinates: x runs along columns, y along rows; the center of
/// cell (row r, col c) is (x = c, y = r).
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2&) const = default;
};

enum class Half { left, right };

Half other(Half half);
/// Half containing the (rounded) column.
Half half_of(const GridSpec& spec, double x);
/// Inclusive column range of a half.
int half_first_col(const GridSpec& spec, Half half);
int half_last_col(const GridSpec& spec, Half half);

/// One byte per cell; nonzero means the cell is selected.
class CellMask {
public:
    explicit CellMask(const GridSpec& spec, bool fill = false);

    static CellMask half(const GridSpec& spec, Half half);

    const GridSpec& spec() const { return spec_; }
    bool operator[](int index) const { return bits_[static_cast<std::size_t>(index)] != 0; }
    void set(int index, bool value) { bits_[static_cast<std::size_t>(index)] = value ? 1 : 0; }
    int count() const;

private:
    GridSpec spec_;
    std::vector<std::uint8_t> bits_;
};

/// Surface height of the media at every cell, row-major. Immutable once built.
class HeightMap {
public:
    /// All-zero map.
    explicit HeightMap(const GridSpec& spec);
    /// Checked construction: throws DimensionError on size mismatch and
    /// ArgumentError when a value is non-finite or outside [0, max_height].
    HeightMap(const GridSpec& spec, std::vector<double> heights);

    /// Clamps every value into [0, max_height]; non-finite values become 0.
    static HeightMap clamped(const GridSpec& spec, std::vector<double> heights);
    static HeightMap uniform(const GridSpec& spec, double height);

    const GridSpec& spec() const { return spec_; }
    std::span<const double> data() const { return heights_; }
    double at(int row, int col) const { return heights_[static_cast<std::size_t>(spec_.index(row, col))]; }
    double operator[](int index) const { return heights_[static_cast<std::size_t>(index)]; }

    /// Copy of the heights for building a modified map.
    std::vector<double> values() const { return heights_; }

    /// Each height rounded through f32, so the map survives a binary round trip unchanged.
    HeightMap quantized() const;

    bool operator==(const HeightMap& other) const = default;

private:
    GridSpec spec_;
    std::vector<double> heights_;
};

/// Mean absolute difference in mm. Throws DimensionError when specs differ.
double l1_distance(const HeightMap& a, const HeightMap& b);

/// Sum of height * cell area over all cells, or only the masked ones.
double total_volume(const HeightMap& h, const CellMask* region = nullptr);

/// Height-weighted centroid in cell coordinates; (0,0) for an empty map.
Point2 centroid(const HeightMap& h);

/// Adds a discretized Gaussian bump of exactly `volume` mm^3 centered at `center`.
/// The kernel is truncated to the grid (or to `region` when given) and renormalized.
/// Cells pushed above max_height shed their excess to their 4-neighbors until none overflow.
HeightMap deposit_gaussian(const HeightMap& h, Point2 center, double sigma, double volume,
                           const CellMask* region = nullptr);

/// Moves every cell above max_height back into range by iteratively passing the excess to
/// in-region 4-neighbors. Volume is preserved. Throws ArgumentError if the region cannot hold it.
void spread_overflow(std::vector<double>& heights, const GridSpec& spec, const CellMask* region);

/// Map with `half` filled to `height` mm and the rest empty.
HeightMap fill_half(const GridSpec& spec, Half half, double height);

enum class PileAnchor { top_left, top_right, bottom_left, bottom_right, center };

/// All five anchors, in a fixed order.
std::span<const PileAnchor> all_pile_anchors();
std::string to_string(PileAnchor anchor);
PileAnchor parse_pile_anchor(const std::string& name);

/// Anchor location inside a half: quadrant centers for the corners, the half's center otherwise.
Point2 anchor_point(const GridSpec& spec, Half half, PileAnchor anchor);

/// Goal holding all of h's volume as a Gaussian pile in `target`; the other half is empty.
/// The pile is shifted until its centroid sits on the anchor (wall truncation would otherwise
/// pull it inward).
HeightMap make_pile_goal(const HeightMap& h, Half target, PileAnchor anchor, double sigma);

/// Goal shaped like a grayscale raster (ASCII PGM), resampled onto `target` and scaled so its
/// volume equals h's. Bright pixels mean more media. Throws ParseError on malformed input
/// or an all-black raster.
HeightMap load_shape_goal(std::istream& pgm, const HeightMap& h, Half target);
HeightMap load_shape_goal(const std::string& path, const HeightMap& h, Half target);

/// "GMH1" binary height-map file.
void write_heightmap(std::ostream& out, const HeightMap& h);
void write_heightmap(const std::string& path, const HeightMap& h);
/// The file stores no divider or clamp; those come from `defaults`, whose rows/cols/cell_size
/// are replaced by the file's.
HeightMap read_heightmap(std::istream& in, const GridSpec& defaults = {});
HeightMap read_heightmap(const std::string& path, const GridSpec& defaults = {});

}  // namespace gmedia
