#include "gmedia/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include "gmedia/binary_io.hpp"
#include "gmedia/errors.hpp"
#include "gmedia/pgm.hpp"

namespace gmedia {

void GridSpec::validate() const {
    if (rows < 16 || cols < 16 || rows % 16 != 0 || cols % 16 != 0) {
        throw ArgumentError("grid rows and cols must be >= 16 and divisible by 16");
    }
    if (divider_col <= 0 || divider_col >= cols) {
        throw ArgumentError("divider column must lie strictly inside the grid");
    }
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
        throw ArgumentError("cell size must be positive");
    }
    if (!(max_height > 0.0) || !std::isfinite(max_height)) {
        throw ArgumentError("max height must be positive");
    }
}

Half other(Half half) { return half == Half::left ? Half::right : Half::left; }

Half half_of(const GridSpec& spec, double x) {
    return std::lround(x) < spec.divider_col ? Half::left : Half::right;
}

int half_first_col(const GridSpec& spec, Half half) { return half == Half::left ? 0 : spec.divider_col; }

int half_last_col(const GridSpec& spec, Half half) {
    return half == Half::left ? spec.divider_col - 1 : spec.cols - 1;
}

CellMask::CellMask(const GridSpec& spec, bool fill)
    : spec_(spec), bits_(static_cast<std::size_t>(spec.cell_count()), fill ? 1 : 0) {}

CellMask CellMask::half(const GridSpec& spec, Half half) {
    CellMask mask(spec);
    const int first = half_first_col(spec, half);
    const int last = half_last_col(spec, half);
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = first; c <= last; ++c) {
            mask.set(spec.index(r, c), true);
        }
    }
    return mask;
}

int CellMask::count() const {
    return static_cast<int>(std::count_if(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; }));
}

HeightMap::HeightMap(const GridSpec& spec)
    : spec_(spec), heights_(static_cast<std::size_t>(spec.cell_count()), 0.0) {}

HeightMap::HeightMap(const GridSpec& spec, std::vector<double> heights) : spec_(spec), heights_(std::move(heights)) {
    if (heights_.size() != static_cast<std::size_t>(spec_.cell_count())) {
        throw DimensionError("height map has " + std::to_string(heights_.size()) + " values, grid needs " +
                             std::to_string(spec_.cell_count()));
    }
    for (double v : heights_) {
        if (!std::isfinite(v) || v < 0.0 || v > spec_.max_height) {
            throw ArgumentError("height " + std::to_string(v) + " outside [0, max_height]");
        }
    }
}

HeightMap HeightMap::clamped(const GridSpec& spec, std::vector<double> heights) {
    for (double& v : heights) {
        v = std::isfinite(v) ? std::clamp(v, 0.0, spec.max_height) : 0.0;
    }
    return HeightMap(spec, std::move(heights));
}

HeightMap HeightMap::uniform(const GridSpec& spec, double height) {
    return HeightMap(spec, std::vector<double>(static_cast<std::size_t>(spec.cell_count()), height));
}

HeightMap HeightMap::quantized() const {
    std::vector<double> out(heights_.size());
    std::transform(heights_.begin(), heights_.end(), out.begin(),
                   [](double v) { return static_cast<double>(static_cast<float>(v)); });
    return clamped(spec_, std::move(out));
}

double l1_distance(const HeightMap& a, const HeightMap& b) {
    if (a.spec() != b.spec()) {
        throw DimensionError("l1_distance: grid specs differ");
    }
    const auto da = a.data();
    const auto db = b.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        sum += std::abs(da[i] - db[i]);
    }
    return sum / static_cast<double>(da.size());
}

double total_volume(const HeightMap& h, const CellMask* region) {
    if (region != nullptr && region->spec() != h.spec()) {
        throw DimensionError("total_volume: mask does not match grid");
    }
    double sum = 0.0;
    const auto data = h.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (region == nullptr || (*region)[static_cast<int>(i)]) {
            sum += data[i];
        }
    }
    return sum * h.spec().cell_area();
}

Point2 centroid(const HeightMap& h) {
    const GridSpec& spec = h.spec();
    double mass = 0.0;
    double sx = 0.0;
    double sy = 0.0;
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const double v = h.at(r, c);
            mass += v;
            sx += v * c;
            sy += v * r;
        }
    }
    if (mass <= 0.0) {
        return {};
    }
    return {sx / mass, sy / mass};
}

void spread_overflow(std::vector<double>& heights, const GridSpec& spec, const CellMask* region) {
    const double cap = spec.max_height;
    auto in_region = [&](int idx) { return region == nullptr || (*region)[idx]; };

    double region_volume = 0.0;
    double excess = 0.0;
    int region_cells = 0;
    for (int i = 0; i < spec.cell_count(); ++i) {
        if (in_region(i)) {
            region_volume += heights[static_cast<std::size_t>(i)];
            excess += std::max(0.0, heights[static_cast<std::size_t>(i)] - cap);
            ++region_cells;
        }
    }
    if (excess == 0.0) {
        return;
    }
    if (region_volume > cap * region_cells * (1.0 + 1e-12)) {
        throw ArgumentError("region cannot hold the deposited volume below max_height");
    }

    const double tolerance = 1e-13 * std::max(region_volume, 1.0);
    constexpr int kMaxSweeps = 200000;
    std::array<int, 4> neighbors{};
    for (int sweep = 0; sweep < kMaxSweeps && excess > tolerance; ++sweep) {
        for (int r = 0; r < spec.rows; ++r) {
            for (int c = 0; c < spec.cols; ++c) {
                const int idx = spec.index(r, c);
                double& v = heights[static_cast<std::size_t>(idx)];
                if (!in_region(idx) || v <= cap) {
                    continue;
                }
                int count = 0;
                const int cand[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
                for (const auto& rc : cand) {
                    if (spec.contains(rc[0], rc[1]) && in_region(spec.index(rc[0], rc[1]))) {
                        neighbors[static_cast<std::size_t>(count++)] = spec.index(rc[0], rc[1]);
                    }
                }
                if (count == 0) {
                    throw ArgumentError("overflowing cell has no neighbor to shed into");
                }
                const double share = (v - cap) / count;
                v = cap;
                for (int k = 0; k < count; ++k) {
                    heights[static_cast<std::size_t>(neighbors[static_cast<std::size_t>(k)])] += share;
                }
            }
        }
        excess = 0.0;
        for (int i = 0; i < spec.cell_count(); ++i) {
            if (in_region(i)) {
                excess += std::max(0.0, heights[static_cast<std::size_t>(i)] - cap);
            }
        }
    }
    for (double& v : heights) {
        v = std::min(v, cap);
    }
}

HeightMap deposit_gaussian(const HeightMap& h, Point2 center, double sigma, double volume, const CellMask* region) {
    if (!std::isfinite(volume) || volume < 0.0) {
        throw ArgumentError("deposit volume must be finite and non-negative");
    }
    if (!std::isfinite(sigma) || sigma <= 0.0) {
        throw ArgumentError("deposit sigma must be positive");
    }
    if (!std::isfinite(center.x) || !std::isfinite(center.y)) {
        throw ArgumentError("deposit center must be finite");
    }
    const GridSpec& spec = h.spec();
    if (region != nullptr && region->spec() != spec) {
        throw DimensionError("deposit_gaussian: mask does not match grid");
    }
    if (volume == 0.0) {
        return h;
    }

    const int n = spec.cell_count();
    std::vector<double> exponent(static_cast<std::size_t>(n), -std::numeric_limits<double>::infinity());
    double peak = -std::numeric_limits<double>::infinity();
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const int idx = spec.index(r, c);
            if (region != nullptr && !(*region)[idx]) {
                continue;
            }
            const double dx = c - center.x;
            const double dy = r - center.y;
            const double e = -(dx * dx + dy * dy) * inv;
            exponent[static_cast<std::size_t>(idx)] = e;
            peak = std::max(peak, e);
        }
    }
    if (!std::isfinite(peak)) {
        throw ArgumentError("deposit region is empty");
    }
    double weight_sum = 0.0;
    for (double& e : exponent) {
        e = std::exp(e - peak);
        weight_sum += e;
    }
    std::vector<double> out = h.values();
    const double scale = volume / spec.cell_area() / weight_sum;
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] += scale * exponent[static_cast<std::size_t>(i)];
    }
    spread_overflow(out, spec, region);
    return HeightMap::clamped(spec, std::move(out));
}

HeightMap fill_half(const GridSpec& spec, Half half, double height) {
    if (!(height >= 0.0) || height > spec.max_height) {
        throw ArgumentError("fill height outside [0, max_height]");
    }
    std::vector<double> data(static_cast<std::size_t>(spec.cell_count()), 0.0);
    const int first = half_first_col(spec, half);
    const int last = half_last_col(spec, half);
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = first; c <= last; ++c) {
            data[static_cast<std::size_t>(spec.index(r, c))] = height;
        }
    }
    return HeightMap(spec, std::move(data));
}

std::span<const PileAnchor> all_pile_anchors() {
    static constexpr std::array<PileAnchor, 5> kAnchors = {PileAnchor::top_left, PileAnchor::top_right,
                                                           PileAnchor::bottom_left, PileAnchor::bottom_right,
                                                           PileAnchor::center};
    return kAnchors;
}

std::string to_string(PileAnchor anchor) {
    switch (anchor) {
        case PileAnchor::top_left: return "top_left";
        case PileAnchor::top_right: return "top_right";
        case PileAnchor::bottom_left: return "bottom_left";
        case PileAnchor::bottom_right: return "bottom_right";
        case PileAnchor::center: return "center";
    }
    return "center";
}

PileAnchor parse_pile_anchor(const std::string& name) {
    for (PileAnchor a : all_pile_anchors()) {
        if (to_string(a) == name) {
            return a;
        }
    }
    throw ArgumentError("unknown pile anchor '" + name + "'");
}

Point2 anchor_point(const GridSpec& spec, Half half, PileAnchor anchor) {
    const double first = half_first_col(spec, half);
    const double width = half_last_col(spec, half) - half_first_col(spec, half) + 1;
    const double height = spec.rows;
    const double left = first + width / 4.0 - 0.5;
    const double right = first + 3.0 * width / 4.0 - 0.5;
    const double top = height / 4.0 - 0.5;
    const double bottom = 3.0 * height / 4.0 - 0.5;
    switch (anchor) {
        case PileAnchor::top_left: return {left, top};
        case PileAnchor::top_right: return {right, top};
        case PileAnchor::bottom_left: return {left, bottom};
        case PileAnchor::bottom_right: return {right, bottom};
        case PileAnchor::center: break;
    }
    return {first + width / 2.0 - 0.5, height / 2.0 - 0.5};
}

HeightMap make_pile_goal(const HeightMap& h, Half target, PileAnchor anchor, double sigma) {
    const GridSpec& spec = h.spec();
    const double volume = total_volume(h);
    if (volume <= 0.0) {
        return HeightMap(spec);
    }
    const CellMask mask = CellMask::half(spec, target);
    const Point2 want = anchor_point(spec, target, anchor);
    const HeightMap empty(spec);
    Point2 center = want;
    HeightMap goal = deposit_gaussian(empty, center, sigma, volume, &mask);
    // Fixed-point iteration: the centroid moves monotonically (and no faster than) the center.
    for (int iter = 0; iter < 100; ++iter) {
        const Point2 got = centroid(goal);
        const double dx = want.x - got.x;
        const double dy = want.y - got.y;
        if (std::hypot(dx, dy) < 1e-4) {
            break;
        }
        center.x += dx;
        center.y += dy;
        goal = deposit_gaussian(empty, center, sigma, volume, &mask);
    }
    return goal;
}

HeightMap load_shape_goal(std::istream& pgm, const HeightMap& h, Half target) {
    const Raster raster = read_pgm(pgm);
    long long mass = 0;
    for (int v : raster.pixels) {
        mass += v;
    }
    if (mass == 0) {
        throw ParseError("zero-mass goal");
    }

    const GridSpec& spec = h.spec();
    const double volume = total_volume(h);
    if (volume <= 0.0) {
        return HeightMap(spec);
    }
    const int first = half_first_col(spec, target);
    const int width = half_last_col(spec, target) - first + 1;
    const double sx = static_cast<double>(raster.width) / width;
    const double sy = static_cast<double>(raster.height) / spec.rows;

    std::vector<double> intensity(static_cast<std::size_t>(spec.cell_count()), 0.0);
    double intensity_sum = 0.0;
    for (int r = 0; r < spec.rows; ++r) {
        for (int j = 0; j < width; ++j) {
            // Box-average the pixels whose centers fall inside this cell's footprint.
            const int px0 = static_cast<int>(std::ceil(j * sx - 0.5));
            const int px1 = static_cast<int>(std::ceil((j + 1) * sx - 0.5));
            const int py0 = static_cast<int>(std::ceil(r * sy - 0.5));
            const int py1 = static_cast<int>(std::ceil((r + 1) * sy - 0.5));
            double sum = 0.0;
            int count = 0;
            for (int py = std::max(py0, 0); py < std::min(py1, raster.height); ++py) {
                for (int px = std::max(px0, 0); px < std::min(px1, raster.width); ++px) {
                    sum += raster.at(py, px);
                    ++count;
                }
            }
            double value = 0.0;
            if (count > 0) {
                value = sum / count;
            } else {
                const int px = std::clamp(static_cast<int>((j + 0.5) * sx), 0, raster.width - 1);
                const int py = std::clamp(static_cast<int>((r + 0.5) * sy), 0, raster.height - 1);
                value = raster.at(py, px);
            }
            value /= raster.max_value;
            intensity[static_cast<std::size_t>(spec.index(r, first + j))] = value;
            intensity_sum += value;
        }
    }
    if (intensity_sum <= 0.0) {
        throw ParseError("zero-mass goal after resampling");
    }
    const double scale = volume / (intensity_sum * spec.cell_area());
    for (double& v : intensity) {
        v *= scale;
    }
    const CellMask mask = CellMask::half(spec, target);
    spread_overflow(intensity, spec, &mask);
    return HeightMap::clamped(spec, std::move(intensity));
}

HeightMap load_shape_goal(const std::string& path, const HeightMap& h, Half target) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open raster '" + path + "'");
    }
    return load_shape_goal(in, h, target);
}

void write_heightmap(std::ostream& out, const HeightMap& h) {
    const GridSpec& spec = h.spec();
    binary::write_magic(out, "GMH1");
    binary::write_u32(out, static_cast<std::uint32_t>(spec.rows));
    binary::write_u32(out, static_cast<std::uint32_t>(spec.cols));
    binary::write_f32(out, static_cast<float>(spec.cell_size));
    for (double v : h.data()) {
        binary::write_f32(out, static_cast<float>(v));
    }
    if (!out) {
        throw IoError("failed writing height map");
    }
}

void write_heightmap(const std::string& path, const HeightMap& h) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    write_heightmap(out, h);
}

HeightMap read_heightmap(std::istream& in, const GridSpec& defaults) {
    binary::expect_magic(in, "GMH1");
    GridSpec spec = defaults;
    spec.rows = static_cast<int>(binary::read_u32(in));
    spec.cols = static_cast<int>(binary::read_u32(in));
    spec.cell_size = binary::read_f32(in);
    if (spec.cols != defaults.cols) {
        spec.divider_col = spec.cols / 2;
    }
    spec.validate();
    std::vector<double> data(static_cast<std::size_t>(spec.cell_count()));
    for (double& v : data) {
        v = binary::read_f32(in);
    }
    try {
        return HeightMap(spec, std::move(data));
    } catch (const ArgumentError& e) {
        throw IoError(std::string("invalid height map file: ") + e.what());
    }
}

HeightMap read_heightmap(const std::string& path, const GridSpec& defaults) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    return read_heightmap(in, defaults);
}

}  // namespace gmedia
