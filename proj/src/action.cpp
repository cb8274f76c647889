#include "gmedia/action.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gmedia/binary_io.hpp"
#include "gmedia/errors.hpp"

namespace gmedia {
namespace {

Cell nearest_cell(Point2 p) { return {static_cast<int>(std::lround(p.y)), static_cast<int>(std::lround(p.x))}; }

bool inside(double v, double lo, double hi) { return v >= lo && v <= hi; }

float normalized(double value, double lo, double hi) { return static_cast<float>((value - lo) / (hi - lo)); }

}  // namespace

std::array<double, ScoopDumpParams::kDims> ScoopDumpParams::to_array() const {
    return {start.x, start.y, end.x, end.y, start_angle, end_angle, roll_angle, dump.x, dump.y};
}

ScoopDumpParams ScoopDumpParams::from_array(std::span<const double> v) {
    if (v.size() != kDims) {
        throw DimensionError("scoop & dump parameters need exactly 9 values");
    }
    ScoopDumpParams p;
    p.start = {v[0], v[1]};
    p.end = {v[2], v[3]};
    p.start_angle = v[4];
    p.end_angle = v[5];
    p.roll_angle = v[6];
    p.dump = {v[7], v[8]};
    return p;
}

std::vector<std::string> validate(const ScoopDumpParams& p, const GridSpec& spec) {
    std::vector<std::string> problems;
    const auto values = p.to_array();
    if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
        problems.emplace_back("non-finite parameter");
        return problems;
    }
    const double max_x = spec.cols - 1;
    const double max_y = spec.rows - 1;
    const bool start_in = inside(p.start.x, 0, max_x) && inside(p.start.y, 0, max_y);
    const bool end_in = inside(p.end.x, 0, max_x) && inside(p.end.y, 0, max_y);
    if (!start_in) {
        problems.emplace_back("start outside tray");
    }
    if (!end_in) {
        problems.emplace_back("end outside tray");
    }
    if (nearest_cell(p.start) == nearest_cell(p.end)) {
        problems.emplace_back("degenerate segment");
    }
    if (start_in && end_in && half_of(spec, p.start.x) != half_of(spec, p.end.x)) {
        problems.emplace_back("crosses divider");
    }
    if (!inside(p.dump.x, kDumpMargin, max_x - kDumpMargin) || !inside(p.dump.y, kDumpMargin, max_y - kDumpMargin)) {
        problems.emplace_back("dump outside interior margin");
    }
    if (!inside(p.start_angle, kMinScoopAngle, kMaxScoopAngle)) {
        problems.emplace_back("start angle out of range");
    }
    if (!inside(p.end_angle, kMinScoopAngle, kMaxScoopAngle)) {
        problems.emplace_back("end angle out of range");
    }
    if (!inside(p.roll_angle, kMinRollAngle, kMaxRollAngle)) {
        problems.emplace_back("roll angle out of range");
    }
    return problems;
}

void require_valid(const ScoopDumpParams& p, const GridSpec& spec) {
    const auto problems = validate(p, spec);
    if (problems.empty()) {
        return;
    }
    std::ostringstream msg;
    msg << "invalid scoop & dump parameters:";
    for (const auto& problem : problems) {
        msg << ' ' << problem << ';';
    }
    throw ValidationError(msg.str());
}

ScoopDumpParams snap_to_grid(const ScoopDumpParams& p) {
    auto snap = [](Point2 q) { return Point2{std::round(q.x), std::round(q.y)}; };
    ScoopDumpParams out = p;
    out.start = snap(p.start);
    out.end = snap(p.end);
    out.dump = snap(p.dump);
    return out;
}

ParamBounds param_bounds(const GridSpec& spec) {
    const double max_x = spec.cols - 1;
    const double max_y = spec.rows - 1;
    ParamBounds b;
    b.lower = {0, 0, 0, 0, kMinScoopAngle, kMinScoopAngle, kMinRollAngle, kDumpMargin, kDumpMargin};
    b.upper = {max_x, max_y, max_x, max_y, kMaxScoopAngle, kMaxScoopAngle, kMaxRollAngle, max_x - kDumpMargin,
               max_y - kDumpMargin};
    return b;
}

ScoopDumpParams sample_valid_params(const GridSpec& spec, Pcg32& rng, int max_tries) {
    const ParamBounds b = param_bounds(spec);
    std::array<double, ScoopDumpParams::kDims> v{};
    for (int attempt = 0; attempt < max_tries; ++attempt) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = rng.uniform(b.lower[i], b.upper[i]);
        }
        const ScoopDumpParams p = snap_to_grid(ScoopDumpParams::from_array(v));
        if (validate(p, spec).empty()) {
            return p;
        }
    }
    throw SamplingError("no valid action after " + std::to_string(max_tries) + " draws");
}

double segment_parameter(const ScoopDumpParams& p, Point2 point) {
    const double dx = p.end.x - p.start.x;
    const double dy = p.end.y - p.start.y;
    const double len2 = dx * dx + dy * dy;
    if (len2 <= 0.0) {
        return 0.0;
    }
    const double t = ((point.x - p.start.x) * dx + (point.y - p.start.y) * dy) / len2;
    return std::clamp(t, 0.0, 1.0);
}

double interpolated_scoop_angle(const ScoopDumpParams& p, Point2 point) {
    const double t = segment_parameter(p, point);
    return p.start_angle + t * (p.end_angle - p.start_angle);
}

std::vector<Cell> rasterize_line(Cell from, Cell to) {
    std::vector<Cell> cells;
    int x0 = from.col;
    int y0 = from.row;
    const int dx = std::abs(to.col - x0);
    const int dy = -std::abs(to.row - y0);
    const int sx = x0 < to.col ? 1 : -1;
    const int sy = y0 < to.row ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        cells.push_back({y0, x0});
        if (x0 == to.col && y0 == to.row) {
            break;
        }
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
    return cells;
}

std::vector<SwathCell> scoop_swath(const ScoopDumpParams& p, const GridSpec& spec, double width_mm) {
    std::vector<SwathCell> swath;
    const double half = 0.5 * width_mm / spec.cell_size;  // in cells
    const double dx = p.end.x - p.start.x;
    const double dy = p.end.y - p.start.y;
    const double len2 = dx * dx + dy * dy;
    if (len2 <= 0.0 || half < 0.0) {
        return swath;
    }
    const double len = std::sqrt(len2);
    const int c0 = std::max(0, static_cast<int>(std::floor(std::min(p.start.x, p.end.x) - half)));
    const int c1 = std::min(spec.cols - 1, static_cast<int>(std::ceil(std::max(p.start.x, p.end.x) + half)));
    const int r0 = std::max(0, static_cast<int>(std::floor(std::min(p.start.y, p.end.y) - half)));
    const int r1 = std::min(spec.rows - 1, static_cast<int>(std::ceil(std::max(p.start.y, p.end.y) + half)));
    constexpr double kEps = 1e-9;
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            const double px = c - p.start.x;
            const double py = r - p.start.y;
            const double t = (px * dx + py * dy) / len2;
            if (t < -kEps || t > 1.0 + kEps) {
                continue;
            }
            const double dist = std::abs(px * dy - py * dx) / len;
            if (dist > half + kEps) {
                continue;
            }
            const double tc = std::clamp(t, 0.0, 1.0);
            swath.push_back({spec.index(r, c), tc, p.start_angle + tc * (p.end_angle - p.start_angle)});
        }
    }
    std::sort(swath.begin(), swath.end(), [](const SwathCell& a, const SwathCell& b) {
        return a.t != b.t ? a.t < b.t : a.index < b.index;
    });
    return swath;
}

ActionMap::ActionMap(const GridSpec& spec)
    : spec_(spec), data_(static_cast<std::size_t>(kChannels * spec.cell_count()), 0.0f) {}

ActionMap render_action_map(const ScoopDumpParams& p, const GridSpec& spec) {
    require_valid(p, spec);
    ActionMap map(spec);
    const Cell from = nearest_cell(p.start);
    const Cell to = nearest_cell(p.end);
    const double dx = to.col - from.col;
    const double dy = to.row - from.row;
    const double len2 = dx * dx + dy * dy;
    for (const Cell& cell : rasterize_line(from, to)) {
        const double t = std::clamp(((cell.col - from.col) * dx + (cell.row - from.row) * dy) / len2, 0.0, 1.0);
        const auto tf = static_cast<float>(t);
        map.at(0, cell.row, cell.col) = 1.0f - tf;
        map.at(1, cell.row, cell.col) = tf;
    }
    const Cell dump = nearest_cell(p.dump);
    map.at(2, dump.row, dump.col) = 1.0f;

    const float start_angle = normalized(p.start_angle, kMinScoopAngle, kMaxScoopAngle);
    const float end_angle = normalized(p.end_angle, kMinScoopAngle, kMaxScoopAngle);
    const float roll = normalized(p.roll_angle, kMinRollAngle, kMaxRollAngle);
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            map.at(3, r, c) = start_angle;
            map.at(4, r, c) = end_angle;
            map.at(5, r, c) = roll;
        }
    }
    return map;
}

void write_params(std::ostream& out, const ScoopDumpParams& p) {
    for (double v : p.to_array()) {
        binary::write_f32(out, static_cast<float>(v));
    }
    if (!out) {
        throw IoError("failed writing action parameters");
    }
}

ScoopDumpParams read_params(std::istream& in) {
    std::array<double, ScoopDumpParams::kDims> values{};
    for (double& v : values) {
        v = binary::read_f32(in);
    }
    return ScoopDumpParams::from_array(values);
}

void write_params(const std::string& path, const ScoopDumpParams& p) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    write_params(out, p);
}

ScoopDumpParams read_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    return read_params(in);
}

}  // namespace gmedia
