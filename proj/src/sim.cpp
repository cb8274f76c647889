#include "gmedia/sim.hpp"

#include <cmath>
#include <numbers>

#include "gmedia/baseline.hpp"
#include "gmedia/errors.hpp"

namespace gmedia {
namespace {

constexpr double kDeadBand = 1e-3;  // mm
constexpr int kMaxSweeps = 10000;

}  // namespace

void SimConfig::validate() const {
    if (!(carry_capacity > 0.0)) {
        throw ArgumentError("carry capacity must be positive");
    }
    if (!(spill_fraction >= 0.0 && spill_fraction < 1.0)) {
        throw ArgumentError("spill fraction must be in [0, 1)");
    }
    if (!(repose_angle > 0.0 && repose_angle < 90.0)) {
        throw ArgumentError("repose angle must be in (0, 90)");
    }
    if (!(scoop_width > 0.0) || !(dump_sigma > 0.0) || !(noise_std >= 0.0)) {
        throw ArgumentError("scoop width and dump sigma must be positive, noise non-negative");
    }
}

double effective_scoop_width(const SimConfig& cfg, double roll_angle) {
    return cfg.scoop_width * (1.0 - 0.5 * roll_angle / 90.0);
}

HeightMap repose_relax(const HeightMap& h, double repose_angle, int divider_col) {
    const GridSpec& spec = h.spec();
    const double threshold = spec.cell_size * std::tan(repose_angle * std::numbers::pi / 180.0);
    std::vector<double> z = h.values();

    auto relax_pair = [&](int a, int b) {
        double& za = z[static_cast<std::size_t>(a)];
        double& zb = z[static_cast<std::size_t>(b)];
        const double diff = za - zb;
        const double excess = std::abs(diff) - threshold;
        if (excess <= kDeadBand) {
            return false;
        }
        const double move = 0.5 * excess;
        if (diff > 0.0) {
            za -= move;
            zb += move;
        } else {
            za += move;
            zb -= move;
        }
        return true;
    };

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool moved = false;
        const bool forward = sweep % 2 == 0;
        for (int k = 0; k < spec.rows; ++k) {
            const int r = forward ? k : spec.rows - 1 - k;
            for (int m = 0; m < spec.cols; ++m) {
                const int c = forward ? m : spec.cols - 1 - m;
                const int idx = spec.index(r, c);
                if (c + 1 < spec.cols && c + 1 != divider_col) {
                    moved |= relax_pair(idx, idx + 1);
                }
                if (r + 1 < spec.rows) {
                    moved |= relax_pair(idx, idx + spec.cols);
                }
            }
        }
        if (!moved) {
            break;
        }
    }
    return HeightMap::clamped(spec, std::move(z));
}

SimOutcome sim_step(const HeightMap& h, const ScoopDumpParams& p, const SimConfig& cfg) {
    const GridSpec& spec = h.spec();
    cfg.validate();
    require_valid(p, spec);

    const double area = spec.cell_area();
    std::vector<double> z = h.values();
    double carried = 0.0;
    double pushed = 0.0;
    for (const SwathCell& cell : scoop_swath(p, spec, effective_scoop_width(cfg, p.roll_angle))) {
        double& height = z[static_cast<std::size_t>(cell.index)];
        const double volume = height * area;
        if (cell.angle >= 0.0) {
            const double take = std::min(volume, cfg.carry_capacity - carried);
            if (take <= 0.0) {
                continue;
            }
            carried += take;
            height = take == volume ? 0.0 : std::max(0.0, height - take / area);
        } else {
            pushed += volume;
            height = 0.0;
        }
    }

    const Point2 end = clamp_to_tray(spec, p.end);
    const CellMask end_half = CellMask::half(spec, half_of(spec, end.x));
    const HeightMap swept = HeightMap::clamped(spec, std::move(z));
    const HeightMap with_push = deposit_gaussian(swept, end, cfg.dump_sigma, pushed, &end_half);
    HeightMap after_scoop = repose_relax(with_push, cfg.repose_angle, spec.divider_col);

    const double spilled = cfg.spill_fraction * carried;
    const double dumped = carried - spilled;
    const Point2 dump = clamp_to_tray(spec, p.dump);
    const CellMask dump_half = CellMask::half(spec, half_of(spec, dump.x));
    const HeightMap with_dump = deposit_gaussian(after_scoop, dump, cfg.dump_sigma, dumped, &dump_half);
    HeightMap next = repose_relax(with_dump, cfg.repose_angle, spec.divider_col);
    return {std::move(next), std::move(after_scoop), carried, pushed, spilled};
}

HeightMap observe(const HeightMap& h, const SimConfig& cfg, Pcg32& rng) {
    if (cfg.noise_std == 0.0) {
        return h;
    }
    std::vector<double> z = h.values();
    for (double& v : z) {
        v += rng.normal(0.0, cfg.noise_std);
    }
    return HeightMap::clamped(h.spec(), std::move(z));
}

}  // namespace gmedia
