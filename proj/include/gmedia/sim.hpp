#pragma once

#include <cstdint>

#include "gmedia/action.hpp"
#include "gmedia/grid.hpp"
#include "gmedia/rng.hpp"

namespace gmedia {

/// Parameters of the height-map granular simulator that stands in for the physical tray.
struct SimConfig {
    double scoop_width = 50.0;         // mm, at zero roll
    double carry_capacity = 150000.0;  // mm^3 the scoop can hold
    double spill_fraction = 0.05;      // share of the carried load lost in transit
    double repose_angle = 30.0;        // degrees
    double dump_sigma = 2.0;           // cells
    double noise_std = 0.5;            // mm, depth-sensor noise used by observe()
    std::uint64_t seed = 0;

    /// Throws ArgumentError on invalid settings.
    void validate() const;
};

struct SimOutcome {
    HeightMap next;
    HeightMap after_scoop;
    double carried = 0.0;
    double pushed = 0.0;
    double spilled = 0.0;
};

/// Executes one scoop & dump. Swath cells are visited in stroke order; cells with a
/// non-negative scoop angle fill the scoop up to capacity (the rest stays put), cells with a
/// negative angle are bulldozed to the end point. Rolling the blade narrows the swath.
/// A fixed fraction of the load spills out of the tray, the remainder lands at the dump point,
/// and both intermediate and final maps slump to the angle of repose. Nothing flows across
/// the divider.
SimOutcome sim_step(const HeightMap& h, const ScoopDumpParams& p, const SimConfig& cfg);

/// Effective blade width after roll narrowing.
double effective_scoop_width(const SimConfig& cfg, double roll_angle);

/// Slumps every neighbor pair steeper than the angle of repose. Transfers below the 1e-3 mm
/// dead band are skipped, so the result is a fixed point and relaxing twice changes nothing.
HeightMap repose_relax(const HeightMap& h, double repose_angle, int divider_col);

/// Noisy depth observation of h, clamped to [0, max_height].
HeightMap observe(const HeightMap& h, const SimConfig& cfg, Pcg32& rng);

}  // namespace gmedia
