#pragma once

#include "gmedia/action.hpp"
#include "gmedia/grid.hpp"

namespace gmedia {

/// Tunables of the hand-written predictor.
struct BaselineConfig {
    double scoop_width = 50.0;  // mm
    double deposit_sigma = 2.0; // cells
};

struct BaselineOutcome {
    HeightMap next;
    HeightMap after_scoop;
    double scooped_volume = 0.0; // mm^3 carried to the dump location
    double pushed_volume = 0.0;  // mm^3 shoved to the end of the stroke
};

/// Heuristic next-state guess: clear the scoop's swath, split the removed media by the sign of
/// the interpolated scoop angle (>= 0 scooped, < 0 pushed), then drop the pushed part as a
/// Gaussian at the end point and the scooped part as a Gaussian at the dump point.
BaselineOutcome baseline_predict(const HeightMap& h, const ScoopDumpParams& p, const BaselineConfig& cfg = {});

/// Mean absolute error between the predicted next state and the goal.
double baseline_score(const HeightMap& h, const ScoopDumpParams& p, const HeightMap& goal,
                      const BaselineConfig& cfg = {});

/// Clamps a deposit center into the tray.
Point2 clamp_to_tray(const GridSpec& spec, Point2 p);

}  // namespace gmedia
