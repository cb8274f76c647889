#include "gmedia/baseline.hpp"

#include <algorithm>

namespace gmedia {

Point2 clamp_to_tray(const GridSpec& spec, Point2 p) {
    return {std::clamp(p.x, 0.0, spec.cols - 1.0), std::clamp(p.y, 0.0, spec.rows - 1.0)};
}

BaselineOutcome baseline_predict(const HeightMap& h, const ScoopDumpParams& p, const BaselineConfig& cfg) {
    const GridSpec& spec = h.spec();
    require_valid(p, spec);

    std::vector<double> cleared = h.values();
    double scooped = 0.0;
    double pushed = 0.0;
    for (const SwathCell& cell : scoop_swath(p, spec, cfg.scoop_width)) {
        double& height = cleared[static_cast<std::size_t>(cell.index)];
        if (cell.angle >= 0.0) {
            scooped += height;
        } else {
            pushed += height;
        }
        height = 0.0;
    }
    scooped *= spec.cell_area();
    pushed *= spec.cell_area();

    const HeightMap swept(spec, std::move(cleared));
    HeightMap after_scoop = deposit_gaussian(swept, clamp_to_tray(spec, p.end), cfg.deposit_sigma, pushed);
    HeightMap next = deposit_gaussian(after_scoop, clamp_to_tray(spec, p.dump), cfg.deposit_sigma, scooped);
    return {std::move(next), std::move(after_scoop), scooped, pushed};
}

double baseline_score(const HeightMap& h, const ScoopDumpParams& p, const HeightMap& goal, const BaselineConfig& cfg) {
    return l1_distance(baseline_predict(h, p, cfg).next, goal);
}

}  // namespace gmedia
