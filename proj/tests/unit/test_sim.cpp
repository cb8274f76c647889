#include <doctest.h>

#include <cmath>

#include "gmedia/errors.hpp"
#include "gmedia/sim.hpp"

using namespace gmedia;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

HeightMap random_map(const GridSpec& spec, Pcg32& rng, double hi = 60.0) {
    std::vector<double> v(static_cast<std::size_t>(spec.cell_count()));
    for (double& x : v) {
        x = rng.uniform(0.0, hi);
    }
    return HeightMap(spec, std::move(v));
}

double max_slope(const HeightMap& h) {
    const GridSpec& spec = h.spec();
    double worst = 0.0;
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            if (c + 1 < spec.cols && c + 1 != spec.divider_col) {
                worst = std::max(worst, std::fabs(h.at(r, c) - h.at(r, c + 1)));
            }
            if (r + 1 < spec.rows) {
                worst = std::max(worst, std::fabs(h.at(r, c) - h.at(r + 1, c)));
            }
        }
    }
    return worst;
}

ScoopDumpParams stroke(double a_start, double a_end) {
    ScoopDumpParams p;
    p.start = {4, 8};
    p.end = {26, 18};
    p.start_angle = a_start;
    p.end_angle = a_end;
    p.roll_angle = 0;
    p.dump = {46, 16};
    return p;
}

}  // namespace

TEST_SUITE("sim") {
    TEST_CASE("config validation") {
        SimConfig cfg;
        CHECK_NOTHROW(cfg.validate());
        SimConfig bad = cfg;
        bad.carry_capacity = 0;
        CHECK_THROWS_AS(bad.validate(), ArgumentError);
        bad = cfg;
        bad.spill_fraction = 1.0;
        CHECK_THROWS_AS(bad.validate(), ArgumentError);
        bad = cfg;
        bad.repose_angle = 90;
        CHECK_THROWS_AS(bad.validate(), ArgumentError);
    }

    TEST_CASE("empty tray stays empty") {
        GridSpec spec;
        const HeightMap empty(spec);
        const SimOutcome out = sim_step(empty, stroke(20, 10), SimConfig{});
        CHECK(out.next == empty);
        CHECK(out.after_scoop == empty);
        CHECK(out.carried == 0.0);
        CHECK(out.pushed == 0.0);
        CHECK(out.spilled == 0.0);
    }

    TEST_CASE("negative angles only push") {
        GridSpec spec;
        const HeightMap h = fill_half(spec, Half::left, 30.0);
        const SimOutcome out = sim_step(h, stroke(-20, -5), SimConfig{});
        CHECK(out.carried == 0.0);
        CHECK(out.spilled == 0.0);
        CHECK(out.pushed > 0.0);
        CHECK(out.next == out.after_scoop);
    }

    TEST_CASE("carry capacity limits the load and the rest stays put") {
        GridSpec spec;
        SimConfig cfg;
        cfg.carry_capacity = 20000.0;
        const HeightMap h = fill_half(spec, Half::left, 40.0);
        const SimOutcome out = sim_step(h, stroke(20, 20), cfg);
        CHECK(out.carried == doctest::Approx(20000.0));
        CHECK(rel(total_volume(out.after_scoop), total_volume(h) - out.carried) < 1e-9);
    }

    TEST_CASE("roll narrows the swath") {
        SimConfig cfg;
        CHECK(effective_scoop_width(cfg, 0) == 50.0);
        CHECK(effective_scoop_width(cfg, 90) == 25.0);
        GridSpec spec;
        const HeightMap h = fill_half(spec, Half::left, 10.0);
        ScoopDumpParams flat = stroke(20, 20);
        ScoopDumpParams rolled = flat;
        rolled.roll_angle = 90;
        CHECK(sim_step(h, rolled, cfg).carried < sim_step(h, flat, cfg).carried);
    }

    TEST_CASE("volume ledger over random actions") {
        GridSpec spec;
        SimConfig cfg;
        Pcg32 rng(31);
        for (int i = 0; i < 300; ++i) {
            const HeightMap h = random_map(spec, rng);
            const ScoopDumpParams p = sample_valid_params(spec, rng);
            const SimOutcome out = sim_step(h, p, cfg);
            const double v = total_volume(h);
            REQUIRE(rel(total_volume(out.next) + out.spilled, v) < 1e-6);
            REQUIRE(rel(total_volume(out.after_scoop) + out.carried, v) < 1e-6);
            REQUIRE(out.spilled == doctest::Approx(cfg.spill_fraction * out.carried));
            REQUIRE(out.carried >= 0.0);
            REQUIRE(out.pushed >= 0.0);
            REQUIRE(out.spilled <= out.carried + out.pushed);
            REQUIRE(out.carried <= cfg.carry_capacity + 1e-9);
        }
    }

    TEST_CASE("nothing flows across the divider") {
        GridSpec spec;
        Pcg32 rng(12);
        // Pre-relaxed so the right half has nothing of its own left to slump.
        const HeightMap h = repose_relax(random_map(spec, rng), 30.0, spec.divider_col);
        const CellMask right = CellMask::half(spec, Half::right);
        ScoopDumpParams p = stroke(15, -15);
        p.dump = {20, 20};  // dump back into the left half
        const SimOutcome out = sim_step(h, p, SimConfig{});
        for (int r = 0; r < spec.rows; ++r) {
            for (int c = spec.divider_col; c < spec.cols; ++c) {
                REQUIRE(out.next.at(r, c) == h.at(r, c));
            }
        }
        CHECK(total_volume(out.next, &right) == total_volume(h, &right));
    }

    TEST_CASE("sim_step is deterministic and rejects invalid actions") {
        GridSpec spec;
        Pcg32 rng(40);
        const HeightMap h = random_map(spec, rng);
        const ScoopDumpParams p = sample_valid_params(spec, rng);
        CHECK(sim_step(h, p, SimConfig{}).next == sim_step(h, p, SimConfig{}).next);
        ScoopDumpParams bad = p;
        bad.roll_angle = -1;
        CHECK_THROWS_AS(sim_step(h, bad, SimConfig{}), ValidationError);
    }

    TEST_CASE("repose relaxation") {
        GridSpec spec;
        const double threshold = spec.cell_size * std::tan(30.0 * M_PI / 180.0);
        const HeightMap flat = HeightMap::uniform(spec, 33.0);
        CHECK(repose_relax(flat, 30.0, spec.divider_col) == flat);

        std::vector<double> v(static_cast<std::size_t>(spec.cell_count()), 0.0);
        v[static_cast<std::size_t>(spec.index(16, 16))] = 150.0;
        const HeightMap spike(spec, v);
        const HeightMap cone = repose_relax(spike, 30.0, spec.divider_col);
        CHECK(rel(total_volume(cone), total_volume(spike)) < 1e-9);
        CHECK(max_slope(cone) <= threshold + 1e-3);
        CHECK(cone.at(16, 16) < 150.0);
        CHECK(cone.at(16, 16) >= cone.at(16, 20));
        CHECK(repose_relax(cone, 30.0, spec.divider_col) == cone);

        std::vector<double> w(static_cast<std::size_t>(spec.cell_count()), 0.0);
        w[static_cast<std::size_t>(spec.index(10, spec.divider_col - 1))] = 150.0;
        const HeightMap wall(spec, w);
        const HeightMap slumped = repose_relax(wall, 30.0, spec.divider_col);
        const CellMask right = CellMask::half(spec, Half::right);
        CHECK(total_volume(slumped, &right) == 0.0);
        CHECK(rel(total_volume(slumped), total_volume(wall)) < 1e-9);
    }

    TEST_CASE("relaxation is idempotent and bounds slopes on random maps") {
        GridSpec spec;
        Pcg32 rng(50);
        const double threshold = spec.cell_size * std::tan(30.0 * M_PI / 180.0);
        for (int i = 0; i < 5; ++i) {
            const HeightMap h = random_map(spec, rng, 120.0);
            const HeightMap once = repose_relax(h, 30.0, spec.divider_col);
            const HeightMap twice = repose_relax(once, 30.0, spec.divider_col);
            for (int k = 0; k < spec.cell_count(); ++k) {
                REQUIRE(std::fabs(once[k] - twice[k]) <= 1e-6);
            }
            CHECK(max_slope(once) <= threshold + 1e-3);
            CHECK(rel(total_volume(once), total_volume(h)) < 1e-9);
        }
    }

    TEST_CASE("observation noise") {
        GridSpec spec;
        Pcg32 rng(1);
        const HeightMap h = random_map(spec, rng);
        SimConfig quiet;
        quiet.noise_std = 0.0;
        Pcg32 a(9);
        CHECK(observe(h, quiet, a) == h);

        SimConfig noisy;
        Pcg32 r1(77);
        Pcg32 r2(77);
        CHECK(observe(h, noisy, r1) == observe(h, noisy, r2));

        // Mid-range heights so clamping never biases the noise.
        const HeightMap mid = HeightMap::uniform(spec, 75.0);
        Pcg32 r3(123);
        double sum = 0.0;
        std::size_t n = 0;
        for (int i = 0; i < 512; ++i) {
            const HeightMap o = observe(mid, noisy, r3);
            for (double v : o.data()) {
                sum += v - 75.0;
                ++n;
            }
        }
        CHECK(n >= 1000000u);
        CHECK(std::fabs(sum / static_cast<double>(n)) < 3.0 * noisy.noise_std / std::sqrt(static_cast<double>(n)));
    }
}
