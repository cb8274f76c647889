#include <doctest.h>

#include <cmath>

#include "gmedia/baseline.hpp"
#include "gmedia/errors.hpp"

#include "common/oracles.hpp"

using namespace gmedia;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

ScoopDumpParams stroke(double a_start, double a_end) {
    ScoopDumpParams p;
    p.start = {3, 6};
    p.end = {25, 20};
    p.start_angle = a_start;
    p.end_angle = a_end;
    p.roll_angle = 0;
    p.dump = {48, 14};
    return p;
}

HeightMap random_map(const GridSpec& spec, Pcg32& rng) {
    std::vector<double> v(static_cast<std::size_t>(spec.cell_count()));
    for (double& x : v) {
        x = rng.uniform(0.0, 60.0);
    }
    return HeightMap(spec, std::move(v));
}

}  // namespace

TEST_SUITE("baseline") {
    TEST_CASE("positive angles scoop everything") {
        GridSpec spec;
        const HeightMap slab = HeightMap::uniform(spec, 20.0);
        const auto out = baseline_predict(slab, stroke(30, 30));
        const auto [c, p] = testing::split_oracle(slab, stroke(30, 30), 50.0);
        CHECK(out.pushed_volume == 0.0);
        CHECK(p == 0.0);
        CHECK(out.scooped_volume == doctest::Approx(c).epsilon(1e-12));
        CHECK(rel(total_volume(out.next), total_volume(slab)) < 1e-6);
        CHECK(rel(total_volume(out.after_scoop), total_volume(slab) - c) < 1e-6);
    }

    TEST_CASE("negative angles push everything") {
        GridSpec spec;
        const HeightMap slab = HeightMap::uniform(spec, 20.0);
        const auto out = baseline_predict(slab, stroke(-30, -30));
        CHECK(out.scooped_volume == 0.0);
        CHECK(out.pushed_volume > 0.0);
        CHECK(rel(total_volume(out.after_scoop), total_volume(slab)) < 1e-6);
        CHECK(out.next == out.after_scoop);
    }

    TEST_CASE("mixed stroke split matches the per-cell oracle exactly") {
        GridSpec spec;
        const HeightMap slab = HeightMap::uniform(spec, 20.0);
        const ScoopDumpParams p = stroke(30, -30);
        const auto out = baseline_predict(slab, p);
        const auto [c, q] = testing::split_oracle(slab, p, 50.0);
        CHECK(out.scooped_volume == doctest::Approx(c).epsilon(1e-12));
        CHECK(out.pushed_volume == doctest::Approx(q).epsilon(1e-12));
        CHECK(c > 0.0);
        CHECK(q > 0.0);

        Pcg32 rng(6);
        for (int i = 0; i < 100; ++i) {
            const HeightMap h = random_map(spec, rng);
            const ScoopDumpParams r = sample_valid_params(spec, rng);
            const double width = rng.uniform(10.0, 90.0);
            BaselineConfig cfg;
            cfg.scoop_width = width;
            const auto o = baseline_predict(h, r, cfg);
            const auto [cc, pp] = testing::split_oracle(h, r, width);
            REQUIRE(o.scooped_volume == doctest::Approx(cc).epsilon(1e-12));
            REQUIRE(o.pushed_volume == doctest::Approx(pp).epsilon(1e-12));
        }
    }

    TEST_CASE("volume is conserved over random inputs") {
        GridSpec spec;
        Pcg32 rng(7);
        for (int i = 0; i < 300; ++i) {
            const HeightMap h = random_map(spec, rng);
            const ScoopDumpParams p = sample_valid_params(spec, rng);
            const auto o = baseline_predict(h, p);
            const double v = total_volume(h);
            REQUIRE(rel(total_volume(o.next), v) < 1e-6);
            REQUIRE(rel(total_volume(o.after_scoop), v - o.scooped_volume) < 1e-6);
            REQUIRE(o.scooped_volume >= 0.0);
            REQUIRE(o.pushed_volume >= 0.0);
        }
    }

    TEST_CASE("flipping both angle signs swaps scooped and pushed") {
        GridSpec spec;
        const HeightMap slab = HeightMap::uniform(spec, 25.0);
        const auto a = baseline_predict(slab, stroke(30, -25));
        const auto b = baseline_predict(slab, stroke(-30, 25));
        CHECK(a.scooped_volume == doctest::Approx(b.pushed_volume).epsilon(1e-12));
        CHECK(a.pushed_volume == doctest::Approx(b.scooped_volume).epsilon(1e-12));
    }

    TEST_CASE("baseline score") {
        GridSpec spec;
        Pcg32 rng(2);
        const HeightMap h = random_map(spec, rng);
        const ScoopDumpParams p = stroke(12, -4);
        const HeightMap next = baseline_predict(h, p).next;
        CHECK(baseline_score(h, p, next) == 0.0);
        const HeightMap goal = random_map(spec, rng);
        CHECK(baseline_score(h, p, goal) == l1_distance(baseline_predict(h, p).next, goal));

        // Raising a far-away cell by the same amount in both state and goal leaves the score alone.
        auto hv = h.values();
        auto gv = goal.values();
        hv[static_cast<std::size_t>(spec.index(30, 62))] += 5.0;
        gv[static_cast<std::size_t>(spec.index(30, 62))] += 5.0;
        CHECK(baseline_score(HeightMap(spec, hv), p, HeightMap(spec, gv)) ==
              doctest::Approx(baseline_score(h, p, goal)).epsilon(1e-9));

        ScoopDumpParams bad = p;
        bad.dump = {70, 10};
        CHECK_THROWS_AS(baseline_predict(h, bad), ValidationError);
    }

    TEST_CASE("deposits near the wall are clamped inside the tray") {
        GridSpec spec;
        CHECK(clamp_to_tray(spec, {-3, 40}) == Point2{0, 31});
        CHECK(clamp_to_tray(spec, {10, 5}) == Point2{10, 5});
    }
}
