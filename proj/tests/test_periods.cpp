#include <doctest.h>

#include <random>

#include "cubicwkb/graph.hpp"
#include "cubicwkb/levelsets.hpp"
#include "cubicwkb/periods.hpp"

using namespace cwkb;

TEST_CASE("degenerate period vanishes and swapped contours invert the ratio") {
    Potential pot(cplx(0.0, std::sqrt(3.0)), kPi / 4.0);
    Period p = segment_period(pot, 1, 1);
    CHECK(p.value == cplx(0.0, 0.0));
    const Period p1 = segment_period(pot, 2, 1);
    const Period p2 = segment_period(pot, 2, 0);
    const double alpha = std::abs(p1.value) / std::abs(p2.value);
    const double inv = std::abs(p2.value) / std::abs(p1.value);
    CHECK(alpha * inv == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("short-trajectory period is purely imaginary and matches its arc-length form") {
    Potential pot(cplx(0.0, std::sqrt(3.0)), kPi / 4.0);
    StokesGraph g = classify(pot);
    REQUIRE(g.short_trajectories.size() == 1);
    const auto& st = g.short_trajectories[0];
    Period p = segment_period(pot, st.tp0, st.tp1, &st.points);
    CHECK(std::abs(p.value.real()) < 1e-8);
    CHECK(std::abs(p.abs_value - std::abs(p.value)) < 1e-8 * p.abs_value);

    // the straight segment is homotopic here; the period must agree
    Period ps = segment_period(pot, st.tp0, st.tp1);
    CHECK(std::abs(std::abs(ps.value) - std::abs(p.value)) < 1e-8 * std::abs(p.value));
}

TEST_CASE("loop quadrature vs twice the segment integral") {
    Potential pot(cplx(0.0, std::sqrt(3.0)), kPi / 4.0);
    Polyline contour = capsule_contour(pot, 0, 1, 0.35);
    const cplx loop = loop_period(pot, contour);
    const Period seg = segment_period(pot, 0, 1);
    CHECK(std::abs(std::abs(loop) - std::abs(seg.value)) < 1e-9 * std::abs(seg.value));
}

TEST_CASE("monodromy parity: loops around one or three turning points mismatch sheets") {
    Potential pot(cplx(0.0, 2.0), 0.3);
    // around one turning point
    Polyline one;
    for (int i = 0; i <= 128; ++i) one.push_back(cplx(1.0, 0.0) + std::polar(0.5, 2.0 * kPi * i / 128));
    CHECK_THROWS_AS(loop_period(pot, one), SheetMismatch);
    // around all three
    Polyline all;
    for (int i = 0; i <= 256; ++i) all.push_back(std::polar(5.0, 2.0 * kPi * i / 256));
    CHECK_THROWS_AS(loop_period(pot, all), SheetMismatch);
}

TEST_CASE("lemma equivalence on random chi samples") {
    // loop vs 2x segment on points drawn from the short-trajectory locus at
    // several angles
    std::mt19937 rng(2024u);
    int done = 0;
    const double thetas[] = {0.15, 0.45, kPi / 4.0 - 1e-14, 0.62, 0.3};
    std::vector<std::pair<cplx, double>> samples;
    for (double th : thetas) {
        LevelSetAtlas atlas = build_atlas(th);
        for (const auto& c : atlas.curves) {
            if (!c.in_chi || c.points.size() < 200) continue;
            for (std::size_t k = c.points.size() / 4; k < c.points.size();
                 k += c.points.size() / 4)
                samples.push_back({c.points[k], th});
        }
    }
    for (auto [a, th] : samples) {
        if (done >= 50) break;
        if (std::abs(a - 1.0) < 0.25 || std::abs(a + 1.0) < 0.25) continue;
        Potential pot(a, th);
        // identify the connected pair from the classifier
        std::vector<ShortTrajectory> shorts;
        try {
            shorts = classify(pot).short_trajectories;
        } catch (const NumericError&) {
            continue;
        }
        if (shorts.empty()) continue;
        const auto& st = shorts[0];
        const cplx A = turning_point_location(pot, st.tp0);
        const cplx B = turning_point_location(pot, st.tp1);
        const int third = 3 - st.tp0 - st.tp1;
        const cplx C = turning_point_location(pot, third);
        const double clearance = 0.25 * std::abs(B - A);
        if (dist_point_segment(C, A, B) < clearance + 0.1) continue;
        Polyline contour = capsule_contour(pot, st.tp0, st.tp1, clearance);
        cplx loop;
        try {
            loop = loop_period(pot, contour);
        } catch (const NumericError&) {
            continue;
        }
        const Period seg = segment_period(pot, st.tp0, st.tp1);
        CHECK(std::abs(std::abs(loop) - std::abs(seg.value)) < 1e-9 * std::abs(seg.value));
        // purely imaginary on the locus
        CHECK(std::abs(seg.value.real()) < 1e-7);
        ++done;
    }
    CHECK(done >= 50);
}

TEST_CASE("rational detection") {
    CHECK(detect_rational(1.0).is_rational);
    CHECK(detect_rational(0.75).is_rational);
    RationalApprox r = detect_rational(2.0 / 3.0 + 1e-12);
    CHECK(r.is_rational);
    CHECK(r.p == 2);
    CHECK(r.q == 3);
    CHECK(!detect_rational(std::sqrt(2.0)).is_rational);
    CHECK(!detect_rational(kPi / 3.0).is_rational);
}

TEST_CASE("tree period ratio is 1 at the symmetric tree and drifts off elsewhere") {
    SpecialPoints sp = solve_special_points(kPi / 4.0 - 1e-14);
    Potential sym(*sp.t_point, kPi / 4.0);
    CHECK(tree_period_ratio(sym) == doctest::Approx(1.0).epsilon(1e-9));

    SpecialPoints sp2 = solve_special_points(kPi / 8.0 + 0.05);
    Potential gen(*sp2.t_point, kPi / 8.0 + 0.05);
    const double alpha = tree_period_ratio(gen);
    CHECK(std::abs(alpha - 1.0) > 1e-3);  // generic tree: distinct periods
}
