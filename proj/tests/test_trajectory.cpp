#include <doctest.h>

#include "cubicwkb/trajectory.hpp"

using namespace cwkb;

TEST_CASE("critical traces for a=2i, theta=0 from +1 all escape") {
    Potential pot(cplx(0.0, 2.0), 0.0);
    for (int k = 0; k < 3; ++k) {
        Trajectory tr = trace_critical(pot, 1, k);
        CHECK(tr.terminal.type == Terminal::Type::escaped);
        CHECK(tr.re_h_drift < 1e-8);
        CHECK(tr.im_h_monotone);
        // final direction sits within 0.05 rad of the matched Stokes direction
        const CriticalDirections cd = critical_directions(pot);
        const double d =
            std::abs(angle_diff(tr.terminal.final_angle, cd.alpha_perp[tr.terminal.direction_index]));
        CHECK(d < 0.05);
    }
}

TEST_CASE("local stokes directions hold Re h small along the first stretch") {
    Potential pot(cplx(0.0, 2.0), 0.0);
    TraceLimits lim;
    lim.arc_cap = 0.12;
    for (int tp = 0; tp < 3; ++tp) {
        for (int k = 0; k < 3; ++k) {
            Trajectory tr = trace_critical(pot, tp, k, TraceKind::vertical, lim);
            CHECK(tr.re_h_drift < 1e-8);
        }
    }
}

TEST_CASE("short trajectory between the fixed turning points at a=i sqrt(3), theta=pi/4") {
    Potential pot(cplx(0.0, std::sqrt(3.0)), kPi / 4.0);
    std::vector<Trajectory> graph = trace_critical_graph(pot);
    int hits = 0;
    Polyline connecting;
    for (const auto& tr : graph) {
        if (tr.terminal.type == Terminal::Type::hit_turning_point) {
            ++hits;
            if (tr.seed_tp != 2 && tr.terminal.hit_tp != 2) connecting = tr.points;
        }
    }
    CHECK(hits == 2);  // traced once from each endpoint
    REQUIRE(!connecting.empty());
    ShortTrajectory st = refine_short_trajectory(pot, {0, 1}, connecting);
    CHECK(st.residual < 1e-9);
}

TEST_CASE("same a at theta=pi/3 is not short") {
    Potential pot(cplx(0.0, std::sqrt(3.0)), kPi / 3.0);
    // feed the straight segment as a coarse path; the refined residual must
    // stay far from zero
    Polyline coarse;
    for (int i = 0; i <= 40; ++i)
        coarse.push_back(cplx(-1.0 + 2.0 * i / 40.0, 1e-6));
    CHECK_THROWS_AS(refine_short_trajectory(pot, {0, 1}, coarse), NotActuallyShort);
    CHECK_THROWS_AS(refine_short_trajectory(pot, {1, 1}, coarse), std::invalid_argument);
}

TEST_CASE("escape directions cover all five Stokes directions at infinity") {
    Potential pot(cplx(0.0, 2.0), 0.0);
    std::vector<Trajectory> graph = trace_critical_graph(pot);
    std::array<int, 5> seen{};
    for (const auto& tr : graph)
        if (tr.terminal.type == Terminal::Type::escaped) seen[tr.terminal.direction_index]++;
    for (int j = 0; j < 5; ++j) CHECK(seen[j] >= 1);
}

TEST_CASE("vertical and horizontal traces through a regular point cross once locally") {
    Potential pot(cplx(0.0, 2.0), 0.4);
    const cplx seed(0.37, 0.41);
    TraceLimits lim;
    lim.arc_cap = 0.8;
    Trajectory v = trace(pot, seed, 0.0, TraceKind::vertical, lim);
    Trajectory h = trace(pot, seed, kPi / 2.0, TraceKind::horizontal, lim);
    // both start at the seed; count how many other near-contacts exist
    int contacts = 0;
    for (std::size_t i = 5; i < v.points.size(); ++i)
        if (dist_point_polyline(v.points[i], h.points) < 5e-4) ++contacts;
    CHECK(contacts == 0);
}

TEST_CASE("step halving reproduces terminal classification and direction") {
    Potential pot(cplx(1.3, 0.9), 0.7);
    TraceLimits fine;
    fine.step_tol = 1e-12;
    std::vector<Trajectory> coarse = trace_critical_graph(pot);
    std::vector<Trajectory> refined = trace_critical_graph(pot, fine);
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        CHECK(coarse[i].terminal.type == refined[i].terminal.type);
        if (coarse[i].terminal.type == Terminal::Type::escaped) {
            CHECK(coarse[i].terminal.direction_index == refined[i].terminal.direction_index);
            CHECK(std::abs(angle_diff(coarse[i].terminal.final_angle,
                                      refined[i].terminal.final_angle)) < 0.05);
        }
    }
}

TEST_CASE("symmetry: graph of (-a, theta+pi/2) is the reflection z -> -z of (a, theta)") {
    const Potential pot(cplx(0.8, 1.1), 0.55);
    const Potential mirrored(-pot.a, pot.theta + kPi / 2.0);
    std::vector<Trajectory> g1 = trace_critical_graph(pot);
    std::vector<Trajectory> g2 = trace_critical_graph(mirrored);
    // turning point index map under z -> -z: -1 <-> +1, a -> -a
    auto map_tp = [](int i) { return i == 2 ? 2 : 1 - i; };
    for (int tp = 0; tp < 3; ++tp) {
        // compare terminal type multisets per turning point
        std::array<int, 3> c1{}, c2{};
        for (const auto& tr : g1)
            if (tr.seed_tp == tp) c1[static_cast<int>(tr.terminal.type)]++;
        for (const auto& tr : g2)
            if (tr.seed_tp == map_tp(tp)) c2[static_cast<int>(tr.terminal.type)]++;
        CHECK(c1 == c2);
    }
    // escaped directions map as angle -> angle + pi under the reflection
    std::array<int, 5> d1{}, d2{};
    for (const auto& tr : g1)
        if (tr.terminal.type == Terminal::Type::escaped) {
            const int j = tr.terminal.direction_index;
            d1[j]++;
        }
    const CriticalDirections cd2 = critical_directions(mirrored);
    for (const auto& tr : g2)
        if (tr.terminal.type == Terminal::Type::escaped) {
            // reflect back and match against the original direction set
            const double ang = wrap_2pi(tr.terminal.final_angle + kPi);
            const CriticalDirections cd1 = critical_directions(pot);
            int best = 0;
            double bd = 1e9;
            for (int j = 0; j < 5; ++j) {
                const double d = std::abs(angle_diff(ang, cd1.alpha_perp[j]));
                if (d < bd) {
                    bd = d;
                    best = j;
                }
            }
            CHECK(bd < 0.05);
            d2[best]++;
        }
    (void)cd2;
    CHECK(d1 == d2);
}
