#include <doctest.h>

#include "cubicwkb/graph.hpp"
#include "cubicwkb/levelsets.hpp"

using namespace cwkb;

TEST_CASE("type B at a = i sqrt(3), theta = pi/4 with the short trajectory at +-1") {
    StokesGraph g = classify(Potential(cplx(0.0, std::sqrt(3.0)), kPi / 4.0));
    CHECK(g.type_label == GraphType::B);
    CHECK(g.strip_count == 1);
    REQUIRE(g.short_trajectories.size() == 1);
    CHECK(((g.short_trajectories[0].tp0 == 0 && g.short_trajectories[0].tp1 == 1) ||
           (g.short_trajectories[0].tp0 == 1 && g.short_trajectories[0].tp1 == 0)));
    // the strip boundary carries the short trajectory (that is what B means)
    const Face* strip = g.strip();
    REQUIRE(strip != nullptr);
    bool on_strip = false;
    for (int ei : strip->boundary_edges)
        if (g.edges[ei].is_short) on_strip = true;
    CHECK(on_strip);

    auto d = admissible_pairs(g);
    REQUIRE(d.size() == 1);
    CHECK(!d[0].broken);
    CHECK(accumulation_check(g, d[0]).accumulates);
}

TEST_CASE("type A in the interior: five half-planes and two strips, no eigenvalue problem") {
    for (cplx a : {cplx(2.0, 2.0), cplx(-0.6, -0.8)}) {
        StokesGraph g = classify(Potential(a, kPi / 4.0));
        CHECK(g.type_label == GraphType::A);
        CHECK(g.strip_count == 2);
        CHECK(g.faces.size() == 7);
        CHECK(admissible_pairs(g).empty());
    }
}

TEST_CASE("tree at t_{pi/4}: no strips, three eigenvalue problems, one broken") {
    SpecialPoints sp = solve_special_points(kPi / 4.0 - 1e-14);
    REQUIRE(sp.t_point.has_value());
    StokesGraph g = classify(Potential(*sp.t_point, kPi / 4.0));
    CHECK(g.type_label == GraphType::Tree);
    CHECK(g.strip_count == 0);
    CHECK(g.short_trajectories.size() == 2);
    CHECK(g.stokes_complexes.size() == 1);

    auto d = admissible_pairs(g);
    REQUIRE(d.size() == 3);
    int broken = 0;
    for (const auto& x : d)
        if (x.broken) ++broken;
    CHECK(broken == 1);
    for (const auto& x : d) {
        AccumulationResult r = accumulation_check(g, x);
        CHECK(r.accumulates);
        if (x.broken) {
            REQUIRE(r.alpha.has_value());
            CHECK(*r.alpha == doctest::Approx(1.0).epsilon(1e-7));  // PT symmetry
        }
    }
}

TEST_CASE("type BB: two descriptors, neither accumulating") {
    // a = 2 at theta -> 0 sits on the real branch of Sigma_1 (short
    // trajectory [1,2]) with the strip attached at the turning point only
    StokesGraph g = classify(Potential(cplx(2.0, 0.0), 1e-14));
    CHECK(g.type_label == GraphType::BB);
    auto d = admissible_pairs(g);
    REQUIRE(d.size() == 2);
    for (const auto& x : d) CHECK(!accumulation_check(g, x).accumulates);
}

TEST_CASE("face bookkeeping: every anti-Stokes direction in one half-plane, all Stokes rays present") {
    StokesGraph g = classify(Potential(cplx(1.3, 0.9), 0.7));
    std::array<int, 5> alpha_seen{}, ray_seen{};
    for (const auto& f : g.faces)
        if (f.kind == Face::Kind::half_plane) alpha_seen[f.anti_stokes_dir]++;
    for (const auto& e : g.edges)
        if (e.v1 == 3) ray_seen[e.dir_index]++;
    for (int j = 0; j < 5; ++j) {
        CHECK(alpha_seen[j] == 1);
        CHECK(ray_seen[j] >= 1);
    }
    // half-plane indexing runs anticlockwise from the face holding alpha_0
    for (const auto& f : g.faces)
        if (f.kind == Face::Kind::half_plane && f.anti_stokes_dir == 0) CHECK(f.index == 0);
}

TEST_CASE("classification is invariant under the reflection a -> -conj(a), theta -> pi/2 - theta") {
    // polish the on-locus sample so both it and its mirror satisfy the
    // residual to well below the near-miss gray zone
    cplx on_s1(0.547737, -1.497033);
    for (int it = 0; it < 6; ++it) {
        const double h = 1e-7;
        const double r = sigma_residual(on_s1, kPi / 4.0, SigmaKind::plus1);
        const cplx grad((sigma_residual(on_s1 + h, kPi / 4.0, SigmaKind::plus1) -
                         sigma_residual(on_s1 - h, kPi / 4.0, SigmaKind::plus1)) /
                            (2 * h),
                        (sigma_residual(on_s1 + cplx(0, h), kPi / 4.0, SigmaKind::plus1) -
                         sigma_residual(on_s1 - cplx(0, h), kPi / 4.0, SigmaKind::plus1)) /
                            (2 * h));
        on_s1 -= r * grad / std::norm(grad);
    }
    for (auto [a, th] : {std::pair<cplx, double>{cplx(0.5, 1.2), 0.3},
                         {cplx(2.0, 2.0), 0.7},
                         {on_s1, kPi / 4.0}}) {
        StokesGraph g1 = classify(Potential(a, th));
        StokesGraph g2 = classify(Potential(-std::conj(a), kPi / 2.0 - th));
        CHECK(g1.type_label == g2.type_label);
        CHECK(g1.strip_count == g2.strip_count);
        CHECK(g1.short_trajectories.size() == g2.short_trajectories.size());
    }
}

TEST_CASE("crossing chi transversally passes through a one-short-trajectory label") {
    // at theta = pi/4 the triangle locus is the imaginary axis above t
    const double theta = kPi / 4.0;
    StokesGraph left = classify(Potential(cplx(-0.15, 2.0), theta));
    StokesGraph mid = classify(Potential(cplx(0.0, 2.0), theta));
    StokesGraph right = classify(Potential(cplx(0.15, 2.0), theta));
    CHECK(left.type_label == GraphType::A);
    CHECK(right.type_label == GraphType::A);
    CHECK(mid.type_label == GraphType::B);
}

TEST_CASE("membership on chi agrees with the tracer finding a short trajectory") {
    const double theta = kPi / 4.0 - 1e-14;
    LevelSetAtlas atlas = build_atlas(theta);
    // sample points on and off the locus
    std::vector<std::pair<cplx, bool>> samples;
    for (const auto& c : atlas.curves) {
        if (!c.in_chi || c.points.size() < 300) continue;
        samples.push_back({c.points[c.points.size() / 3], true});
        if (samples.size() >= 4) break;
    }
    samples.push_back({cplx(2.0, 2.0), false});
    samples.push_back({cplx(-2.5, 1.0), false});
    for (auto [a, expect_short] : samples) {
        if (std::abs(a - 1.0) < 0.1 || std::abs(a + 1.0) < 0.1) continue;
        StokesGraph g = classify(Potential(a, theta));
        CHECK((g.short_trajectories.size() > 0) == expect_short);
        Membership m = membership(atlas, a, 2e-3);
        CHECK((m.kind != Membership::Kind::interior) == expect_short);
    }
}
