#include <doctest.h>

#include <random>

#include "cubicwkb/quadrature.hpp"

using namespace cwkb;

namespace {

// dense trapezoid oracle for the branch-continued sqrt(p) line integral
cplx trapezoid_oracle(const Potential& pot, cplx A, cplx B, int n) {
    cplx sum(0.0, 0.0);
    cplx ref = std::sqrt(pot.eval(A + (0.5 / n) * (B - A)));
    cplx prev = ref;
    for (int i = 0; i <= n; ++i) {
        const double t = double(i) / n;
        cplx v = std::sqrt(pot.eval(A + t * (B - A)));
        if (std::abs(v - prev) > std::abs(-v - prev)) v = -v;
        sum += (i == 0 || i == n) ? 0.5 * v : v;
        prev = v;
    }
    return sum * (B - A) / double(n);
}

}  // namespace

TEST_CASE("h integral vanishes on the empty path") {
    Potential pot(cplx(0.0, 2.0), 0.3);
    BranchContext ctx = make_branch_context(pot, cplx(0.5, 0.5));
    PathIntegral pi = h_integral(pot, cplx(0.5, 0.5), cplx(0.5, 0.5), {}, ctx);
    CHECK(pi.value == cplx(0.0, 0.0));
}

TEST_CASE("homotopic paths in a turning-point-free disk agree") {
    Potential pot(cplx(0.0, 2.0), 0.6);
    const cplx z0(2.5, 0.5), z1(3.5, 1.5);
    BranchContext ctx = make_branch_context(pot, z0);
    PathIntegral direct = h_integral(pot, z0, z1, {z0, z1}, ctx);
    PathIntegral bent = h_integral(pot, z0, z1, {z0, cplx(3.2, 0.2), cplx(3.6, 0.9), z1}, ctx);
    CHECK(std::abs(direct.value - bent.value) < 1e-10);
}

TEST_CASE("segment [-1,1] with a strictly inside is handled with real/imaginary split") {
    // a in (-1,1), theta = 0: on (-1,a) the integrand is real (one sign),
    // on (a,1) purely imaginary, so the integral splits cleanly; checked
    // against a dense trapezoid oracle on each half.
    Potential pot(cplx(-0.3, 0.0), 0.0);
    SqrtPathOptions opts;
    opts.singular_start = true;
    opts.singular_end = true;
    SqrtPathResult left = integrate_sqrtp_path(pot, {cplx(-1.0, 0.0), pot.a}, opts);
    SqrtPathResult right = integrate_sqrtp_path(pot, {pot.a, cplx(1.0, 0.0)}, opts);
    // p > 0 on (-1,a) so the integral is real; p < 0 on (a,1) so it is imaginary
    CHECK(std::abs(left.value.imag()) < 1e-9);
    CHECK(std::abs(right.value.real()) < 1e-9);

    const int n = 1000000;
    cplx ol(0.0, 0.0), orr(0.0, 0.0);
    for (int i = 0; i < n; ++i) {
        const double t = (i + 0.5) / n;
        const cplx zl = cplx(-1.0, 0.0) + t * (pot.a - cplx(-1.0, 0.0));
        const cplx zr = pot.a + t * (cplx(1.0, 0.0) - pot.a);
        ol += std::sqrt(std::abs(pot.eval(zl)));
        orr += std::sqrt(std::abs(pot.eval(zr)));
    }
    ol *= (pot.a + 1.0) / double(n);
    orr *= (1.0 - pot.a) / double(n);
    CHECK(std::abs(std::abs(left.value) - std::abs(ol)) < 1e-6);
    CHECK(std::abs(std::abs(right.value) - std::abs(orr)) < 1e-6);
}

TEST_CASE("adaptive quadrature matches dense trapezoid on random clear segments") {
    std::mt19937 rng(20240811u);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    int done = 0;
    while (done < 100) {
        const Potential pot(cplx(u(rng), u(rng)), std::abs(u(rng)) / 3.0);
        const cplx A(u(rng), u(rng)), B(u(rng), u(rng));
        if (std::abs(B - A) < 0.2) continue;
        // keep the segment clear of all turning points
        bool clear = true;
        for (cplx tp : pot.turning_points())
            if (dist_point_segment(tp, A, B) < 0.15) clear = false;
        if (!clear) continue;
        SqrtPathOptions opts;
        opts.ref_start = std::sqrt(pot.eval(A));
        SqrtPathResult r = integrate_sqrtp_path(pot, {A, B}, opts);
        const cplx oracle = trapezoid_oracle(pot, A, B, 200000);
        CHECK(std::abs(r.value - oracle) < 1e-8 * std::max(1.0, std::abs(oracle)));
        ++done;
    }
}

TEST_CASE("branch monodromy parity on random loops") {
    std::mt19937 rng(77u);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> radius(0.05, 4.0);
    int done = 0;
    while (done < 1000) {
        const Potential pot(cplx(u(rng), u(rng)), 0.0);
        const cplx c(u(rng), u(rng));
        const double r = radius(rng);
        // circle must stay clear of all turning points
        bool ok = true;
        int enclosed = 0;
        for (cplx tp : pot.turning_points()) {
            const double d = std::abs(tp - c);
            if (std::abs(d - r) < 0.08) ok = false;
            if (d < r) ++enclosed;
        }
        if (!ok) continue;
        Polyline loop;
        const int m = 256;
        for (int i = 0; i <= m; ++i)
            loop.push_back(c + std::polar(r, 2.0 * kPi * i / m));
        cplx start = std::sqrt(pot.eval(loop.front()));
        BranchContext ctx;
        ctx.base_point = loop.front();
        ctx.base_value = start;
        ctx.continuation_log.push_back({loop.front(), start});
        cplx end;
        try {
            end = continue_sqrt(pot, ctx, loop);
        } catch (const PathTooCloseToTurningPoint&) {
            continue;
        }
        if (enclosed % 2 == 1)
            CHECK(std::abs(end + start) < 1e-9 * std::abs(start));
        else
            CHECK(std::abs(end - start) < 1e-9 * std::abs(start));
        ++done;
    }
}

TEST_CASE("continue_branch log never jumps sheets") {
    Potential pot(cplx(0.5, 1.5), 0.2);
    Polyline path;
    for (int i = 0; i <= 200; ++i)
        path.push_back(cplx(-2.0 + 4.0 * i / 200.0, -1.2));
    BranchContext ctx = make_branch_context(pot, path.front());
    BranchContext out = continue_branch(pot, ctx, path);
    CHECK(std::abs(out.base_value * out.base_value - pot.eval(out.base_point)) <=
          1e-12 * std::abs(pot.eval(out.base_point)));
    for (std::size_t i = 1; i < out.continuation_log.size(); ++i) {
        const cplx u = out.continuation_log[i - 1].second;
        const cplx v = out.continuation_log[i].second;
        CHECK(std::abs(std::arg(v / u)) < 0.5 * kPi);
    }
}

TEST_CASE("clearance precondition is enforced") {
    Potential pot(cplx(0.0, 2.0), 0.0);
    Polyline path{cplx(-2.0, 0.0), cplx(2.0, 0.0)};  // passes through +-1
    BranchContext ctx = make_branch_context(pot, path.front());
    CHECK_THROWS_AS(continue_branch(pot, ctx, path), PathTooCloseToTurningPoint);
}
