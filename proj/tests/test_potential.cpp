#include <doctest.h>

#include "cubicwkb/potential.hpp"

using namespace cwkb;

TEST_CASE("potential evaluation at the turning points is exactly zero") {
    Potential pot(cplx(0.0, 2.0), 0.0);
    CHECK(pot.eval(cplx(1.0, 0.0)) == cplx(0.0, 0.0));
    CHECK(pot.eval(cplx(-1.0, 0.0)) == cplx(0.0, 0.0));
    CHECK(pot.eval(pot.a) == cplx(0.0, 0.0));
    // direct expansion: p(0) = (0-1)(0+1)(0-2i) = 2i
    CHECK(std::abs(pot.eval(cplx(0.0, 0.0)) - cplx(0.0, 2.0)) < 1e-15);
}

TEST_CASE("potential rejects the punctured points and bad |lambda|") {
    CHECK_THROWS_AS(Potential(cplx(1.0, 0.0), 0.3), std::invalid_argument);
    CHECK_THROWS_AS(Potential(cplx(-1.0, 0.0), 0.3), std::invalid_argument);
    CHECK_THROWS_AS(Potential(cplx(0.0, 2.0), 0.3, -1.0), std::invalid_argument);
}

TEST_CASE("theta is normalized to [0, pi)") {
    Potential pot(cplx(0.0, 2.0), 3.5 * kPi);
    CHECK(pot.theta >= 0.0);
    CHECK(pot.theta < kPi);
    CHECK(pot.theta == doctest::Approx(0.5 * kPi));
}

TEST_CASE("critical directions") {
    Potential p0(cplx(0.0, 2.0), 0.0);
    CriticalDirections cd = critical_directions(p0);
    CHECK(cd.alpha[0] == doctest::Approx(0.0));
    CHECK(cd.alpha[1] == doctest::Approx(2.0 * kPi / 5.0));
    CHECK(cd.alpha_perp[0] == doctest::Approx(2.0 * kPi - kPi / 5.0));  // -pi/5 mod 2pi

    Potential p4(cplx(0.0, 2.0), kPi / 4.0);
    cd = critical_directions(p4);
    CHECK(cd.alpha[0] == doctest::Approx(2.0 * kPi - kPi / 10.0));  // -pi/10 mod 2pi

    // theta = pi/2: alpha_j^perp = ((2j-1)pi - pi)/5 = (2j-2)pi/5
    Potential p2(cplx(0.0, 2.0), kPi / 2.0);
    cd = critical_directions(p2);
    for (int j = 0; j < 5; ++j)
        CHECK(cd.alpha_perp[j] == doctest::Approx(wrap_2pi((2.0 * j - 2.0) * kPi / 5.0)));
}

TEST_CASE("local stokes directions are separated by 2 pi/3") {
    Potential pot(cplx(0.0, 2.0), 0.0);
    TurningPoint tp = make_turning_point(pot, cplx(1.0, 0.0));
    const double d10 = wrap_2pi(tp.local_directions[1] - tp.local_directions[0]);
    const double d21 = wrap_2pi(tp.local_directions[2] - tp.local_directions[1]);
    CHECK(d10 == doctest::Approx(2.0 * kPi / 3.0));
    CHECK(d21 == doctest::Approx(2.0 * kPi / 3.0));
    // explicit formula: p'(1) = 2(1-a) = 2-4i
    const double expect = wrap_2pi((kPi - std::arg(cplx(2.0, -4.0))) / 3.0);
    CHECK(tp.local_directions[0] == doctest::Approx(expect));
}
