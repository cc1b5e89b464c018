#include "cubicwkb/potential.hpp"

namespace cwkb {

CriticalDirections critical_directions(const Potential& pot) {
    CriticalDirections out;
    for (int j = 0; j < 5; ++j) {
        out.alpha[j] = wrap_2pi((2.0 * j * kPi - 2.0 * pot.theta) / 5.0);
        out.alpha_perp[j] = wrap_2pi(((2.0 * j - 1.0) * kPi - 2.0 * pot.theta) / 5.0);
    }
    return out;
}

TurningPoint make_turning_point(const Potential& pot, cplx location) {
    const double d = std::min({std::abs(location - 1.0), std::abs(location + 1.0),
                               std::abs(location - pot.a)});
    if (d != 0.0)
        throw std::invalid_argument("make_turning_point: location is not a zero of p_a");
    TurningPoint tp;
    tp.location = location;
    const double ap = std::arg(pot.deriv(location));
    for (int k = 0; k < 3; ++k) {
        tp.local_directions[k] = wrap_2pi((kPi - 2.0 * pot.theta - ap + 2.0 * k * kPi) / 3.0);
        tp.local_orthogonal_directions[k] = wrap_2pi((-2.0 * pot.theta - ap + 2.0 * k * kPi) / 3.0);
    }
    return tp;
}

std::array<double, 3> local_stokes_directions(const Potential& pot, const TurningPoint& tp) {
    (void)pot;
    return tp.local_directions;
}

}  // namespace cwkb
