#pragma once

#include <array>
#include <optional>

#include "cubicwkb/types.hpp"

namespace cwkb {

// The cubic p_a(z) = (z-1)(z+1)(z-a) together with the phase angle theta of
// the spectral parameter.  theta lives in [0, pi); operations that need the
// narrower [0, pi/2) range say so at their call sites.
struct Potential {
    cplx a;
    double theta = 0.0;
    std::optional<double> lambda_mod;

    Potential(cplx a_, double theta_, std::optional<double> lm = std::nullopt)
        : a(a_), theta(wrap_pi(theta_)), lambda_mod(lm) {
        if (a == cplx(1.0, 0.0) || a == cplx(-1.0, 0.0))
            throw std::invalid_argument("potential: a must avoid the fixed turning points -1, +1");
        if (lambda_mod && *lambda_mod <= 0.0)
            throw std::invalid_argument("potential: |lambda| must be positive");
    }

    // Factored evaluation keeps the zeros exact.
    cplx eval(cplx z) const { return (z - 1.0) * (z + 1.0) * (z - a); }
    cplx deriv(cplx z) const { return (z + 1.0) * (z - a) + (z - 1.0) * (z - a) + (z - 1.0) * (z + 1.0); }
    cplx deriv2(cplx z) const { return 2.0 * ((z - a) + (z + 1.0) + (z - 1.0)); }

    std::array<cplx, 3> turning_points() const { return {cplx(-1.0, 0.0), cplx(1.0, 0.0), a}; }

    double capture_radius() const { return 1e-3 * (1.0 + std::abs(a)); }
    double escape_radius() const { return 20.0 * std::max(1.0, std::abs(a)); }

    double dist_to_turning_points(cplx z) const {
        double d = std::abs(z - a);
        d = std::min(d, std::abs(z - 1.0));
        d = std::min(d, std::abs(z + 1.0));
        return d;
    }
};

inline cplx potential_eval(const Potential& pot, cplx z) { return pot.eval(z); }

struct CriticalDirections {
    std::array<double, 5> alpha;       // anti-Stokes directions at infinity
    std::array<double, 5> alpha_perp;  // Stokes directions at infinity
};

// alpha_j = (2 j pi - 2 theta)/5, alpha_j^perp = ((2j-1) pi - 2 theta)/5,
// normalized into [0, 2 pi).
CriticalDirections critical_directions(const Potential& pot);

struct TurningPoint {
    cplx location;
    std::array<double, 3> local_directions;             // Stokes departures
    std::array<double, 3> local_orthogonal_directions;  // anti-Stokes departures
};

// Departure directions at a simple zero: e^{2 i theta} p_a dz^2 < 0 along
// phi_k = (pi - 2 theta - arg p_a'(tp) + 2 k pi)/3.
TurningPoint make_turning_point(const Potential& pot, cplx location);

std::array<double, 3> local_stokes_directions(const Potential& pot, const TurningPoint& tp);

}  // namespace cwkb
