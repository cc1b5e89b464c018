#pragma once

#include <optional>

#include "cubicwkb/trajectory.hpp"

namespace cwkb {

// Contour integral of e^{i theta} sqrt(p_a) dz around a short trajectory,
// reduced to twice the turning-point-to-turning-point integral, plus the
// arc-length form used by the zero-count asymptotics.
struct Period {
    int tp0 = -1, tp1 = -1;
    cplx value;            // loop value (2x the segment integral)
    double abs_value = 0;  // arc-length form: contour integral of sqrt|p| |dz|
};

// value = 2 Int over the connecting path (straight segment by default, or a
// caller-supplied short-trajectory polyline) with endpoint singularities
// removed.  abs_value integrates sqrt|p| |dz| along the same path, doubled.
Period segment_period(const Potential& pot, int tp0, int tp1,
                      const Polyline* connecting_path = nullptr);

// Loop quadrature with branch continuation around a closed polyline; throws
// SheetMismatch unless the branch returns to its starting sheet (i.e. the
// contour encloses an even number of turning points).
cplx loop_period(const Potential& pot, const Polyline& contour);

// |period around (a,+1)| / |period around (a,-1)| for a tree configuration.
double tree_period_ratio(const Potential& pot);

struct RationalApprox {
    bool is_rational = false;  // within tolerance
    long p = 0, q = 1;
    double residual = 0.0;
};

// Continued-fraction detection, truncated when the next convergent's
// denominator exceeds 10^4 or the residual drops below 1e-9.  Reported as
// "rational within tolerance", never asserted exactly.
RationalApprox detect_rational(double alpha, double tol = 1e-9, long max_den = 10000);

// A capsule-shaped contour around the segment [tp0, tp1] keeping the given
// clearance from both endpoints (and from the third turning point if needed).
Polyline capsule_contour(const Potential& pot, int tp0, int tp1, double clearance);

}  // namespace cwkb
