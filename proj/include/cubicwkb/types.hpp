#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace cwkb {

using cplx = std::complex<double>;
using Polyline = std::vector<cplx>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Normalize an angle into [0, 2*pi).
inline double wrap_2pi(double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    return a;
}

// Normalize an angle into [0, pi).
inline double wrap_pi(double a) {
    a = std::fmod(a, kPi);
    if (a < 0.0) a += kPi;
    return a;
}

// Signed smallest difference between two directions on the circle.
inline double angle_diff(double a, double b) {
    double d = std::fmod(a - b, 2.0 * kPi);
    if (d > kPi) d -= 2.0 * kPi;
    if (d < -kPi) d += 2.0 * kPi;
    return d;
}

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PathTooCloseToTurningPoint : NumericError {
    using NumericError::NumericError;
};
struct QuadratureNotConverged : NumericError {
    using NumericError::NumericError;
};
struct BranchBreakdown : NumericError {
    using NumericError::NumericError;
};
struct StiffnessFailure : NumericError {
    using NumericError::NumericError;
};
struct NotActuallyShort : NumericError {
    using NumericError::NumericError;
};
struct SheetMismatch : NumericError {
    using NumericError::NumericError;
};
struct OnExcludedCut : NumericError {
    using NumericError::NumericError;
};
struct NewtonDiverged : NumericError {
    using NumericError::NumericError;
};
struct ContinuationStalled : NumericError {
    using NumericError::NumericError;
};
struct NoContraction : NumericError {
    using NumericError::NumericError;
};
struct OutsideValidityDomain : NumericError {
    using NumericError::NumericError;
};
struct InvalidData : NumericError {
    using NumericError::NumericError;
};
struct NotAccumulating : NumericError {
    using NumericError::NumericError;
};
struct NoSignChange : NumericError {
    using NumericError::NumericError;
};
struct IntegrationOverflow : NumericError {
    using NumericError::NumericError;
};
struct ZeroOnContour : NumericError {
    using NumericError::NumericError;
};
struct NonIntegerWinding : NumericError {
    using NumericError::NumericError;
};
struct NotOnTheta : NumericError {
    using NumericError::NumericError;
};

// Raised by the classifier when a trace ends inside the short-trajectory
// gray zone; carries both candidate labels instead of guessing.
struct AmbiguousNearMiss : NumericError {
    std::string label_a, label_b;
    AmbiguousNearMiss(const std::string& la, const std::string& lb)
        : NumericError("ambiguous near miss between types " + la + " and " + lb),
          label_a(la), label_b(lb) {}
};

inline double dist_point_segment(cplx p, cplx a, cplx b) {
    const cplx ab = b - a;
    const double L2 = std::norm(ab);
    if (L2 == 0.0) return std::abs(p - a);
    double t = ((p.real() - a.real()) * ab.real() + (p.imag() - a.imag()) * ab.imag()) / L2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

inline double dist_point_polyline(cplx p, const Polyline& poly) {
    if (poly.empty()) return std::numeric_limits<double>::infinity();
    if (poly.size() == 1) return std::abs(p - poly[0]);
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < poly.size(); ++i)
        d = std::min(d, dist_point_segment(p, poly[i], poly[i + 1]));
    return d;
}

inline double polyline_length(const Polyline& poly) {
    double L = 0.0;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) L += std::abs(poly[i + 1] - poly[i]);
    return L;
}

}  // namespace cwkb
