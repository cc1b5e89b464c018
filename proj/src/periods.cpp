#include "cubicwkb/periods.hpp"

#include <cmath>

namespace cwkb {

Period segment_period(const Potential& pot, int tp0, int tp1, const Polyline* connecting_path) {
    if (tp0 == tp1) {
        Period p;
        p.tp0 = tp0;
        p.tp1 = tp1;
        p.value = cplx(0.0, 0.0);
        p.abs_value = 0.0;
        return p;
    }
    const cplx A = turning_point_location(pot, tp0);
    const cplx B = turning_point_location(pot, tp1);
    Polyline path;
    if (connecting_path != nullptr && connecting_path->size() >= 2) {
        path = *connecting_path;
    } else {
        path = {A, B};
        // keep clear of the third turning point
        const int third = 3 - tp0 - tp1;
        const cplx C = turning_point_location(pot, third);
        const double d = dist_point_segment(C, A, B);
        if (d < 2.0 * pot.capture_radius()) {
            // bow the path slightly to the side away from C
            const cplx dir = (B - A) / std::abs(B - A);
            cplx n(-dir.imag(), dir.real());
            const double side = std::imag(std::conj(dir) * (C - A));
            if (side > 0) n = -n;
            path = {A, 0.5 * (A + B) + 4.0 * pot.capture_radius() * n, B};
        }
    }
    SqrtPathOptions opts;
    opts.singular_start = true;
    opts.singular_end = true;
    SqrtPathResult r = integrate_sqrtp_path(pot, path, opts);
    Period p;
    p.tp0 = tp0;
    p.tp1 = tp1;
    p.value = 2.0 * std::polar(1.0, pot.theta) * r.value;
    // arc-length form: along a trajectory |sqrt(p) dz| = |dh|, and h moves
    // monotonically, so summing |h-increment| per node pair reproduces the
    // integral of sqrt|p| |dz| along the curve the nodes sample
    double absv = 0.0;
    cplx ref(0.0, 0.0);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        SqrtPathOptions o2;
        o2.singular_start = (i == 0);
        o2.singular_end = (i + 2 == path.size());
        o2.ref_start = ref;
        SqrtPathResult piece = integrate_sqrtp_path(pot, {path[i], path[i + 1]}, o2);
        absv += std::abs(piece.value);
        ref = piece.ref_end;
    }
    p.abs_value = 2.0 * absv;
    return p;
}

cplx loop_period(const Potential& pot, const Polyline& contour) {
    if (contour.size() < 3 || std::abs(contour.front() - contour.back()) > 1e-12)
        throw std::invalid_argument("loop_period: contour must be closed");
    for (cplx z : contour)
        if (pot.dist_to_turning_points(z) < pot.capture_radius())
            throw PathTooCloseToTurningPoint("loop_period: contour clearance violated");
    SqrtPathOptions opts;
    opts.ref_start = std::sqrt(pot.eval(contour.front()));
    SqrtPathResult r = integrate_sqrtp_path(pot, contour, opts);
    if (std::abs(r.ref_end - opts.ref_start) >
        1e-6 * std::max(1.0, std::abs(opts.ref_start)))
        throw SheetMismatch("loop_period: branch did not return to its sheet");
    return std::polar(1.0, pot.theta) * r.value;
}

double tree_period_ratio(const Potential& pot) {
    const Period p1 = segment_period(pot, 2, 1);   // around (a, +1)
    const Period p2 = segment_period(pot, 2, 0);   // around (a, -1)
    return std::abs(p1.value) / std::abs(p2.value);
}

RationalApprox detect_rational(double alpha, double tol, long max_den) {
    RationalApprox out;
    double x = alpha;
    // convergents: h_{-1}=1, k_{-1}=0; h_0=a0, k_0=1
    long hm1 = 1, km1 = 0, h = static_cast<long>(std::floor(x)), k = 1;
    double frac = x - std::floor(x);
    for (int it = 0; it < 64; ++it) {
        const double approx = static_cast<double>(h) / static_cast<double>(k);
        const double res = std::abs(alpha - approx);
        if (res < tol) {
            out.is_rational = true;
            out.p = h;
            out.q = k;
            out.residual = res;
            return out;
        }
        if (frac < 1e-15) break;
        x = 1.0 / frac;
        const double fl = std::floor(x);
        if (fl > 1e15) break;
        const long an = static_cast<long>(fl);
        frac = x - fl;
        const long hn = an * h + hm1;
        const long kn = an * k + km1;
        if (kn > max_den) break;
        hm1 = h;
        km1 = k;
        h = hn;
        k = kn;
    }
    out.is_rational = false;
    out.p = h;
    out.q = k;
    out.residual = std::abs(alpha - static_cast<double>(h) / static_cast<double>(k));
    return out;
}

Polyline capsule_contour(const Potential& pot, int tp0, int tp1, double clearance) {
    const cplx A = turning_point_location(pot, tp0);
    const cplx B = turning_point_location(pot, tp1);
    const cplx dir = (B - A) / std::abs(B - A);
    const cplx n(-dir.imag(), dir.real());
    const double r = clearance;
    Polyline c;
    const int m = 24;
    // side 1
    for (int i = 0; i <= m; ++i) {
        const double t = double(i) / m;
        c.push_back(A + t * (B - A) + r * n);
    }
    // cap around B
    for (int i = 1; i < m; ++i) {
        const double ang = std::arg(n) - kPi * i / m;
        c.push_back(B + std::polar(r, ang));
    }
    // side 2
    for (int i = 0; i <= m; ++i) {
        const double t = double(i) / m;
        c.push_back(B - t * (B - A) - r * n);
    }
    // cap around A
    for (int i = 1; i < m; ++i) {
        const double ang = std::arg(-n) - kPi * i / m;
        c.push_back(A + std::polar(r, ang));
    }
    c.push_back(c.front());
    return c;
}

}  // namespace cwkb
