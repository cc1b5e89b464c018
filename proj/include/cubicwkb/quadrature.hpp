#pragma once

#include <functional>

#include "cubicwkb/potential.hpp"

namespace cwkb {

struct QuadTol {
    double abs_tol = 1e-11;
    double rel_tol = 1e-10;
    int depth_cap = 40;
};

// Adaptive Gauss7/Kronrod15 on [t0, t1] for a complex-valued integrand.
cplx gk15_adaptive(const std::function<cplx(double)>& f, double t0, double t1,
                   const QuadTol& tol = {});

// Branch bookkeeping for sqrt(p_a) along paths.  base_value is the chosen
// root at base_point; continuation_log samples the continued values so the
// sheet-jump invariant (consecutive args differ by < pi/2) can be audited.
struct BranchContext {
    cplx base_point;
    cplx base_value;
    std::vector<std::pair<cplx, cplx>> continuation_log;
};

BranchContext make_branch_context(const Potential& pot, cplx base_point, bool principal = true);

// Analytic continuation of sqrt(p_a) along a polyline.  The path must keep
// distance > capture radius from every turning point.
BranchContext continue_branch(const Potential& pot, const BranchContext& ctx, const Polyline& path);

// Value of the continued sqrt(p_a) at the end of `path` starting from ctx.
cplx continue_sqrt(const Potential& pot, const BranchContext& ctx, const Polyline& path);

struct PathIntegral {
    cplx start;
    cplx end;
    cplx value;  // integral of e^{i theta} sqrt(p_a) dz along the recorded path
    BranchContext branch;
};

struct SqrtPathOptions {
    bool singular_start = false;  // start point is a turning point
    bool singular_end = false;    // end point is a turning point
    // Reference value of sqrt(p_a) at the first regular point of the path;
    // 0 means "principal local root" (sqrt(p'(tp) * (z - tp)) at a singular
    // start, principal sqrt(p) otherwise).
    cplx ref_start{0.0, 0.0};
    QuadTol tol{};
};

struct SqrtPathResult {
    cplx value;    // integral of sqrt(p_a) dz (no e^{i theta} factor)
    cplx ref_end;  // continued sqrt(p_a) at the path end (0 at a turning point end)
};

// Integral of sqrt(p_a) dz along a polyline with a single consistent branch;
// square-root endpoint singularities removed by the s^2 substitution.
SqrtPathResult integrate_sqrtp_path(const Potential& pot, const Polyline& path,
                                    const SqrtPathOptions& opts = {});

// Integral of e^{i theta} sqrt(p_a) dz from z0 to z along `path` (which must
// begin at z0 and end at z).  Turning-point endpoints are handled.
PathIntegral h_integral(const Potential& pot, cplx z0, cplx z, const Polyline& path,
                        const BranchContext& ctx, const QuadTol& tol = {});

// Arc-length integral of sqrt(|p_a|) |dz| along a polyline.
double abs_sqrtp_arclength(const Potential& pot, const Polyline& path, const QuadTol& tol = {});

}  // namespace cwkb
