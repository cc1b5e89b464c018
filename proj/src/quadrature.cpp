#include "cubicwkb/quadrature.hpp"

#include <cmath>

namespace cwkb {
namespace {

// QUADPACK Gauss7/Kronrod15 abscissae and weights on [-1, 1].
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GKOut {
    cplx value;
    double err;
};

GKOut gk15_once(const std::function<cplx(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    cplx fk[15];
    for (int i = 0; i < 7; ++i) {
        fk[i] = f(c - h * kXgk[i]);
        fk[14 - i] = f(c + h * kXgk[i]);
    }
    fk[7] = f(c);
    cplx resk(0.0, 0.0), resg(0.0, 0.0);
    for (int i = 0; i < 7; ++i) resk += kWgk[i] * (fk[i] + fk[14 - i]);
    resk += kWgk[7] * fk[7];
    resg = kWg[3] * fk[7];
    for (int i = 0; i < 3; ++i) resg += kWg[i] * (fk[2 * i + 1] + fk[13 - 2 * i]);
    GKOut out;
    out.value = resk * h;
    out.err = std::abs((resk - resg) * h);
    return out;
}

cplx gk15_rec(const std::function<cplx(double)>& f, double a, double b, const QuadTol& tol,
              double scale, int depth) {
    GKOut g = gk15_once(f, a, b);
    if (g.err <= tol.abs_tol || g.err <= tol.rel_tol * std::max(scale, std::abs(g.value)))
        return g.value;
    if (depth >= tol.depth_cap)
        throw QuadratureNotConverged("gk15: depth cap reached, err=" + std::to_string(g.err));
    const double m = 0.5 * (a + b);
    return gk15_rec(f, a, m, tol, scale, depth + 1) + gk15_rec(f, m, b, tol, scale, depth + 1);
}

// Root of p closest to ref among the two square roots.
inline cplx sqrt_match(cplx p, cplx ref) {
    const cplx r = std::sqrt(p);
    return (std::abs(r - ref) <= std::abs(-r - ref)) ? r : -r;
}

// Splits [0,1] so that arg(p) varies by < pi/4 per piece along z(t).
void arg_breakpoints(const Potential& pot, const std::function<cplx(double)>& zfun, double t0,
                     double t1, int depth, std::vector<double>& out) {
    const cplx pa = pot.eval(zfun(t0));
    const cplx pm = pot.eval(zfun(0.5 * (t0 + t1)));
    const cplx pb = pot.eval(zfun(t1));
    auto dstep = [](cplx u, cplx v) {
        if (u == cplx(0.0, 0.0) || v == cplx(0.0, 0.0)) return 0.0;
        return std::abs(std::arg(v / u));
    };
    if (depth < 24 && (dstep(pa, pm) > 0.25 * kPi || dstep(pm, pb) > 0.25 * kPi ||
                       dstep(pa, pb) > 0.25 * kPi)) {
        arg_breakpoints(pot, zfun, t0, 0.5 * (t0 + t1), depth + 1, out);
        arg_breakpoints(pot, zfun, 0.5 * (t0 + t1), t1, depth + 1, out);
    } else {
        out.push_back(t1);
    }
}

// One regular (non-singular) straight segment with a consistent branch.
// refA is the continued sqrt(p) at A; returns integral and the value at B.
struct SegOut {
    cplx value;
    cplx refB;
};

SegOut sqrtp_segment(const Potential& pot, cplx A, cplx B, cplx refA, const QuadTol& tol) {
    auto zfun = [&](double t) { return A + t * (B - A); };
    std::vector<double> brk;
    brk.push_back(0.0);
    arg_breakpoints(pot, zfun, 0.0, 1.0, 0, brk);
    cplx total(0.0, 0.0);
    cplx ref = refA;
    const double scale = std::abs(B - A) * std::sqrt(std::abs(pot.eval(zfun(0.5)))) + 1e-30;
    for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
        const double ta = brk[i], tb = brk[i + 1];
        const cplx piece_ref = ref;
        auto f = [&](double t) { return sqrt_match(pot.eval(zfun(t)), piece_ref) * (B - A); };
        total += gk15_rec(f, ta, tb, tol, scale, 0);
        ref = sqrt_match(pot.eval(zfun(tb)), piece_ref);
    }
    return {total, ref};
}

// Singular piece starting exactly at a turning point z0 and running to zc
// along a straight line; substitution z = z0 + s^2 (zc - z0) makes the
// integrand smooth.  sigma = +1 takes the principal branch of
// sqrt(p'(z0) (zc - z0)) as the outgoing reference direction.
SegOut sqrtp_singular_from(const Potential& pot, cplx z0, cplx zc, double sigma,
                           const QuadTol& tol) {
    const cplx d = zc - z0;
    const cplx lead = std::sqrt(pot.deriv(z0) * d);  // principal
    auto f = [&](double s) {
        const cplx z = z0 + s * s * d;
        const cplx ref = sigma * lead * s;
        cplx v;
        if (s == 0.0)
            v = cplx(0.0, 0.0);
        else
            v = sqrt_match(pot.eval(z), ref);
        return v * 2.0 * s * d;
    };
    const double scale = std::abs(d) * std::abs(lead) + 1e-30;
    SegOut out;
    out.value = gk15_rec(f, 0.0, 1.0, tol, scale, 0);
    out.refB = sigma * sqrt_match(pot.eval(zc), sigma * lead);
    return out;
}

bool is_turning_point(const Potential& pot, cplx z) {
    return z == pot.a || z == cplx(1.0, 0.0) || z == cplx(-1.0, 0.0) ||
           pot.dist_to_turning_points(z) == 0.0;
}

}  // namespace

cplx gk15_adaptive(const std::function<cplx(double)>& f, double t0, double t1,
                   const QuadTol& tol) {
    if (t0 == t1) return cplx(0.0, 0.0);
    return gk15_rec(f, t0, t1, tol, 0.0, 0);
}

BranchContext make_branch_context(const Potential& pot, cplx base_point, bool principal) {
    BranchContext ctx;
    ctx.base_point = base_point;
    const cplx r = std::sqrt(pot.eval(base_point));
    ctx.base_value = principal ? r : -r;
    ctx.continuation_log.push_back({base_point, ctx.base_value});
    return ctx;
}

BranchContext continue_branch(const Potential& pot, const BranchContext& ctx,
                              const Polyline& path) {
    if (path.empty()) return ctx;
    BranchContext out = ctx;
    cplx zp = path.front();
    cplx ref = sqrt_match(pot.eval(zp), ctx.continuation_log.empty()
                                            ? ctx.base_value
                                            : ctx.continuation_log.back().second);
    const double delta = pot.capture_radius();
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const cplx A = path[i], B = path[i + 1];
        const double len = std::abs(B - A);
        if (len == 0.0) continue;
        double t = 0.0;
        while (t < 1.0) {
            const cplx z = A + t * (B - A);
            const double dmin = pot.dist_to_turning_points(z);
            if (dmin <= delta)
                throw PathTooCloseToTurningPoint("continue_branch: clearance violated");
            // step keeps the argument drift of sqrt(p) below pi/4
            double dt = std::min(1.0 - t, 0.4 * dmin / len);
            if (dt <= 0.0) dt = 1.0 - t;
            const cplx zn = A + (t + dt) * (B - A);
            const cplx vn = sqrt_match(pot.eval(zn), ref);
            if (std::abs(std::arg(vn / ref)) >= 0.5 * kPi)
                throw BranchBreakdown("continue_branch: sheet jump detected");
            ref = vn;
            out.continuation_log.push_back({zn, vn});
            t += dt;
        }
    }
    return out;
}

cplx continue_sqrt(const Potential& pot, const BranchContext& ctx, const Polyline& path) {
    return continue_branch(pot, ctx, path).continuation_log.back().second;
}

SqrtPathResult integrate_sqrtp_path(const Potential& pot, const Polyline& path_in,
                                    const SqrtPathOptions& opts) {
    if (path_in.size() < 2) return {cplx(0.0, 0.0), opts.ref_start};
    Polyline path = path_in;
    if (opts.singular_start && opts.singular_end && path.size() == 2)
        path.insert(path.begin() + 1, 0.5 * (path[0] + path[1]));
    cplx total(0.0, 0.0);
    cplx ref = opts.ref_start;
    std::size_t first = 0, last = path.size() - 1;

    if (opts.singular_start) {
        const cplx z0 = path[0];
        cplx zc = path[1];
        // keep the substitution piece well inside the other roots' influence
        double room = 1e300;
        for (cplx tp : pot.turning_points())
            if (std::abs(tp - z0) > 0.0) room = std::min(room, std::abs(tp - z0));
        const double len = std::abs(zc - z0);
        bool split = false;
        if (len > 0.4 * room) {
            zc = z0 + (0.4 * room / len) * (zc - z0);
            split = true;
        }
        double sigma = 1.0;
        if (ref != cplx(0.0, 0.0)) {
            const cplx lead = std::sqrt(pot.deriv(z0) * (zc - z0));
            sigma = (std::abs(lead - ref) <= std::abs(-lead - ref)) ? 1.0 : -1.0;
        }
        SegOut s = sqrtp_singular_from(pot, z0, zc, sigma, opts.tol);
        total += s.value;
        ref = s.refB;
        if (split) {
            SegOut r = sqrtp_segment(pot, zc, path[1], ref, opts.tol);
            total += r.value;
            ref = r.refB;
        }
        first = 1;
    } else if (ref == cplx(0.0, 0.0)) {
        ref = std::sqrt(pot.eval(path[0]));
    }

    const std::size_t stop = opts.singular_end ? last - 1 : last;
    for (std::size_t i = first; i < stop; ++i) {
        if (path[i] == path[i + 1]) continue;
        SegOut s = sqrtp_segment(pot, path[i], path[i + 1], ref, opts.tol);
        total += s.value;
        ref = s.refB;
    }

    if (opts.singular_end) {
        const cplx z1 = path[last];
        cplx zc = path[last - 1];
        double room = 1e300;
        for (cplx tp : pot.turning_points())
            if (std::abs(tp - z1) > 0.0) room = std::min(room, std::abs(tp - z1));
        const double len = std::abs(zc - z1);
        if (len > 0.4 * room) {
            const cplx zmid = z1 + (0.4 * room / len) * (zc - z1);
            SegOut r = sqrtp_segment(pot, zc, zmid, ref, opts.tol);
            total += r.value;
            ref = r.refB;
            zc = zmid;
        }
        // reversed singular piece: z = z1 + s^2 (zc - z1), s: 1 -> 0
        const cplx d = zc - z1;
        const cplx lead = std::sqrt(pot.deriv(z1) * d);
        const double sigma = (std::abs(lead - ref) <= std::abs(-lead - ref)) ? 1.0 : -1.0;
        auto f = [&](double s) {
            if (s == 0.0) return cplx(0.0, 0.0);
            const cplx z = z1 + s * s * d;
            const cplx v = sqrt_match(pot.eval(z), sigma * lead * s);
            return v * 2.0 * s * d;
        };
        const double scale = std::abs(d) * std::abs(lead) + 1e-30;
        total -= gk15_rec(f, 0.0, 1.0, opts.tol, scale, 0);
        ref = cplx(0.0, 0.0);
    }
    return {total, ref};
}

PathIntegral h_integral(const Potential& pot, cplx z0, cplx z, const Polyline& path,
                        const BranchContext& ctx, const QuadTol& tol) {
    if (path.size() < 2 || path.front() != z0 || path.back() != z) {
        if (z0 == z) {
            PathIntegral out;
            out.start = z0;
            out.end = z;
            out.value = cplx(0.0, 0.0);
            out.branch = ctx;
            return out;
        }
        throw std::invalid_argument("h_integral: path must run from z0 to z");
    }
    SqrtPathOptions opts;
    opts.singular_start = is_turning_point(pot, z0);
    opts.singular_end = is_turning_point(pot, z);
    opts.ref_start = opts.singular_start ? cplx(0.0, 0.0) : ctx.base_value;
    if (!opts.singular_start && ctx.base_point != z0) {
        // carry the context branch to the path start along a straight leg
        Polyline leg{ctx.base_point, z0};
        opts.ref_start = continue_sqrt(pot, ctx, leg);
    }
    opts.tol = tol;
    SqrtPathResult r = integrate_sqrtp_path(pot, path, opts);
    PathIntegral out;
    out.start = z0;
    out.end = z;
    out.value = std::polar(1.0, pot.theta) * r.value;
    out.branch = ctx;
    out.branch.continuation_log.push_back({z, r.ref_end});
    return out;
}

double abs_sqrtp_arclength(const Potential& pot, const Polyline& path, const QuadTol& tol) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const cplx A = path[i], B = path[i + 1];
        const double len = std::abs(B - A);
        if (len == 0.0) continue;
        const bool singA = is_turning_point(pot, A);
        const bool singB = is_turning_point(pot, B);
        auto g = [&](double t) {
            return cplx(std::sqrt(std::abs(pot.eval(A + t * (B - A)))) * len, 0.0);
        };
        if (singA && !singB) {
            auto f = [&](double s) { return g(s * s) * 2.0 * s; };
            total += gk15_rec(f, 0.0, 1.0, tol, len, 0).real();
        } else if (singB && !singA) {
            auto f = [&](double s) { return g(1.0 - s * s) * 2.0 * s; };
            total += gk15_rec(f, 0.0, 1.0, tol, len, 0).real();
        } else {
            total += gk15_rec(g, 0.0, 1.0, tol, len, 0).real();
        }
    }
    return total;
}

}  // namespace cwkb
