#include "cubicwkb/wkb.hpp"

#include <cmath>

namespace cwkb {

double wkb_error_integrand(const Potential& pot, cplx z) {
    const cplx p = pot.eval(z);
    const cplx dp = pot.deriv(z);
    const cplx d2p = pot.deriv2(z);
    const cplx term = (5.0 / 16.0) * dp * dp / (p * p * p) - d2p / (4.0 * p * p);
    return std::abs(term) * std::sqrt(std::abs(p));
}

double r_epsilon(const Potential& pot, const std::vector<Polyline>& path_family) {
    double sup = 0.0;
    for (const Polyline& path : path_family) {
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            const cplx A = path[i], B = path[i + 1];
            const double L = std::abs(B - A);
            if (L == 0.0) continue;
            auto f = [&](double t) {
                return cplx(wkb_error_integrand(pot, A + t * (B - A)) * L, 0.0);
            };
            total += gk15_adaptive(f, 0.0, 1.0).real();
        }
        // analytic tail beyond the last node: integrand <= M/((|t|-R)^2 |t|^{3/2})
        const double R = std::max(1.0, std::abs(pot.a));
        double rho = std::abs(path.back());
        if (rho > 2.0 * R) {
            // |tau| <= 3/(|t|-R), |tau'| <= 3/(|t|-R)^2 gives M ~ 3
            double tail = 0.0;
            double step = 0.5 * rho;
            double t = rho;
            for (int k = 0; k < 200; ++k) {
                const double seg = 3.0 / ((t - R) * (t - R) * std::sqrt(t)) * step;
                tail += seg;
                t += step;
                if (seg < 1e-12) break;
            }
            total += tail;
        }
        sup = std::max(sup, total);
    }
    return sup;
}

std::vector<Polyline> sample_canonical_paths(const Potential& pot, double eps, int count) {
    std::vector<Polyline> out;
    TraceLimits lim;
    lim.escape_radius = 3.0 * pot.escape_radius();
    // anti-Stokes traces from points spread around the turning-point hull
    for (int k = 0; k < count; ++k) {
        const double ang = 2.0 * kPi * k / count + 0.37;
        const cplx seed = std::polar(1.8 * std::max(1.0, std::abs(pot.a)) + eps, ang);
        if (pot.dist_to_turning_points(seed) < eps) continue;
        try {
            Trajectory tr = trace(pot, seed, ang, TraceKind::horizontal, lim);
            // keep the eps clearance from turning points
            bool ok = true;
            for (cplx z : tr.points)
                if (pot.dist_to_turning_points(z) < eps) ok = false;
            if (ok && tr.points.size() > 3) out.push_back(tr.points);
        } catch (const NumericError&) {
        }
    }
    if (out.empty()) throw NumericError("sample_canonical_paths: no admissible path found");
    return out;
}

VolterraResult volterra_solve(const Potential& pot, cplx lambda, const Polyline& z_path,
                              double tol, int n_max,
                              const std::function<cplx(cplx)>* psi_override) {
    if (z_path.size() < 3) throw std::invalid_argument("volterra_solve: path too short");
    const double r = std::abs(lambda);

    // zeta grid along the path (h-values measured from the path start) and
    // the transformed error term psi(zeta) = e^{-2 i theta} alpha(z)
    const std::size_t n = z_path.size();
    std::vector<cplx> zeta(n), psi(n);
    cplx ref = std::sqrt(pot.eval(z_path.front()));
    cplx acc(0.0, 0.0);
    const cplx eith = std::polar(1.0, pot.theta);
    const cplx e2 = std::polar(1.0, -2.0 * pot.theta);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            SqrtPathOptions o;
            o.ref_start = ref;
            SqrtPathResult piece = integrate_sqrtp_path(pot, {z_path[i - 1], z_path[i]}, o);
            acc += eith * piece.value;
            ref = piece.ref_end;
        }
        zeta[i] = acc;
        const cplx z = z_path[i];
        const cplx p = pot.eval(z);
        const cplx dp = pot.deriv(z);
        const cplx d2p = pot.deriv2(z);
        if (psi_override != nullptr)
            psi[i] = (*psi_override)(z);
        else
            psi[i] = e2 * ((5.0 / 16.0) * dp * dp / (p * p * p) - d2p / (4.0 * p * p));
    }
    // truncate where Re zeta exceeds 40 (the kernel is below underflow there)
    std::size_t m = n;
    for (std::size_t i = 0; i < n; ++i)
        if (zeta[i].real() > 40.0) {
            m = i + 1;
            break;
        }

    VolterraResult out;
    out.zeta.assign(zeta.begin(), zeta.begin() + m);
    std::vector<cplx> w(m, cplx(0.0, 0.0)), wn(m);
    std::vector<cplx> f(m);
    double prev_delta = 0.0;
    for (int it = 1; it <= n_max; ++it) {
        for (std::size_t i = 0; i < m; ++i) f[i] = psi[i] * (w[i] + 1.0);
        // I(k) = Int_{zeta_k}^{end} f dt ; Jt(k) = Int e^{-2r(t - zeta_k)} f dt
        cplx I(0.0, 0.0);
        cplx Jt(0.0, 0.0);
        wn[m - 1] = cplx(0.0, 0.0);
        for (std::size_t k = m - 1; k-- > 0;) {
            const cplx dz = zeta[k + 1] - zeta[k];
            const cplx decay = std::exp(-2.0 * r * dz);
            // trapezoid on the interval for both integrals
            const cplx seg_I = 0.5 * (f[k] + f[k + 1]) * dz;
            const cplx seg_J = 0.5 * (f[k] + f[k + 1] * decay) * dz;
            I += seg_I;
            Jt = seg_J + decay * Jt;
            wn[k] = (I - Jt) / (2.0 * r);
        }
        double delta = 0.0, norm_prev = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            delta = std::max(delta, std::abs(wn[i] - w[i]));
            norm_prev = std::max(norm_prev, std::abs(w[i]));
        }
        (void)norm_prev;
        w = wn;
        out.iterations = it;
        if (it == 1) out.w1_norm = delta;
        if (it > 1) {
            const double ratio = (prev_delta > 0.0) ? delta / prev_delta : 0.0;
            out.contraction_ratios.push_back(ratio);
            if (ratio >= 1.0) throw NoContraction("volterra_solve: iteration is not contracting");
        }
        prev_delta = delta;
        if (delta < tol) break;
    }
    out.w = std::move(w);
    return out;
}

namespace {

// continued p^{1/4} along the straight path from `from` (with starting branch
// value q0 for p^{1/4} and w0 for p^{1/2}); also returns h increment
struct QuarterWalk {
    cplx q;      // p^{1/4}(end)
    cplx w;      // p^{1/2}(end)
    cplx dh;     // Int e^{i theta} sqrt(p) dz along the path
};

QuarterWalk walk_quarter(const Potential& pot, cplx from, cplx to, cplx w0, cplx q0) {
    QuarterWalk out;
    SqrtPathOptions o;
    o.ref_start = w0;
    SqrtPathResult piece = integrate_sqrtp_path(pot, {from, to}, o);
    out.dh = std::polar(1.0, pot.theta) * piece.value;
    out.w = piece.ref_end;
    // unwrap the argument of sqrt(p) along the path to halve it consistently
    const int steps = 64;
    double phase = std::arg(w0);
    cplx prev = w0;
    for (int i = 1; i <= steps; ++i) {
        const cplx z = from + (double(i) / steps) * (to - from);
        cplx v = std::sqrt(pot.eval(z));
        if (std::abs(v - prev) > std::abs(v + prev)) v = -v;
        phase += std::arg(v / prev);
        prev = v;
    }
    out.q = std::sqrt(std::abs(prev)) * std::polar(1.0, 0.5 * phase);
    // align q0 drift: q is defined relative to the caller's starting quarter root
    const cplx q_start = std::sqrt(std::abs(w0)) * std::polar(1.0, 0.5 * std::arg(w0));
    out.q *= q0 / q_start;
    return out;
}

}  // namespace

WKBValue wkb_evaluate(const WKBSolution& sol, cplx z, bool with_derivative) {
    const Potential& pot = sol.pot;
    const cplx tp = turning_point_location(pot, sol.base_tp);
    // validity: the straight path from the base must keep distance eps from
    // the other turning points and z itself must be clear
    for (int t = 0; t < 3; ++t) {
        const cplx loc = turning_point_location(pot, t);
        if (t != sol.base_tp && dist_point_segment(loc, tp, z) < sol.eps)
            throw OutsideValidityDomain("wkb_evaluate: path crosses a turning point zone");
        if (std::abs(z - loc) < sol.eps)
            throw OutsideValidityDomain("wkb_evaluate: z too close to a turning point");
    }
    if (sol.correction_bound >= 1.0)
        throw OutsideValidityDomain("wkb_evaluate: correction bound not below 1");

    // h from the turning point (singular start), principal outgoing branch
    SqrtPathOptions o;
    o.singular_start = true;
    SqrtPathResult r = integrate_sqrtp_path(pot, {tp, z}, o);
    const cplx h = (sol.lambda / std::polar(1.0, pot.theta)) *
                   (std::polar(1.0, pot.theta) * r.value);
    const cplx w = r.ref_end;  // sqrt(p)(z), branch continued from the base

    // p^{-1/4} consistent with w: quarter root via unwrapped phase from a
    // reference point on the path
    const cplx mid = tp + 0.35 * (z - tp);
    cplx wmid = std::sqrt(pot.eval(mid));
    {
        // branch-match wmid against the path continuation
        SqrtPathOptions o2;
        o2.singular_start = true;
        SqrtPathResult rm = integrate_sqrtp_path(pot, {tp, mid}, o2);
        if (std::abs(rm.ref_end - wmid) > std::abs(rm.ref_end + wmid)) wmid = -wmid;
    }
    const cplx qmid = std::sqrt(std::abs(wmid)) * std::polar(1.0, 0.5 * std::arg(wmid));
    QuarterWalk qw = walk_quarter(pot, mid, z, wmid, qmid);

    WKBValue out;
    out.h = h;
    out.bound = sol.correction_bound;
    out.y = (1.0 / qw.q) * std::exp(double(sol.sign) * h);
    if (with_derivative) {
        const cplx dp = pot.deriv(z);
        const cplx p = pot.eval(z);
        out.dy = (double(sol.sign) * sol.lambda * qw.w - dp / (4.0 * p)) * out.y;
    }
    return out;
}

cplx elementary_basis_phase(const Potential& pot, int tp, const Polyline& stokes_line) {
    // approach the turning point along the line and take the limiting
    // argument of p^{1/4}
    const cplx loc = turning_point_location(pot, tp);
    cplx znear = stokes_line.front();
    double best = 1e300;
    std::size_t bi = 0;
    for (std::size_t i = 0; i < stokes_line.size(); ++i) {
        const double d = std::abs(stokes_line[i] - loc);
        if (d < best) {
            best = d;
            bi = i;
        }
    }
    // a point a bit away from the zero in the line direction
    const std::size_t oi = (bi + 8 < stokes_line.size()) ? bi + 8 : stokes_line.size() - 1;
    znear = stokes_line[oi];
    const double argq = 0.25 * std::arg(pot.eval(znear));
    return std::polar(1.0, argq);
}

TransitionMatrix TransitionMatrix::inverse() const {
    const cplx det = m[0] * m[3] - m[1] * m[2];
    TransitionMatrix r{kind, {m[3] / det, -m[1] / det, -m[2] / det, m[0] / det}};
    return r;
}

TransitionMatrix transition(TransitionKind kind, const TransitionData& d) {
    TransitionMatrix t{kind, {}};
    switch (kind) {
        case TransitionKind::finite_stokes: {
            if (d.alpha <= 0.0) throw InvalidData("finite Stokes transition needs alpha > 0");
            const double la = std::abs(d.lambda) * d.alpha;
            const cplx es = std::polar(1.0, d.sigma);
            t.m = {cplx(0.0, 0.0), es * std::polar(1.0, -la), es * std::polar(1.0, la),
                   cplx(0.0, 0.0)};
            return t;
        }
        case TransitionKind::anti_stokes: {
            const cplx lx = d.lambda * d.xi;
            if (lx.real() <= 0.0)
                throw InvalidData("anti-Stokes transition requires Re(lambda xi) > 0");
            const cplx es = std::polar(1.0, d.sigma);
            t.m = {es * std::exp(-lx), cplx(0.0, 0.0), cplx(0.0, 0.0), es * std::exp(lx)};
            return t;
        }
        case TransitionKind::turning_rotation: {
            // leading order: alpha factors equal 1, phase exp(-i pi/6)
            const cplx es = std::polar(1.0, -kPi / 6.0);
            t.m = {cplx(0.0, 0.0), es, es, es * cplx(0.0, 1.0)};
            return t;
        }
    }
    throw InvalidData("unknown transition kind");
}

Spectrum quantize(const StokesGraph& graph, const EigenvalueProblemDescriptor& d, int n_min,
                  int n_max) {
    AccumulationResult acc = accumulation_check(graph, d);
    if (!acc.accumulates)
        throw NotAccumulating("quantize: descriptor does not admit an accumulating spectrum");
    Spectrum s;
    s.theta = graph.potential.theta;
    s.source = SpectrumSource::quantization;
    s.n_offset = n_min;
    if (n_min > n_max) return s;

    auto period_for = [&](std::pair<int, int> pair) {
        for (const auto& st : graph.short_trajectories)
            if ((st.tp0 == pair.first && st.tp1 == pair.second) ||
                (st.tp0 == pair.second && st.tp1 == pair.first))
                return segment_period(graph.potential, st.tp0, st.tp1, &st.points);
        return segment_period(graph.potential, pair.first, pair.second);
    };

    if (!d.broken) {
        const Period p = period_for(d.period_contours.at(0));
        s.period_used = p;
        for (int n = n_min; n <= n_max; ++n)
            s.lambda_mods.push_back((2.0 * n - 1.0) * kPi / p.abs_value);
        return s;
    }

    // broken tree join: impose the leading-order two-term condition
    // 2 cos(B/2) e^{i(A + B/2)} = -1 with A = |lambda| P1, B = |lambda| P2
    const Period p1 = period_for(d.period_contours.at(0));
    const Period p2 = period_for(d.period_contours.at(1));
    s.period_used = p1;
    s.alpha_ratio = std::abs(p1.value) / std::abs(p2.value);
    const double P1 = p1.abs_value, P2 = p2.abs_value;
    auto gfun = [&](double x) {
        const double A = x * P1, B = x * P2;
        return 2.0 * std::cos(0.5 * B) * std::exp(cplx(0.0, A + 0.5 * B)) + 1.0;
    };
    const double x_lo = std::max(0.1, (2.0 * n_min - 1.0) * kPi / (P1 + 0.5 * P2) * 0.45);
    const double x_hi = (2.0 * n_max + 3.0) * kPi / (P1 + 0.5 * P2) * 1.15;
    const int grid = 8000;
    double prev_mag = std::abs(gfun(x_lo));
    double prev_x = x_lo;
    std::vector<double> roots;
    for (int i = 1; i <= grid; ++i) {
        const double x = x_lo + (x_hi - x_lo) * i / grid;
        const double mag = std::abs(gfun(x));
        // local minimum bracket
        const double x2 = x_lo + (x_hi - x_lo) * (i + 1.0) / grid;
        const double next_mag = (i < grid) ? std::abs(gfun(x2)) : mag + 1.0;
        if (mag < prev_mag && mag < next_mag && mag < 0.5) {
            // golden-section refine
            double lo = prev_x, hi = x2;
            for (int it = 0; it < 80; ++it) {
                const double m1 = lo + 0.382 * (hi - lo), m2 = lo + 0.618 * (hi - lo);
                if (std::abs(gfun(m1)) < std::abs(gfun(m2)))
                    hi = m2;
                else
                    lo = m1;
            }
            const double xr = 0.5 * (lo + hi);
            if (std::abs(gfun(xr)) < 1e-7) roots.push_back(xr);
        }
        prev_mag = mag;
        prev_x = x;
    }
    // keep the window implied by n_range, counting roots in order
    for (double x : roots) s.lambda_mods.push_back(x);
    if (static_cast<int>(s.lambda_mods.size()) > (n_max - n_min + 1)) {
        // align to the requested index window from below
        std::vector<double> trimmed;
        for (int k = 0; k < n_max - n_min + 1 && k < static_cast<int>(s.lambda_mods.size()); ++k)
            trimmed.push_back(s.lambda_mods[static_cast<std::size_t>(k)]);
        s.lambda_mods = trimmed;
    }
    return s;
}

}  // namespace cwkb
