#include "cubicwkb/trajectory.hpp"

#include <cmath>

namespace cwkb {
namespace {

inline cplx sqrt_match(cplx p, cplx ref) {
    const cplx r = std::sqrt(p);
    return (std::abs(r - ref) <= std::abs(-r - ref)) ? r : -r;
}

// 5-point Gauss-Legendre increment of sqrt(p) dz along a chord, branch
// matched against ref (valid for the short steps the tracer takes).
cplx chord_h_increment(const Potential& pot, cplx A, cplx B, cplx ref) {
    static const double x[5] = {-0.906179845938664, -0.538469310105683, 0.0,
                                0.538469310105683, 0.906179845938664};
    static const double w[5] = {0.236926885056189, 0.478628670499366, 0.568888888888889,
                                0.478628670499366, 0.236926885056189};
    cplx s(0.0, 0.0);
    for (int i = 0; i < 5; ++i) {
        const double t = 0.5 * (x[i] + 1.0);
        s += w[i] * sqrt_match(pot.eval(A + t * (B - A)), ref);
    }
    return 0.5 * s * (B - A);
}

struct FieldEval {
    cplx v;       // dz/dt
    cplx sqrtp;   // branch value used
};

FieldEval field(const Potential& pot, cplx z, cplx ref, TraceKind kind) {
    const cplx w = sqrt_match(pot.eval(z), ref);
    const cplx e = std::polar(1.0, -pot.theta);
    FieldEval out;
    out.sqrtp = w;
    out.v = (kind == TraceKind::vertical) ? cplx(0.0, 1.0) * e / w : e / w;
    return out;
}

int match_direction_index(const Potential& pot, double angle, TraceKind kind) {
    const CriticalDirections cd = critical_directions(pot);
    const auto& dirs = (kind == TraceKind::vertical) ? cd.alpha_perp : cd.alpha;
    int best = 0;
    double bestd = 1e300;
    for (int j = 0; j < 5; ++j) {
        const double d = std::abs(angle_diff(angle, dirs[j]));
        if (d < bestd) {
            bestd = d;
            best = j;
        }
    }
    return best;
}

}  // namespace

cplx turning_point_location(const Potential& pot, int index) {
    switch (index) {
        case 0: return cplx(-1.0, 0.0);
        case 1: return cplx(1.0, 0.0);
        case 2: return pot.a;
    }
    throw std::invalid_argument("turning point index out of range");
}

namespace {

Trajectory trace_impl(const Potential& pot, cplx z0, double direction, TraceKind kind,
                      const TraceLimits& lim_in, int seed_tp, cplx h0, cplx w0) {
    TraceLimits lim = lim_in;
    if (lim.arc_cap <= 0.0) lim.arc_cap = 200.0 * (1.0 + std::abs(pot.a));
    if (lim.escape_radius <= 0.0) lim.escape_radius = pot.escape_radius();
    if (lim.capture_radius <= 0.0) lim.capture_radius = 10.0 * pot.capture_radius();

    Trajectory tr;
    tr.kind = kind;
    tr.seed = z0;
    tr.direction = direction;
    tr.seed_tp = seed_tp;
    tr.points.push_back(z0);

    const cplx eith = std::polar(1.0, pot.theta);
    cplx z = z0;
    cplx ref = w0;
    cplx h = h0;
    double arc = 0.0;
    double drift = 0.0;
    double prev_flow = (kind == TraceKind::vertical) ? h.imag() : h.real();

    // Cash-Karp 4(5) tableau
    static const double b5[6] = {37.0 / 378, 0.0, 250.0 / 621, 125.0 / 594, 0.0, 512.0 / 1771};
    static const double b4[6] = {2825.0 / 27648, 0.0, 18575.0 / 48384, 13525.0 / 55296,
                                 277.0 / 14336, 0.25};
    static const double A21 = 0.2, A31 = 3.0 / 40, A32 = 9.0 / 40, A41 = 0.3, A42 = -0.9,
                        A43 = 1.2, A51 = -11.0 / 54, A52 = 2.5, A53 = -70.0 / 27,
                        A54 = 35.0 / 27, A61 = 1631.0 / 55296, A62 = 175.0 / 512,
                        A63 = 575.0 / 13824, A64 = 44275.0 / 110592, A65 = 253.0 / 4096;

    double dt = 0.01 * (1.0 + std::abs(pot.a));
    const double tol = lim.step_tol;
    int steps = 0;
    const int max_steps = 2000000;

    while (steps++ < max_steps) {
        const double dmin = pot.dist_to_turning_points(z);
        if (arc > 1e-6 || seed_tp < 0) {
            if (dmin < lim.capture_radius) {
                int hit = 0;
                double best = 1e300;
                for (int i = 0; i < 3; ++i) {
                    const double d = std::abs(z - turning_point_location(pot, i));
                    if (d < best) {
                        best = d;
                        hit = i;
                    }
                }
                if (seed_tp < 0 || hit != seed_tp || arc > 4.0 * lim.capture_radius) {
                    tr.terminal.type = Terminal::Type::hit_turning_point;
                    tr.terminal.hit_tp = hit;
                    break;
                }
            }
        }
        if (std::abs(z) > lim.escape_radius) {
            tr.terminal.type = Terminal::Type::escaped;
            tr.terminal.final_angle = std::arg(z);
            tr.terminal.direction_index = match_direction_index(pot, std::arg(z), kind);
            break;
        }
        if (arc > lim.arc_cap) {
            tr.terminal.type = Terminal::Type::arc_length_cap;
            break;
        }

        // cap the spatial step so branch matching stays unambiguous
        const double vmag = 1.0 / std::sqrt(std::abs(pot.eval(z)));
        const double max_dz = std::max(0.3 * dmin, 0.25 * lim.capture_radius);
        double dt_eff = std::min(dt, max_dz / vmag);

        FieldEval k1 = field(pot, z, ref, kind);
        cplx z2 = z + dt_eff * A21 * k1.v;
        FieldEval k2 = field(pot, z2, k1.sqrtp, kind);
        cplx z3 = z + dt_eff * (A31 * k1.v + A32 * k2.v);
        FieldEval k3 = field(pot, z3, k2.sqrtp, kind);
        cplx z4 = z + dt_eff * (A41 * k1.v + A42 * k2.v + A43 * k3.v);
        FieldEval k4 = field(pot, z4, k3.sqrtp, kind);
        cplx z5 = z + dt_eff * (A51 * k1.v + A52 * k2.v + A53 * k3.v + A54 * k4.v);
        FieldEval k5 = field(pot, z5, k4.sqrtp, kind);
        cplx z6 = z + dt_eff * (A61 * k1.v + A62 * k2.v + A63 * k3.v + A64 * k4.v + A65 * k5.v);
        FieldEval k6 = field(pot, z6, k5.sqrtp, kind);

        cplx zn5 = z + dt_eff * (b5[0] * k1.v + b5[2] * k3.v + b5[3] * k4.v + b5[5] * k6.v);
        cplx zn4 = z + dt_eff * (b4[0] * k1.v + b4[2] * k3.v + b4[3] * k4.v + b4[4] * k5.v +
                                 b4[5] * k6.v);
        const double err = std::abs(zn5 - zn4);
        const double sc = tol * (1.0 + std::abs(z));
        if (err > sc && dt_eff > 1e-14) {
            dt = 0.9 * dt_eff * std::pow(sc / err, 0.2);
            if (dt < 1e-14) throw StiffnessFailure("trace: step size underflow");
            continue;
        }

        cplx znew = zn5;
        cplx wnew = sqrt_match(pot.eval(znew), k6.sqrtp);
        if (ref != cplx(0.0, 0.0) && std::abs(std::arg(wnew / ref)) >= 0.5 * kPi &&
            pot.dist_to_turning_points(znew) > lim.capture_radius)
            throw BranchBreakdown("trace: branch continuation jumped sheets");

        h += eith * chord_h_increment(pot, z, znew, ref);

        // transverse Newton projection onto the seed level set
        const cplx wfull = eith * wnew;
        double g = (kind == TraceKind::vertical) ? h.real() : h.imag();
        cplx dzp = (kind == TraceKind::vertical) ? cplx(-g, 0.0) / wfull
                                                 : cplx(0.0, -g) / wfull;
        if (std::abs(dzp) < 0.2 * std::abs(znew - z)) {
            znew += dzp;
            h += wfull * dzp;
            wnew = sqrt_match(pot.eval(znew), wnew);
        }

        drift = std::max(drift, std::abs((kind == TraceKind::vertical) ? h.real() : h.imag()));
        const double flow = (kind == TraceKind::vertical) ? h.imag() : h.real();
        if ((flow - prev_flow) * dt_eff <= 0.0 && steps > 1) tr.im_h_monotone = false;
        prev_flow = flow;

        arc += std::abs(znew - z);
        z = znew;
        ref = wnew;
        tr.points.push_back(z);
        if (err > 0.0) dt = std::min(0.9 * dt_eff * std::pow(sc / std::max(err, 1e-300), 0.2),
                                     4.0 * dt_eff);
    }
    if (steps >= max_steps) tr.terminal.type = Terminal::Type::arc_length_cap;
    tr.re_h_drift = drift;
    tr.h_end = h;
    return tr;
}

}  // namespace

Trajectory trace(const Potential& pot, cplx seed, double direction, TraceKind kind,
                 const TraceLimits& limits) {
    // regular-point seed: level set through the seed itself
    const cplx p = pot.eval(seed);
    if (std::abs(p) == 0.0)
        throw std::invalid_argument("trace: use trace_critical for turning point seeds");
    cplx w = std::sqrt(p);
    FieldEval f = field(pot, seed, w, kind);
    if (std::real(f.v * std::polar(1.0, -direction)) < 0.0) w = -w;
    return trace_impl(pot, seed, direction, kind, limits, -1, cplx(0.0, 0.0), w);
}

Trajectory trace_critical(const Potential& pot, int tp_index, int dir_index, TraceKind kind,
                          const TraceLimits& limits) {
    const cplx tp = turning_point_location(pot, tp_index);
    const TurningPoint tpd = make_turning_point(pot, tp);
    const double phi = (kind == TraceKind::vertical) ? tpd.local_directions[dir_index]
                                                     : tpd.local_orthogonal_directions[dir_index];
    const double delta = pot.capture_radius();
    const cplx seed = tp + std::polar(delta, phi);

    cplx w = std::sqrt(pot.eval(seed));
    {
        FieldEval f = field(pot, seed, w, kind);
        if (std::real(f.v * std::polar(1.0, -phi)) < 0.0) w = -w;
    }
    // h measured from the turning point; branch matched to the outgoing w
    SqrtPathOptions opts;
    opts.singular_start = true;
    SqrtPathResult r = integrate_sqrtp_path(pot, Polyline{tp, seed}, opts);
    cplx val = r.value;
    if (std::abs(r.ref_end - w) > std::abs(-r.ref_end - w)) val = -val;
    const cplx h0 = std::polar(1.0, pot.theta) * val;

    Trajectory tr = trace_impl(pot, seed, phi, kind, limits, tp_index, h0, w);
    tr.points.insert(tr.points.begin(), tp);
    tr.seed = tp;
    return tr;
}

std::vector<Trajectory> trace_critical_graph(const Potential& pot, const TraceLimits& limits) {
    std::vector<Trajectory> out;
    out.reserve(9);
    for (int tp = 0; tp < 3; ++tp)
        for (int k = 0; k < 3; ++k)
            out.push_back(trace_critical(pot, tp, k, TraceKind::vertical, limits));
    return out;
}

ShortTrajectory refine_short_trajectory(const Potential& pot, std::pair<int, int> tp_pair,
                                        const Polyline& coarse, double tol) {
    if (tp_pair.first == tp_pair.second)
        throw std::invalid_argument("refine_short_trajectory: endpoints must be distinct");
    const cplx A = turning_point_location(pot, tp_pair.first);
    const cplx B = turning_point_location(pot, tp_pair.second);

    // simplified interior path taken from the coarse trace geometry
    Polyline path;
    path.push_back(A);
    if (coarse.size() > 2) {
        const std::size_t want = 24;
        const std::size_t stride = std::max<std::size_t>(1, coarse.size() / want);
        const double clear = 2.0 * pot.capture_radius();
        int third = 3 - tp_pair.first - tp_pair.second;
        const cplx tp3 = turning_point_location(pot, third);
        for (std::size_t i = stride; i + stride < coarse.size(); i += stride) {
            const cplx q = coarse[i];
            if (std::abs(q - A) < clear || std::abs(q - B) < clear) continue;
            if (std::abs(q - tp3) < clear) continue;
            path.push_back(q);
        }
    }
    path.push_back(B);

    SqrtPathOptions opts;
    opts.singular_start = true;
    opts.singular_end = true;
    SqrtPathResult r = integrate_sqrtp_path(pot, path, opts);
    const cplx h = std::polar(1.0, pot.theta) * r.value;
    const double residual = std::abs(h.real());
    if (residual > tol)
        throw NotActuallyShort("refined residual " + std::to_string(residual) +
                               " above tolerance");
    ShortTrajectory st;
    st.tp0 = tp_pair.first;
    st.tp1 = tp_pair.second;
    st.points = path;
    st.residual = residual;
    st.period_half = h;
    return st;
}

}  // namespace cwkb
