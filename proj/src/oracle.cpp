#include "cubicwkb/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace cwkb {
namespace {

struct Deriv {
    cplx dy, ddy;
};

inline Deriv rhs(const Potential& pot, cplx lambda2, cplx z, cplx y, cplx dy) {
    return {dy, lambda2 * pot.eval(z) * y};
}

}  // namespace

OdeState integrate_ode(const Potential& pot, cplx lambda, OdeState s, cplx z0, cplx z1,
                       double tol) {
    cplx dummy;
    return integrate_ode_logged(pot, lambda, s, z0, z1, dummy, 0.0, tol);
}

OdeState integrate_ode_logged(const Potential& pot, cplx lambda, OdeState s, cplx z0, cplx z1,
                              cplx& log_increment, double rel_floor, double tol) {
    log_increment = cplx(0.0, 0.0);
    const cplx lambda2 = lambda * lambda;
    const double L = std::abs(z1 - z0);
    if (L == 0.0) return s;
    const cplx dir = (z1 - z0);

    // Cash-Karp embedded pair on the 2-component complex system
    static const double b5[6] = {37.0 / 378, 0.0, 250.0 / 621, 125.0 / 594, 0.0, 512.0 / 1771};
    static const double b4[6] = {2825.0 / 27648, 0.0, 18575.0 / 48384, 13525.0 / 55296,
                                 277.0 / 14336, 0.25};
    static const double A2[] = {0.2};
    static const double A3[] = {3.0 / 40, 9.0 / 40};
    static const double A4[] = {0.3, -0.9, 1.2};
    static const double A5[] = {-11.0 / 54, 2.5, -70.0 / 27, 35.0 / 27};
    static const double A6[] = {1631.0 / 55296, 175.0 / 512, 575.0 / 13824, 44275.0 / 110592,
                                253.0 / 4096};

    double t = 0.0;
    // initial step from the local oscillation scale
    const double om = std::abs(lambda) * std::sqrt(std::abs(pot.eval(z0))) + 1e-6;
    double dt = std::min(0.1, 0.5 / (om * L + 1.0));
    double running_max = std::abs(s.y) + std::abs(s.dy) / (om + 1.0);

    int guard = 0;
    while (t < 1.0 && guard++ < 4000000) {
        dt = std::min(dt, 1.0 - t);
        auto f = [&](double tt, cplx y, cplx dy) {
            return rhs(pot, lambda2, z0 + tt * dir, y, dy);
        };
        const Deriv k1 = f(t, s.y, s.dy);
        // the state advances with dz = dir * dt, so stage updates carry dir
        auto step = [&](std::initializer_list<std::pair<double, const Deriv*>> terms, cplx& y,
                        cplx& dy) {
            y = s.y;
            dy = s.dy;
            for (auto [w, kk] : terms) {
                y += dt * w * dir * kk->dy;
                dy += dt * w * dir * kk->ddy;
            }
        };
        cplx y2, d2;
        step({{A2[0], &k1}}, y2, d2);
        const Deriv kk2 = f(t + 0.2 * dt, y2, d2);
        cplx y3, d3;
        step({{A3[0], &k1}, {A3[1], &kk2}}, y3, d3);
        const Deriv kk3 = f(t + 0.3 * dt, y3, d3);
        cplx y4, d4;
        step({{A4[0], &k1}, {A4[1], &kk2}, {A4[2], &kk3}}, y4, d4);
        const Deriv kk4 = f(t + 0.6 * dt, y4, d4);
        cplx y5, d5;
        step({{A5[0], &k1}, {A5[1], &kk2}, {A5[2], &kk3}, {A5[3], &kk4}}, y5, d5);
        const Deriv kk5 = f(t + dt, y5, d5);
        cplx y6, d6;
        step({{A6[0], &k1}, {A6[1], &kk2}, {A6[2], &kk3}, {A6[3], &kk4}, {A6[4], &kk5}}, y6,
             d6);
        const Deriv kk6 = f(t + 0.875 * dt, y6, d6);

        cplx ynew = s.y + dt * dir * (b5[0] * k1.dy + b5[2] * kk3.dy + b5[3] * kk4.dy +
                                      b5[5] * kk6.dy);
        cplx dnew = s.dy + dt * dir * (b5[0] * k1.ddy + b5[2] * kk3.ddy + b5[3] * kk4.ddy +
                                       b5[5] * kk6.ddy);
        cplx ylow = s.y + dt * dir * (b4[0] * k1.dy + b4[2] * kk3.dy + b4[3] * kk4.dy +
                                      b4[4] * kk5.dy + b4[5] * kk6.dy);
        cplx dlow = s.dy + dt * dir * (b4[0] * k1.ddy + b4[2] * kk3.ddy + b4[3] * kk4.ddy +
                                       b4[4] * kk5.ddy + b4[5] * kk6.ddy);
        const double sc = tol * (std::abs(ynew) + std::abs(dnew) / (om + 1.0) + running_max);
        const double err = std::abs(ynew - ylow) + std::abs(dnew - dlow) / (om + 1.0);
        if (err > sc && dt > 2e-13) {
            dt = std::max(1e-13, 0.9 * dt * std::pow(sc / std::max(err, 1e-300), 0.2));
            continue;
        }
        if (rel_floor > 0.0) {
            // accumulate d log y = (y'/y) dz over the accepted step
            const cplx mid_y = 0.5 * (s.y + ynew);
            if (std::abs(mid_y) < rel_floor * running_max)
                throw ZeroOnContour("integrate_ode_logged: |y| at the floor on the path");
            // exact increment of the principal log between endpoints plus the
            // winding tracked through the midpoint sample
            const cplx r1 = y4 / s.y;  // intermediate sample near mid-step
            const cplx r2 = ynew / y4;
            log_increment += std::log(r1) + std::log(r2);
        }
        s.y = ynew;
        s.dy = dnew;
        t += dt;
        running_max = std::max(running_max, std::abs(s.y) + std::abs(s.dy) / (om + 1.0));
        const double mag = std::max(std::abs(s.y), std::abs(s.dy));
        if (mag > 1e120) {
            s.y /= mag;
            s.dy /= mag;
            s.log_scale += std::log(mag);
            running_max = std::abs(s.y) + std::abs(s.dy) / (om + 1.0);
        }
        if (err > 0.0)
            dt = std::clamp(0.9 * dt * std::pow(sc / std::max(err, 1e-300), 0.2), dt, 5.0 * dt);
        if (!std::isfinite(std::abs(s.y)) || !std::isfinite(std::abs(s.dy)))
            throw StiffnessFailure("integrate_ode: state became non-finite");
    }
    if (t < 1.0) throw IntegrationOverflow("integrate_ode: step budget exhausted");
    return s;
}

ShootingProblem make_shooting_problem(const StokesGraph& graph,
                                      const EigenvalueProblemDescriptor& d) {
    ShootingProblem prob(graph.potential);
    prob.descriptor = d;
    const CriticalDirections cd = critical_directions(graph.potential);
    prob.ray_a = cd.alpha[graph.faces[d.face_a].anti_stokes_dir];
    prob.ray_b = cd.alpha[graph.faces[d.face_b].anti_stokes_dir];
    prob.radius = 12.0 * std::max(1.0, std::abs(graph.potential.a));

    // matching point
    if (!d.broken) {
        const ShortTrajectory* st = nullptr;
        for (const auto& s : graph.short_trajectories) {
            const auto pair = d.period_contours.at(0);
            if ((s.tp0 == pair.first && s.tp1 == pair.second) ||
                (s.tp0 == pair.second && s.tp1 == pair.first))
                st = &s;
        }
        if (st != nullptr && !st->points.empty()) {
            // arc-length midpoint of the short trajectory
            const double half = 0.5 * polyline_length(st->points);
            double acc = 0.0;
            cplx m = st->points.front();
            for (std::size_t i = 0; i + 1 < st->points.size(); ++i) {
                const double seg = std::abs(st->points[i + 1] - st->points[i]);
                if (acc + seg >= half) {
                    m = st->points[i] + (half - acc) / seg * (st->points[i + 1] - st->points[i]);
                    break;
                }
                acc += seg;
            }
            prob.matching_point = m;
        } else {
            // no short trajectory between the pair (type BB): midpoint of the
            // corner turning points
            const auto& fa = graph.faces[d.face_a];
            const auto& fb = graph.faces[d.face_b];
            const cplx ta = turning_point_location(graph.potential,
                                                   fa.corner_tps.empty() ? 0 : fa.corner_tps[0]);
            const cplx tb = turning_point_location(graph.potential,
                                                   fb.corner_tps.empty() ? 1 : fb.corner_tps[0]);
            prob.matching_point = 0.5 * (ta + tb);
        }
    } else {
        // broken join: near the summit, nudged off the turning point
        prob.matching_point = graph.potential.a + cplx(0.05, 0.03);
    }
    if (std::abs(graph.potential.eval(prob.matching_point)) < 1e-6)
        prob.matching_point += cplx(0.05, 0.02);
    return prob;
}

OdeState shoot_ray(const ShootingProblem& prob, cplx lambda, double alpha) {
    const Potential& pot = prob.pot;
    const cplx seed = std::polar(prob.radius, alpha);
    // subdominant seeding: y'/y = -lambda sqrt(p) - p'/(4p) with the branch
    // of sqrt(p) making Re(lambda sqrt(p) e^{i alpha}) > 0 (decay outward)
    cplx w = std::sqrt(pot.eval(seed));
    if (std::real(lambda * w * std::polar(1.0, alpha)) < 0.0) w = -w;
    OdeState s;
    s.y = cplx(1.0, 0.0);
    s.dy = -lambda * w - pot.deriv(seed) / (4.0 * pot.eval(seed));
    s.log_scale = 0.0;
    return integrate_ode(pot, lambda, s, seed, prob.matching_point);
}

cplx wronskian_mismatch(const ShootingProblem& prob, cplx lambda) {
    const OdeState sa = shoot_ray(prob, lambda, prob.ray_a);
    const OdeState sb = shoot_ray(prob, lambda, prob.ray_b);
    const cplx W = sa.y * sb.dy - sa.dy * sb.y;
    const double om =
        std::abs(lambda) * std::sqrt(std::abs(prob.pot.eval(prob.matching_point))) + 1.0;
    const double na = std::abs(sa.y) + std::abs(sa.dy) / om;
    const double nb = std::abs(sb.y) + std::abs(sb.dy) / om;
    return W / (na * nb * om);
}

EigenvalueHit shoot_eigenvalue(const ShootingProblem& prob, double mod_lo, double mod_hi) {
    const double theta = prob.pot.theta;
    const int n_scan = 48;
    std::vector<double> mags(n_scan + 1);
    for (int i = 0; i <= n_scan; ++i) {
        const double m = mod_lo + (mod_hi - mod_lo) * i / n_scan;
        mags[i] = std::abs(wronskian_mismatch(prob, std::polar(m, theta)));
    }
    EigenvalueHit best;
    best.mismatch = 1e300;
    for (int i = 1; i < n_scan; ++i) {
        if (!(mags[i] < mags[i - 1] && mags[i] < mags[i + 1])) continue;
        // golden-section refinement along the ray
        double lo = mod_lo + (mod_hi - mod_lo) * (i - 1.0) / n_scan;
        double hi = mod_lo + (mod_hi - mod_lo) * (i + 1.0) / n_scan;
        for (int it = 0; it < 36; ++it) {
            const double m1 = lo + 0.382 * (hi - lo), m2 = lo + 0.618 * (hi - lo);
            const double f1 = std::abs(wronskian_mismatch(prob, std::polar(m1, theta)));
            const double f2 = std::abs(wronskian_mismatch(prob, std::polar(m2, theta)));
            if (f1 < f2)
                hi = m2;
            else
                lo = m1;
        }
        cplx lam = std::polar(0.5 * (lo + hi), theta);
        // complex Newton polish (W is analytic in lambda)
        cplx Wv = wronskian_mismatch(prob, lam);
        for (int it = 0; it < 24 && std::abs(Wv) > 1e-13; ++it) {
            const double h = 1e-7 * std::abs(lam);
            const cplx dW = (wronskian_mismatch(prob, lam + h) -
                             wronskian_mismatch(prob, lam - h)) /
                            (2.0 * h);
            if (std::abs(dW) < 1e-300) break;
            const cplx step = Wv / dW;
            if (std::abs(step) > 0.2 * std::abs(lam)) break;  // diverging
            lam -= step;
            Wv = wronskian_mismatch(prob, lam);
        }
        // among converged roots prefer the one nearest the bracket center
        const double center = 0.5 * (mod_lo + mod_hi);
        const bool converged = std::abs(Wv) < 1e-9;
        const bool best_converged = best.mismatch < 1e-9;
        const bool closer = std::abs(std::abs(lam) - center) <
                            std::abs(best.lambda_mod - center);
        if ((converged && !best_converged) || (converged == best_converged && closer) ||
            (!best_converged && std::abs(Wv) < best.mismatch)) {
            best.mismatch = std::abs(Wv);
            best.lambda = lam;
            best.lambda_mod = std::abs(lam);
        }
    }
    if (best.mismatch > 1e-9 || best.lambda_mod < mod_lo - 0.3 * (mod_hi - mod_lo) ||
        best.lambda_mod > mod_hi + 0.3 * (mod_hi - mod_lo))
        throw NoSignChange("shoot_eigenvalue: no Wronskian root inside the bracket");
    return best;
}

EigenfunctionGrid eigenfunction_grid(const ShootingProblem& prob, cplx lambda, double x0,
                                     double x1, double y0, double y1, int nx, int ny) {
    EigenfunctionGrid g;
    g.x0 = x0;
    g.x1 = x1;
    g.y0 = y0;
    g.y1 = y1;
    g.nx = nx;
    g.ny = ny;
    g.lambda = lambda;
    g.value.resize(std::size_t(nx) * ny);
    g.log_scale.resize(std::size_t(nx) * ny);
    g.deriv.resize(std::size_t(nx) * ny);

    // reference state at the matching point
    const OdeState m = shoot_ray(prob, lambda, prob.ray_a);

    // Fill from a baseline row through the matching point: horizontal carries
    // hug the oscillatory support, and the vertical sweeps leave it moving
    // into dominance, so roundoff picked up on ridges never swamps the values
    // downstream (an eigenfunction transported across a deep recessive region
    // cannot be recovered, so the sweep never routes through one).
    const double ym = std::clamp(prob.matching_point.imag(), y0, y1);
    int jm = static_cast<int>(std::lround((ym - y0) / (y1 - y0) * (ny - 1)));
    jm = std::clamp(jm, 0, ny - 1);
    const double ybase = y0 + (y1 - y0) * jm / (ny - 1.0);

    auto store = [&](int i, int j, const OdeState& s) {
        const std::size_t idx = std::size_t(j) * nx + i;
        g.value[idx] = s.y;
        g.deriv[idx] = s.dy;
        g.log_scale[idx] = s.log_scale;
    };
    auto xat = [&](int i) { return x0 + (x1 - x0) * i / (nx - 1.0); };
    auto yat = [&](int j) { return y0 + (y1 - y0) * j / (ny - 1.0); };

    // baseline row
    std::vector<OdeState> base(nx);
    const int im = std::clamp(
        static_cast<int>(std::lround((prob.matching_point.real() - x0) / (x1 - x0) * (nx - 1))),
        0, nx - 1);
    base[im] = integrate_ode(prob.pot, lambda, m, prob.matching_point, cplx(xat(im), ybase));
    for (int i = im + 1; i < nx; ++i)
        base[i] = integrate_ode(prob.pot, lambda, base[i - 1], cplx(xat(i - 1), ybase),
                                cplx(xat(i), ybase));
    for (int i = im - 1; i >= 0; --i)
        base[i] = integrate_ode(prob.pot, lambda, base[i + 1], cplx(xat(i + 1), ybase),
                                cplx(xat(i), ybase));
    // vertical sweeps from the baseline
    for (int i = 0; i < nx; ++i) {
        store(i, jm, base[i]);
        OdeState s = base[i];
        for (int j = jm + 1; j < ny; ++j) {
            s = integrate_ode(prob.pot, lambda, s, cplx(xat(i), yat(j - 1)), cplx(xat(i), yat(j)));
            store(i, j, s);
        }
        s = base[i];
        for (int j = jm - 1; j >= 0; --j) {
            s = integrate_ode(prob.pot, lambda, s, cplx(xat(i), yat(j + 1)), cplx(xat(i), yat(j)));
            store(i, j, s);
        }
    }
    return g;
}

int count_zeros(const ShootingProblem& prob, cplx lambda, const Polyline& contour) {
    if (contour.size() < 3 || std::abs(contour.front() - contour.back()) > 1e-12)
        throw std::invalid_argument("count_zeros: contour must be closed");
    OdeState s = shoot_ray(prob, lambda, prob.ray_a);
    s = integrate_ode(prob.pot, lambda, s, prob.matching_point, contour.front());
    cplx total(0.0, 0.0);
    for (std::size_t i = 0; i + 1 < contour.size(); ++i) {
        cplx inc;
        s = integrate_ode_logged(prob.pot, lambda, s, contour[i], contour[i + 1], inc);
        total += inc;
    }
    const double winding = total.imag() / (2.0 * kPi);
    const double rounded = std::lround(winding);
    if (std::abs(winding - rounded) > 0.01)
        throw NonIntegerWinding("count_zeros: winding " + std::to_string(winding));
    return static_cast<int>(rounded);
}

ZeroSet locate_zeros(const ShootingProblem& prob, cplx lambda, const EigenfunctionGrid& grid,
                     const Polyline& ell, const Polyline& ell_star) {
    ZeroSet out;
    const int nx = grid.nx, ny = grid.ny;
    // cellwise winding from principal phase increments of node values; valid
    // because the grid resolves the oscillation scale
    auto phase_inc = [&](int i0, int j0, int i1, int j1) {
        const cplx a = grid.at(i0, j0), b = grid.at(i1, j1);
        return std::arg(b / a);
    };
    std::vector<cplx> raw;
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const double s = phase_inc(i, j, i + 1, j) + phase_inc(i + 1, j, i + 1, j + 1) +
                             phase_inc(i + 1, j + 1, i, j + 1) + phase_inc(i, j + 1, i, j);
            const int wind = static_cast<int>(std::lround(s / (2.0 * kPi)));
            if (wind == 0) continue;
            // Newton polish from the cell center using local transports
            cplx z = 0.5 * (grid.node(i, j) + grid.node(i + 1, j + 1));
            OdeState st;
            st.y = grid.at(i, j);
            st.dy = grid.deriv[std::size_t(j) * nx + i];
            st.log_scale = grid.log_scale[std::size_t(j) * nx + i];
            const cplx anchor = grid.node(i, j);
            bool ok = true;
            for (int it = 0; it < 60; ++it) {
                OdeState cur;
                try {
                    cur = integrate_ode(prob.pot, lambda, st, anchor, z);
                } catch (const NumericError&) {
                    ok = false;
                    break;
                }
                if (std::abs(cur.dy) < 1e-300) {
                    ok = false;
                    break;
                }
                const cplx step = cur.y / cur.dy;
                z -= step;
                if (std::abs(step) < 1e-12) break;
                if (std::abs(z - anchor) > 4.0 * std::abs(grid.node(i + 1, j + 1) - anchor)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            // residual check relative to the local scale
            OdeState fin = integrate_ode(prob.pot, lambda, st, anchor, z);
            const double local = std::abs(grid.at(i, j)) + std::abs(grid.at(i + 1, j + 1)) + 1e-30;
            if (std::abs(fin.y) > 1e-8 * local) continue;
            // independent verification along a fresh path from the matching
            // point; ridge contamination in the grid shows up here as a value
            // of ordinary size instead of a zero
            try {
                const OdeState mref = shoot_ray(prob, lambda, prob.ray_a);
                OdeState at_z =
                    integrate_ode(prob.pot, lambda, mref, prob.matching_point, z);
                const cplx near = z + 0.03 * (1.0 + std::abs(z)) * cplx(0.7, 0.7);
                OdeState at_near = integrate_ode(prob.pot, lambda, at_z, z, near);
                const double lz = at_z.log_scale + std::log(std::abs(at_z.y) + 1e-300);
                const double ln = at_near.log_scale + std::log(std::abs(at_near.y) + 1e-300);
                if (lz > ln - 4.0) continue;  // not actually small there
            } catch (const NumericError&) {
                continue;
            }
            raw.push_back(z);
        }
    }
    // dedupe
    for (cplx z : raw) {
        bool dup = false;
        for (cplx w : out.zeros)
            if (std::abs(w - z) < 1e-6) dup = true;
        if (!dup) out.zeros.push_back(z);
    }
    for (cplx z : out.zeros) {
        const double de = dist_point_polyline(z, ell);
        const double ds = dist_point_polyline(z, ell_star);
        out.max_dist_to_support = std::max(out.max_dist_to_support, std::min(de, ds));
        if (de <= ds)
            out.bounded_component.push_back(z);
        else
            out.unbounded_component.push_back(z);
    }
    return out;
}

Polyline marked_infinite_line(const StokesGraph& graph, const EigenvalueProblemDescriptor& d) {
    if (!d.broken) {
        const auto pair = d.period_contours.at(0);
        const int third = 3 - pair.first - pair.second;
        // the third turning point's trace that does not bound the strip
        const Face* strip = graph.strip();
        for (const auto& e : graph.edges) {
            if (e.is_short || e.v0 != third) continue;
            bool on_strip = false;
            if (strip != nullptr)
                for (int ei : strip->boundary_edges)
                    if (&graph.edges[ei] == &e) on_strip = true;
            if (!on_strip) return e.points;
        }
        // fall back: any infinite trace from the third turning point
        for (const auto& e : graph.edges)
            if (!e.is_short && e.v0 == third) return e.points;
    } else {
        // broken tree: the summit's free infinite ray
        for (const auto& e : graph.edges)
            if (!e.is_short && e.v0 == 2) return e.points;
    }
    throw NumericError("marked_infinite_line: no candidate trace");
}

}  // namespace cwkb
