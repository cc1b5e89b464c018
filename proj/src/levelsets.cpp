#include "cubicwkb/levelsets.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace cwkb {
namespace {

struct ResidualOut {
    double residual;  // Re(e^{i theta} integral)
    cplx value;       // the full integral of e^{i theta} sqrt(p_a) dz
    cplx lead;        // principal outgoing reference at the base (for sign chaining)
};

// Straight segment from `base` to `target` with a half-circle detour when
// `avoid` comes too close to the open segment.  The arc passes on the side
// opposite to the turning point's offset from the segment line, which keeps
// the residual continuous as `avoid` crosses the activation tube; when the
// point sits exactly on the segment the arc goes to the right of travel
// (below, for the [-1,1] base segment).
Polyline segment_with_detour(cplx base, cplx target, cplx avoid, double delta) {
    Polyline path{base, target};
    const cplx d = target - base;
    const double L = std::abs(d);
    if (L == 0.0) return path;
    const double tproj = ((avoid.real() - base.real()) * d.real() +
                          (avoid.imag() - base.imag()) * d.imag()) /
                         (L * L);
    if (tproj <= 0.0 || tproj >= 1.0) return path;
    const cplx proj = base + tproj * d;
    const double dist = std::abs(avoid - proj);
    if (dist > delta) return path;

    const double side_avoid = std::imag(std::conj(d) * (avoid - base));
    // opposite side of the offset; exactly-on-segment goes right of travel
    const double arc_side = (side_avoid < 0.0) ? 1.0 : -1.0;  // left of travel = +1

    const double w = std::max(2.0 * delta, 2.0 * dist);
    const double tin = std::max(0.0, tproj - w / L);
    const double tout = std::min(1.0, tproj + w / L);
    const cplx pin = base + tin * d;
    const cplx pout = base + tout * d;
    double ain = std::arg(pin - avoid);
    double aout = std::arg(pout - avoid);
    // sweep so the arc midpoint lies on the chosen side of the segment line
    double sweep = aout - ain;
    while (sweep <= 0.0) sweep += 2.0 * kPi;
    double mid = ain + 0.5 * sweep;
    const double rmid = 0.5 * (std::abs(pin - avoid) + std::abs(pout - avoid));
    if (std::imag(std::conj(d) * (avoid + std::polar(rmid, mid) - base)) * arc_side < 0.0)
        sweep -= 2.0 * kPi;  // take the complementary (clockwise) sweep
    const double rin = std::abs(pin - avoid);
    const double rout = std::abs(pout - avoid);
    Polyline out;
    out.push_back(base);
    if (tin > 0.0) out.push_back(pin);
    const int m = 24;
    for (int i = 1; i < m; ++i) {
        const double s = double(i) / m;
        const double ang = ain + s * sweep;
        const double r = rin + s * (rout - rin);
        out.push_back(avoid + std::polar(r, ang));
    }
    if (tout < 1.0) out.push_back(pout);
    out.push_back(target);
    return out;
}

ResidualOut sigma_residual_core(cplx a, double theta, SigmaKind which) {
    if (which == SigmaKind::plus1 && a.imag() == 0.0 && a.real() <= -1.0)
        throw OnExcludedCut("plus1 residual undefined on (-inf,-1]");
    if (which == SigmaKind::minus1 && a.imag() == 0.0 && a.real() >= 1.0)
        throw OnExcludedCut("minus1 residual undefined on [1,+inf)");
    if (a == cplx(1.0, 0.0) || a == cplx(-1.0, 0.0))
        throw OnExcludedCut("residual undefined at the fixed turning points");

    const Potential pot(a, theta);
    cplx base, target, avoid;
    switch (which) {
        case SigmaKind::plus1:
            base = cplx(1.0, 0.0);
            target = a;
            avoid = cplx(-1.0, 0.0);
            break;
        case SigmaKind::minus1:
            base = cplx(-1.0, 0.0);
            target = a;
            avoid = cplx(1.0, 0.0);
            break;
        case SigmaKind::triangle:
            base = cplx(-1.0, 0.0);
            target = cplx(1.0, 0.0);
            avoid = a;
            break;
    }
    Polyline path = segment_with_detour(base, target, avoid, pot.capture_radius());
    SqrtPathOptions opts;
    opts.singular_start = true;
    opts.singular_end = true;
    SqrtPathResult r = integrate_sqrtp_path(pot, path, opts);
    ResidualOut out;
    out.value = std::polar(1.0, theta) * r.value;
    out.residual = out.value.real();
    const cplx znext = path.size() > 2 ? path[1] : 0.5 * (base + target);
    out.lead = std::sqrt(pot.deriv(base) * (znext - base));
    return out;
}

// Residual whose sign follows a caller-held branch reference.  If update is
// true the reference marches with the evaluation (use along curves); with
// update = false the sign is matched against the frozen reference (use for
// finite-difference clusters).
double residual_ref(cplx a, double theta, SigmaKind which, cplx* lead_ref, bool update) {
    ResidualOut r = sigma_residual_core(a, theta, which);
    double sign = 1.0;
    if (lead_ref != nullptr && *lead_ref != cplx(0.0, 0.0)) {
        if (std::abs(r.lead - *lead_ref) > std::abs(-r.lead - *lead_ref)) sign = -1.0;
        if (update) *lead_ref = sign * r.lead;
    } else if (lead_ref != nullptr && update) {
        *lead_ref = r.lead;
    }
    return sign * r.residual;
}

}  // namespace

double sigma_residual(cplx a, double theta, SigmaKind which) {
    return sigma_residual_core(a, theta, which).residual;
}

cplx sigma_residual_pair(cplx a, double theta) {
    return cplx(sigma_residual_core(a, theta, SigmaKind::plus1).residual,
                sigma_residual_core(a, theta, SigmaKind::minus1).residual);
}

namespace {

double bisect_s_triangle(double theta) {
    auto f = [&](double x) { return sigma_residual(cplx(x, 0.0), theta, SigmaKind::triangle); };
    const double eps = 1e-7;
    const double lo = -1.0 + eps, hi = 1.0 - eps;
    const int n = 400;
    double xa = lo, fa = f(xa);
    double blo = 0.0, bhi = 0.0, flo = 0.0;
    bool found = false;
    for (int i = 1; i <= n && !found; ++i) {
        const double xb = lo + (hi - lo) * i / n;
        const double fb = f(xb);
        if (fa == 0.0) return xa;
        if (fa * fb < 0.0) {
            blo = xa;
            bhi = xb;
            flo = fa;
            found = true;
        }
        xa = xb;
        fa = fb;
    }
    if (!found) return -1.0;  // degenerate endpoint (theta = 0 limit)
    for (int it = 0; it < 200 && bhi - blo > 1e-13; ++it) {
        const double m = 0.5 * (blo + bhi);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if (flo * fm < 0.0)
            bhi = m;
        else {
            blo = m;
            flo = fm;
        }
    }
    return 0.5 * (blo + bhi);
}

bool newton_2d(cplx& a, double theta, double tol = 1e-11) {
    const double h = 1e-7;
    cplx l1(0.0, 0.0), l2(0.0, 0.0);
    for (int it = 0; it < 40; ++it) {
        double r1, r2, j11, j12, j21, j22;
        try {
            l1 = cplx(0.0, 0.0);
            l2 = cplx(0.0, 0.0);
            r1 = residual_ref(a, theta, SigmaKind::plus1, &l1, true);
            r2 = residual_ref(a, theta, SigmaKind::minus1, &l2, true);
            j11 = (residual_ref(a + h, theta, SigmaKind::plus1, &l1, false) -
                   residual_ref(a - h, theta, SigmaKind::plus1, &l1, false)) /
                  (2 * h);
            j12 = (residual_ref(a + cplx(0, h), theta, SigmaKind::plus1, &l1, false) -
                   residual_ref(a - cplx(0, h), theta, SigmaKind::plus1, &l1, false)) /
                  (2 * h);
            j21 = (residual_ref(a + h, theta, SigmaKind::minus1, &l2, false) -
                   residual_ref(a - h, theta, SigmaKind::minus1, &l2, false)) /
                  (2 * h);
            j22 = (residual_ref(a + cplx(0, h), theta, SigmaKind::minus1, &l2, false) -
                   residual_ref(a - cplx(0, h), theta, SigmaKind::minus1, &l2, false)) /
                  (2 * h);
        } catch (const NumericError&) {
            return false;
        }
        if (std::abs(r1) < tol && std::abs(r2) < tol) return true;
        const double det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-14) return false;
        const double dx = (-r1 * j22 + r2 * j12) / det;
        const double dy = (-r2 * j11 + r1 * j21) / det;
        if (!std::isfinite(dx) || !std::isfinite(dy)) return false;
        double step = 1.0;
        if (std::hypot(dx, dy) > 0.5) step = 0.5 / std::hypot(dx, dy);
        a += step * cplx(dx, dy);
    }
    try {
        const double r1 = sigma_residual(a, theta, SigmaKind::plus1);
        const double r2 = sigma_residual(a, theta, SigmaKind::minus1);
        return std::abs(r1) < tol && std::abs(r2) < tol;
    } catch (const NumericError&) {
        return false;
    }
}

}  // namespace

SpecialPoints solve_special_points(double theta, Exec mode) {
    if (theta < 0.0 || theta >= 0.5 * kPi)
        throw std::invalid_argument("solve_special_points: theta must lie in [0, pi/2)");
    SpecialPoints sp;
    sp.s_triangle = bisect_s_triangle(theta);
    if (theta < 1e-12) {
        sp.t_point = cplx(-1.0, 0.0);  // degenerate summit
        return sp;
    }

    const int N = 200;
    const double x0 = -3.0, x1 = 3.0, y0 = 0.02, y1 = 3.0;
    std::vector<double> score(static_cast<std::size_t>(N) * N, 1e300);
    for_each_index(static_cast<std::size_t>(N) * N, mode, [&](std::size_t idx) {
        const int i = static_cast<int>(idx % N);
        const int j = static_cast<int>(idx / N);
        const cplx a(x0 + (x1 - x0) * i / (N - 1.0), y0 + (y1 - y0) * j / (N - 1.0));
        try {
            const cplx r = sigma_residual_pair(a, theta);
            score[idx] = std::abs(r.real()) + std::abs(r.imag());
        } catch (const NumericError&) {
        }
    });
    std::vector<cplx> roots;
    for (int j = 1; j + 1 < N; ++j) {
        for (int i = 1; i + 1 < N; ++i) {
            const std::size_t idx = static_cast<std::size_t>(j) * N + i;
            const double s = score[idx];
            if (s > 1.0) continue;
            bool ismin = true;
            for (int dj = -1; dj <= 1 && ismin; ++dj)
                for (int di = -1; di <= 1; ++di)
                    if (score[idx + dj * N + di] < s) {
                        ismin = false;
                        break;
                    }
            if (!ismin) continue;
            cplx a(x0 + (x1 - x0) * i / (N - 1.0), y0 + (y1 - y0) * j / (N - 1.0));
            if (!newton_2d(a, theta)) continue;
            if (a.imag() <= 1e-6) continue;
            bool dup = false;
            for (cplx r : roots)
                if (std::abs(r - a) < 1e-6) dup = true;
            if (!dup) roots.push_back(a);
        }
    }
    for (cplx r : roots) {
        if (r.real() > -1.0 + 1e-9) {
            if (!sp.t_point || std::abs(r.imag()) < std::abs(sp.t_point->imag())) sp.t_point = r;
        } else {
            if (!sp.e_point) sp.e_point = r;
        }
    }
    if (!sp.t_point) throw NewtonDiverged("solve_special_points: t point not found");
    return sp;
}

LevelSetCurve trace_sigma(double theta, SigmaKind which, cplx seed, double radius,
                          std::optional<cplx> first_direction) {
    LevelSetCurve curve;
    curve.which = which;
    curve.theta = theta;

    cplx lead(0.0, 0.0);

    auto correct = [&](cplx a, double max_disp) -> std::optional<cplx> {
        const cplx a0 = a;
        for (int it = 0; it < 6; ++it) {
            const double h = 1e-7;
            double r;
            cplx g;
            try {
                r = residual_ref(a, theta, which, &lead, true);
                const double rx = residual_ref(a + h, theta, which, &lead, false);
                const double rxm = residual_ref(a - h, theta, which, &lead, false);
                const double ry = residual_ref(a + cplx(0, h), theta, which, &lead, false);
                const double rym = residual_ref(a - cplx(0, h), theta, which, &lead, false);
                g = cplx((rx - rxm) / (2 * h), (ry - rym) / (2 * h));
            } catch (const NumericError&) {
                return std::nullopt;
            }
            const double g2 = std::norm(g);
            if (g2 < 1e-18) return std::nullopt;
            const cplx step = -r * g / g2;
            a += step;
            if (std::abs(a - a0) > max_disp) return std::nullopt;  // jumped branches
            if (std::abs(step) < 1e-11) break;
        }
        return a;
    };

    auto corrected = correct(seed, 0.2);
    if (!corrected || std::abs(sigma_residual(*corrected, theta, which)) > 1e-8)
        throw ContinuationStalled("trace_sigma: seed does not satisfy the residual");
    cplx a = *corrected;
    curve.points.push_back(a);

    cplx dir = first_direction.value_or(cplx(0.0, 0.0));
    if (dir == cplx(0.0, 0.0)) {
        const cplx base = (which == SigmaKind::minus1) ? cplx(-1.0, 0.0) : cplx(1.0, 0.0);
        dir = (a == base) ? cplx(1.0, 0.0) : (a - base) / std::abs(a - base);
    } else {
        dir /= std::abs(dir);
    }

    const double base_step = 0.01;
    int stall = 0;
    for (int step_i = 0; step_i < 40000; ++step_i) {
        if (std::abs(a) > radius) break;
        if (std::abs(a - cplx(1.0, 0.0)) < 2e-3 || std::abs(a + cplx(1.0, 0.0)) < 2e-3) break;
        if (which == SigmaKind::plus1 && std::abs(a.imag()) < 2e-3 && a.real() < -1.0) break;
        if (which == SigmaKind::minus1 && std::abs(a.imag()) < 2e-3 && a.real() > 1.0) break;

        double h = base_step;
        const double near_tp =
            std::min(std::abs(a - cplx(1.0, 0.0)), std::abs(a + cplx(1.0, 0.0)));
        if (near_tp < 0.1) h = std::max(1e-4, base_step * near_tp * 10.0);

        const double fd = 1e-7;
        cplx g;
        try {
            residual_ref(a, theta, which, &lead, true);
            const double rx = residual_ref(a + fd, theta, which, &lead, false);
            const double rxm = residual_ref(a - fd, theta, which, &lead, false);
            const double ry = residual_ref(a + cplx(0, fd), theta, which, &lead, false);
            const double rym = residual_ref(a - cplx(0, fd), theta, which, &lead, false);
            g = cplx((rx - rxm) / (2 * fd), (ry - rym) / (2 * fd));
        } catch (const NumericError&) {
            break;
        }
        if (std::abs(g) < 1e-14) break;
        cplx tang = cplx(-g.imag(), g.real()) / std::abs(g);
        if (std::real(tang * std::conj(dir)) < 0.0) tang = -tang;

        auto next = correct(a + h * tang, 0.75 * h + 1e-6);
        if (!next) {
            if (++stall > 4) break;
            a += 0.2 * h * tang;
            continue;
        }
        if (std::abs(*next - a) < 1e-12) {
            if (++stall > 4) break;
        } else {
            stall = 0;
        }
        dir = (*next - a) / std::abs(*next - a);
        a = *next;
        curve.points.push_back(a);
    }
    if (curve.points.size() < 3)
        throw ContinuationStalled("trace_sigma: curve did not advance");
    return curve;
}

namespace {

// Zero directions of the residual on a circle around c, refined by bisection
// so branch-convention seams are rejected.
std::vector<double> zero_directions(cplx c, double rad, double theta, SigmaKind which,
                                    bool upper_only) {
    const int n = 720;
    std::vector<double> vals(n, std::numeric_limits<double>::quiet_NaN());
    cplx lead(0.0, 0.0);
    double scale = 0.0;
    for (int i = 0; i <= n; ++i) {
        const int k = i % n;
        const double ang = 2.0 * kPi * i / n;
        try {
            const double v = residual_ref(c + std::polar(rad, ang), theta, which, &lead, true);
            if (i < n) vals[k] = v;
            scale = std::max(scale, std::abs(v));
        } catch (const NumericError&) {
        }
    }
    std::vector<double> out;
    for (int i = 0; i < n; ++i) {
        const double v0 = vals[i], v1 = vals[(i + 1) % n];
        if (!std::isfinite(v0) || !std::isfinite(v1)) continue;
        if (!(v0 == 0.0 || v0 * v1 < 0.0)) continue;
        // bisection with a locally frozen branch reference
        double lo = 2.0 * kPi * i / n, hi = 2.0 * kPi * (i + 1) / n;
        cplx lref(0.0, 0.0);
        double flo;
        try {
            flo = residual_ref(c + std::polar(rad, lo), theta, which, &lref, true);
        } catch (const NumericError&) {
            continue;
        }
        bool bad = false;
        for (int it = 0; it < 40 && !bad; ++it) {
            const double m = 0.5 * (lo + hi);
            double fm;
            try {
                fm = residual_ref(c + std::polar(rad, m), theta, which, &lref, false);
            } catch (const NumericError&) {
                bad = true;
                break;
            }
            if (flo * fm <= 0.0)
                hi = m;
            else {
                lo = m;
                flo = fm;
            }
        }
        if (bad) continue;
        const double ang = wrap_2pi(0.5 * (lo + hi));
        double fin;
        try {
            cplx l2(0.0, 0.0);
            fin = residual_ref(c + std::polar(rad, ang), theta, which, &l2, true);
        } catch (const NumericError&) {
            continue;
        }
        if (std::abs(fin) > 1e-3 * std::max(scale, 1e-12)) continue;  // convention seam
        if (upper_only && std::sin(ang) <= 0.02) continue;
        out.push_back(ang);
    }
    return out;
}

void mark_tube(std::vector<uint8_t>& occ, int n, double R, const Polyline& poly) {
    if (poly.size() < 2) return;
    const double cell = 2.0 * R / (n - 1);
    auto mark = [&](cplx z) {
        const int ci = static_cast<int>(std::lround((z.real() + R) / cell));
        const int cj = static_cast<int>(std::lround((z.imag() + R) / cell));
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
                const int i = ci + di, j = cj + dj;
                if (i >= 0 && i < n && j >= 0 && j < n) occ[std::size_t(j) * n + i] = 1;
            }
    };
    for (std::size_t k = 0; k + 1 < poly.size(); ++k) {
        const cplx A = poly[k], B = poly[k + 1];
        const double L = std::abs(B - A);
        const int m = std::max(1, static_cast<int>(std::ceil(L / (0.5 * cell))));
        for (int i = 0; i <= m; ++i) mark(A + (double(i) / m) * (B - A));
    }
}

std::vector<int> region_labels(const LevelSetAtlas& atlas, int n) {
    const double R = atlas.radius;
    std::vector<uint8_t> occ(static_cast<std::size_t>(n) * n, 0);
    for (const LevelSetCurve* c : atlas.chi_curves()) mark_tube(occ, n, R, c->points);

    const double cell = 2.0 * R / (n - 1);
    std::vector<int> label(static_cast<std::size_t>(n) * n, -2);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double x = -R + i * cell, y = -R + j * cell;
            if (x * x + y * y <= R * R && !occ[std::size_t(j) * n + i])
                label[std::size_t(j) * n + i] = -1;
        }
    int regions = 0;
    std::deque<std::pair<int, int>> queue;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            if (label[std::size_t(j) * n + i] != -1) continue;
            const int id = regions++;
            queue.push_back({i, j});
            label[std::size_t(j) * n + i] = id;
            while (!queue.empty()) {
                auto [ci, cj] = queue.front();
                queue.pop_front();
                const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    const int ni = ci + di[k], nj = cj + dj[k];
                    if (ni < 0 || ni >= n || nj < 0 || nj >= n) continue;
                    if (label[std::size_t(nj) * n + ni] == -1) {
                        label[std::size_t(nj) * n + ni] = id;
                        queue.push_back({ni, nj});
                    }
                }
            }
        }
    }
    return label;
}

}  // namespace

int region_count(const LevelSetAtlas& atlas, int n, Exec mode) {
    (void)mode;
    const std::vector<int> label = region_labels(atlas, n);
    int ids = 0;
    for (int v : label) ids = std::max(ids, v + 1);
    std::vector<long> size(ids, 0);
    for (int v : label)
        if (v >= 0) size[v]++;
    // single-cell pockets trapped in tube corners are raster artifacts, not
    // faces of the arrangement; the smallest genuine face at the atlas scale
    // is orders of magnitude larger
    const long min_cells = std::max(9L, n / 75L);
    int regions = 0;
    for (long s : size)
        if (s >= min_cells) ++regions;
    return regions;
}

LevelSetAtlas build_atlas(double theta, Exec mode) {
    if (theta < 0.0 || theta >= 0.5 * kPi)
        throw std::invalid_argument("build_atlas: theta must lie in [0, pi/2)");
    LevelSetAtlas atlas;
    atlas.theta = theta;
    const double trace_radius = 1.35 * atlas.radius;

    SpecialPoints sp = solve_special_points(theta, mode);
    atlas.s_triangle = sp.s_triangle;
    atlas.t_point = sp.t_point;
    atlas.e_point = sp.e_point;

    // the four branches of Sigma through each fixed turning point
    auto add_rays_from_base = [&](SigmaKind which, cplx base, const char* tag) {
        const double rad = 0.08;
        std::vector<double> dirs = zero_directions(base, rad, theta, which, false);
        int idx = 0;
        for (double ang : dirs) {
            const cplx seed = base + std::polar(rad, ang);
            try {
                LevelSetCurve c =
                    trace_sigma(theta, which, seed, trace_radius, std::polar(1.0, ang));
                c.points.insert(c.points.begin(), base);
                c.branch_tag = std::string(tag) + "-ray" + std::to_string(idx++);
                c.in_chi = true;
                atlas.curves.push_back(std::move(c));
            } catch (const ContinuationStalled&) {
            }
        }
    };
    add_rays_from_base(SigmaKind::plus1, cplx(1.0, 0.0), "sigma1");
    add_rays_from_base(SigmaKind::minus1, cplx(-1.0, 0.0), "sigma-1");

    // unbounded branch ends on the big circle; ends not matched to an already
    // traced ray belong to the detached arm, traced inward to its foot
    auto add_arms = [&](SigmaKind which, const char* tag) {
        std::vector<double> ends = zero_directions(cplx(0.0, 0.0), trace_radius, theta, which,
                                                   false);
        std::vector<double> taken;
        for (const auto& c : atlas.curves) {
            if (c.which != which) continue;
            if (std::abs(c.points.back()) > 0.9 * trace_radius)
                taken.push_back(std::arg(c.points.back()));
        }
        int idx = 0;
        for (double ang : ends) {
            bool matched = false;
            for (double t : taken)
                if (std::abs(angle_diff(ang, t)) < 0.08) matched = true;
            if (matched) continue;
            const cplx seed = std::polar(trace_radius * 0.999, ang);
            try {
                LevelSetCurve c = trace_sigma(theta, which, seed, trace_radius,
                                              -seed / std::abs(seed));
                std::reverse(c.points.begin(), c.points.end());  // foot first
                c.branch_tag = std::string(tag) + "-arm" + std::to_string(idx++);
                c.in_chi = false;  // detached branch: no short trajectory is realized on it
                atlas.curves.push_back(std::move(c));
            } catch (const ContinuationStalled&) {
            }
        }
    };
    add_arms(SigmaKind::plus1, "sigma1");
    add_arms(SigmaKind::minus1, "sigma-1");

    // triangle hairpin through s_triangle
    {
        const cplx s(atlas.s_triangle, 0.0);
        std::vector<double> dirs =
            zero_directions(s + cplx(0.0, 1e-6), 0.05, theta, SigmaKind::triangle,
                            theta > 1e-12);
        int idx = 0;
        for (double ang : dirs) {
            try {
                LevelSetCurve c = trace_sigma(theta, SigmaKind::triangle,
                                              s + std::polar(0.05, ang), trace_radius,
                                              std::polar(1.0, ang));
                c.points.insert(c.points.begin(), s);
                c.branch_tag = "sigma-triangle-arm" + std::to_string(idx++);
                c.in_chi = false;
                atlas.curves.push_back(std::move(c));
            } catch (const ContinuationStalled&) {
            }
        }
    }

    // S_triangle: the sub-arc of the hairpin from t to infinity
    if (atlas.t_point && theta > 1e-12) {
        const cplx t = *atlas.t_point;
        double best = 1e300;
        const LevelSetCurve* arm = nullptr;
        std::size_t cut = 0;
        for (const auto& c : atlas.curves) {
            if (c.which != SigmaKind::triangle) continue;
            for (std::size_t i = 0; i < c.points.size(); ++i) {
                const double d = std::abs(c.points[i] - t);
                if (d < best) {
                    best = d;
                    arm = &c;
                    cut = i;
                }
            }
        }
        if (arm != nullptr && best < 0.05) {
            LevelSetCurve s;
            s.which = SigmaKind::triangle;
            s.theta = theta;
            s.branch_tag = "S-triangle";
            s.in_chi = true;
            s.points.push_back(t);
            for (std::size_t i = cut; i < arm->points.size(); ++i) s.points.push_back(arm->points[i]);
            atlas.curves.push_back(std::move(s));
        }
    } else {
        // theta = 0: S_triangle degenerates onto the ray (-inf, -1]
        LevelSetCurve s;
        s.which = SigmaKind::triangle;
        s.theta = theta;
        s.branch_tag = "S-triangle";
        s.in_chi = true;
        for (int i = 0; i <= 400; ++i)
            s.points.push_back(cplx(-1.0 - (trace_radius - 1.0) * i / 400.0, 0.0));
        atlas.curves.push_back(std::move(s));
    }

    // drop the arc of Sigma_1 beyond e (it leaves the short-trajectory locus)
    if (atlas.e_point) {
        const cplx e = *atlas.e_point;
        for (auto& c : atlas.curves) {
            if (c.which != SigmaKind::plus1 || !c.in_chi) continue;
            double best = 1e300;
            std::size_t cut = 0;
            for (std::size_t i = 0; i < c.points.size(); ++i) {
                const double d = std::abs(c.points[i] - e);
                if (d < best) {
                    best = d;
                    cut = i;
                }
            }
            if (best < 5e-3 && cut + 1 < c.points.size()) {
                c.points.resize(cut + 1);
                c.points.push_back(e);
            }
        }
    }

    atlas.n_regions = region_count(atlas, 1201, mode);
    return atlas;
}

Membership membership(const LevelSetAtlas& atlas, cplx a, double tol) {
    Membership m;
    if (atlas.t_point && std::abs(a - *atlas.t_point) < tol) {
        m.kind = Membership::Kind::at_t_point;
        m.distance = std::abs(a - *atlas.t_point);
        return m;
    }
    if (atlas.e_point && std::abs(a - *atlas.e_point) < tol) {
        m.kind = Membership::Kind::at_e_point;
        m.distance = std::abs(a - *atlas.e_point);
        return m;
    }
    double best = 1e300;
    SigmaKind bk = SigmaKind::plus1;
    for (const LevelSetCurve* c : atlas.chi_curves()) {
        const double d = dist_point_polyline(a, c->points);
        if (d < best) {
            best = d;
            bk = c->which;
        }
    }
    m.distance = best;
    if (best < tol) {
        switch (bk) {
            case SigmaKind::plus1: m.kind = Membership::Kind::on_s_plus1; break;
            case SigmaKind::minus1: m.kind = Membership::Kind::on_s_minus1; break;
            case SigmaKind::triangle: m.kind = Membership::Kind::on_s_triangle; break;
        }
        return m;
    }
    m.kind = Membership::Kind::interior;
    // region id from a coarse label grid (regenerated on demand is too slow;
    // a modest resolution is enough for identification)
    static thread_local const LevelSetAtlas* cached = nullptr;
    static thread_local std::vector<int> labels;
    static thread_local int grid_n = 0;
    if (cached != &atlas) {
        grid_n = 601;
        labels = region_labels(atlas, grid_n);
        cached = &atlas;
    }
    const double R = atlas.radius;
    if (std::abs(a) < R) {
        const double cell = 2.0 * R / (grid_n - 1);
        const int ci = static_cast<int>(std::lround((a.real() + R) / cell));
        const int cj = static_cast<int>(std::lround((a.imag() + R) / cell));
        // the exact cell may fall on the marked tube; take the nearest labeled one
        for (int ring = 0; ring <= 4 && m.region_index < 0; ++ring)
            for (int dj = -ring; dj <= ring && m.region_index < 0; ++dj)
                for (int di = -ring; di <= ring; ++di) {
                    const int i = ci + di, j = cj + dj;
                    if (i < 0 || i >= grid_n || j < 0 || j >= grid_n) continue;
                    const int v = labels[std::size_t(j) * grid_n + i];
                    if (v >= 0) {
                        m.region_index = v;
                        break;
                    }
                }
    }
    return m;
}

}  // namespace cwkb
