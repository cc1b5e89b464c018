#include "cubicwkb/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace cwkb {
namespace {

constexpr int kInf = 3;

struct HalfEdge {
    int edge = -1;
    int from = -1, to = -1;
    double angle = 0.0;  // departure angle at `from`
    int twin = -1;
};

GraphType label_from_counts(int shorts, int strips, bool short_on_strip_boundary) {
    if (shorts == 0) return GraphType::A;
    if (shorts == 2) return GraphType::Tree;
    return short_on_strip_boundary ? GraphType::B : GraphType::BB;
}

}  // namespace

StokesGraph classify(const Potential& pot) {
    StokesGraph g{pot, {}, {}, {}, {}, GraphType::A, {}, 0};

    // --- stage 1: trace, confirming candidate connections by quadrature ---
    const double delta = pot.capture_radius();
    std::array<double, 9> capture_factor;
    capture_factor.fill(10.0);
    std::array<Trajectory, 9> traces;
    std::array<bool, 9> confirmed_short{};
    std::array<int, 9> partner{};
    partner.fill(-1);

    for (int idx = 0; idx < 9; ++idx) {
        const int tp = idx / 3, k = idx % 3;
        for (;;) {
            TraceLimits lim;
            lim.capture_radius = capture_factor[idx] * delta;
            traces[idx] = trace_critical(pot, tp, k, TraceKind::vertical, lim);
            if (traces[idx].terminal.type != Terminal::Type::hit_turning_point) break;
            const int hit = traces[idx].terminal.hit_tp;
            try {
                ShortTrajectory st =
                    refine_short_trajectory(pot, {tp, hit}, traces[idx].points, 1e-9);
                confirmed_short[idx] = true;
                partner[idx] = hit;
                bool seen = false;
                for (const auto& s : g.short_trajectories)
                    if ((s.tp0 == tp && s.tp1 == hit) || (s.tp0 == hit && s.tp1 == tp))
                        seen = true;
                if (!seen) g.short_trajectories.push_back(std::move(st));
                break;
            } catch (const NotActuallyShort& e) {
                // decisively not short, or the gray zone
                Polyline probe = traces[idx].points;
                SqrtPathOptions opts;
                opts.singular_start = true;
                opts.singular_end = true;
                ShortTrajectory tmp;
                double residual = 1.0;
                try {
                    tmp = refine_short_trajectory(pot, {tp, hit}, traces[idx].points, 1e-6);
                    residual = tmp.residual;
                } catch (const NotActuallyShort&) {
                    residual = 1.0;  // above the gray zone
                }
                if (residual <= 1e-6) {
                    const int with_cnt = static_cast<int>(g.short_trajectories.size()) + 1;
                    const int without_cnt = with_cnt - 1;
                    auto coarse = [](int c) {
                        return c == 0 ? "A" : (c == 1 ? "B/BB" : "Tree");
                    };
                    throw AmbiguousNearMiss(coarse(with_cnt), coarse(without_cnt));
                }
                if (capture_factor[idx] > 3.5)
                    capture_factor[idx] = 3.0;
                else if (capture_factor[idx] > 1.3)
                    capture_factor[idx] = 1.2;
                else
                    throw NumericError(std::string("classify: persistent near miss: ") +
                                       e.what());
            }
        }
        if (traces[idx].terminal.type == Terminal::Type::arc_length_cap)
            throw NumericError("classify: trace hit the arc-length cap");
    }
    g.critical_traces.assign(traces.begin(), traces.end());

    // --- stage 2: edges ---
    // short-trajectory edges (deduped by turning point pair)
    std::map<std::pair<int, int>, int> short_edge;
    for (const auto& s : g.short_trajectories) {
        GraphEdge e;
        e.v0 = s.tp0;
        e.v1 = s.tp1;
        e.is_short = true;
        e.points = s.points;
        const TurningPoint t0 = make_turning_point(pot, turning_point_location(pot, s.tp0));
        const TurningPoint t1 = make_turning_point(pot, turning_point_location(pot, s.tp1));
        auto snap = [&](const TurningPoint& t, cplx towards, cplx at) {
            const double raw = std::arg(towards - at);
            double best = t.local_directions[0];
            for (double d : t.local_directions)
                if (std::abs(angle_diff(raw, d)) < std::abs(angle_diff(raw, best))) best = d;
            return best;
        };
        // direction toward the next interior node
        const cplx n0 = s.points.size() > 2 ? s.points[1] : s.points.back();
        const cplx n1 = s.points.size() > 2 ? s.points[s.points.size() - 2] : s.points.front();
        e.angle0 = snap(t0, n0, turning_point_location(pot, s.tp0));
        e.angle1 = snap(t1, n1, turning_point_location(pot, s.tp1));
        short_edge[{std::min(s.tp0, s.tp1), std::max(s.tp0, s.tp1)}] =
            static_cast<int>(g.edges.size());
        g.edges.push_back(std::move(e));
    }
    // escaping edges; the angle at infinity is measured where the trace
    // crosses the common escape radius, so the cyclic order of near-parallel
    // strip-bounding rays comes out right
    auto angle_at_radius = [](const Polyline& pts, double R) {
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if (std::abs(pts[i]) >= R) {
                const cplx A = pts[i - 1], B = pts[i];
                double lo = 0.0, hi = 1.0;
                for (int it = 0; it < 50; ++it) {
                    const double m = 0.5 * (lo + hi);
                    (std::abs(A + m * (B - A)) >= R ? hi : lo) = m;
                }
                return std::arg(A + 0.5 * (lo + hi) * (B - A));
            }
        }
        return std::arg(pts.back());
    };
    for (int idx = 0; idx < 9; ++idx) {
        const Trajectory& tr = traces[idx];
        if (tr.terminal.type == Terminal::Type::hit_turning_point) continue;
        GraphEdge e;
        e.v0 = idx / 3;
        e.v1 = kInf;
        e.is_short = false;
        e.points = tr.points;
        e.angle0 = tr.direction;
        e.angle1 = angle_at_radius(tr.points, pot.escape_radius());
        e.dir_index = tr.terminal.direction_index;
        g.edges.push_back(std::move(e));
    }

    // --- stage 3: half-edge face decomposition on the sphere ---
    std::vector<HalfEdge> hes;
    for (int ei = 0; ei < static_cast<int>(g.edges.size()); ++ei) {
        const GraphEdge& e = g.edges[ei];
        HalfEdge h0{ei, e.v0, e.v1, e.angle0, -1};
        HalfEdge h1{ei, e.v1, e.v0, e.angle1, -1};
        h0.twin = static_cast<int>(hes.size()) + 1;
        h1.twin = static_cast<int>(hes.size());
        hes.push_back(h0);
        hes.push_back(h1);
    }
    // rotation order per vertex: counterclockwise at finite vertices, reversed
    // at infinity (sphere orientation)
    std::array<std::vector<int>, 4> rot;
    for (int h = 0; h < static_cast<int>(hes.size()); ++h) rot[hes[h].from].push_back(h);
    for (int v = 0; v < 4; ++v) {
        std::sort(rot[v].begin(), rot[v].end(), [&](int a, int b) {
            if (hes[a].angle != hes[b].angle) return hes[a].angle < hes[b].angle;
            return a < b;
        });
        if (v == kInf) std::reverse(rot[v].begin(), rot[v].end());
    }
    auto prev_in_rot = [&](int h) {
        const auto& r = rot[hes[h].from];
        const auto it = std::find(r.begin(), r.end(), h);
        const std::size_t pos = static_cast<std::size_t>(it - r.begin());
        return r[(pos + r.size() - 1) % r.size()];
    };

    std::vector<int> face_of(hes.size(), -1);
    std::vector<std::vector<int>> face_walks;
    for (int h0 = 0; h0 < static_cast<int>(hes.size()); ++h0) {
        if (face_of[h0] >= 0) continue;
        std::vector<int> walk;
        int h = h0;
        do {
            face_of[h] = static_cast<int>(face_walks.size());
            walk.push_back(h);
            h = prev_in_rot(hes[h].twin);
        } while (h != h0 && walk.size() < 64);
        if (h != h0) throw NumericError("classify: face walk failed to close");
        face_walks.push_back(std::move(walk));
    }

    // --- stage 4: face classification ---
    const CriticalDirections cd = critical_directions(pot);
    // set of all ray angles at infinity (used to pick the empty wedge side)
    std::vector<double> ray_angles;
    for (const auto& e : g.edges)
        if (e.v1 == kInf) ray_angles.push_back(e.angle1);

    auto wedge_alphas = [&](double arr, double dep) {
        // candidate interval (arr -> dep ccw) or (dep -> arr ccw); take the one
        // free of other ray ends
        auto in_ccw = [&](double lo, double hi, double x) {
            double span = wrap_2pi(hi - lo);
            double off = wrap_2pi(x - lo);
            return off > 1e-12 && off < span - 1e-12;
        };
        auto count_rays = [&](double lo, double hi) {
            int c = 0;
            for (double r : ray_angles)
                if (in_ccw(lo, hi, r)) ++c;
            return c;
        };
        const double c1 = count_rays(arr, dep), c2 = count_rays(dep, arr);
        const double lo = (c1 <= c2) ? arr : dep;
        const double hi = (c1 <= c2) ? dep : arr;
        std::vector<int> alphas;
        for (int j = 0; j < 5; ++j)
            if (in_ccw(lo, hi, cd.alpha[j])) alphas.push_back(j);
        return alphas;
    };

    for (const auto& walk : face_walks) {
        Face f;
        std::vector<std::pair<double, double>> inf_wedges;  // (arrival, departure)
        for (std::size_t i = 0; i < walk.size(); ++i) {
            const HalfEdge& h = hes[walk[i]];
            f.boundary_edges.push_back(h.edge);
            if (h.to == kInf) {
                const HalfEdge& hn = hes[walk[(i + 1) % walk.size()]];
                // arrival ray angle is the edge's angle at infinity
                const double arr = (g.edges[h.edge].v1 == kInf) ? g.edges[h.edge].angle1
                                                                : g.edges[h.edge].angle0;
                inf_wedges.push_back({arr, hn.angle});
            } else {
                f.corner_tps.push_back(h.to);
            }
        }
        if (inf_wedges.empty())
            throw NumericError("classify: bounded face found (should not happen)");
        f.kind = (inf_wedges.size() == 1) ? Face::Kind::half_plane : Face::Kind::strip;
        int alpha_total = 0;
        for (auto [arr, dep] : inf_wedges) {
            std::vector<int> al = wedge_alphas(arr, dep);
            alpha_total += static_cast<int>(al.size());
            if (f.kind == Face::Kind::half_plane && !al.empty()) f.anti_stokes_dir = al[0];
        }
        // bounding Stokes directions at infinity
        for (auto [arr, dep] : inf_wedges) {
            for (double angv : {arr, dep}) {
                int best = 0;
                double bd = 1e9;
                for (int j = 0; j < 5; ++j) {
                    const double d = std::abs(angle_diff(angv, cd.alpha_perp[j]));
                    if (d < bd) {
                        bd = d;
                        best = j;
                    }
                }
                f.asymptotic_directions.push_back(best);
            }
        }
        if (f.kind == Face::Kind::half_plane && alpha_total != 1)
            throw NumericError("classify: half-plane wedge holds " +
                               std::to_string(alpha_total) + " anti-Stokes directions");
        if (f.kind == Face::Kind::strip) {
            if (inf_wedges.size() != 2)
                throw NumericError("classify: face with >2 wedges at infinity");
            // split boundary edges into the two components by the infinity visits
            f.component_of_edge.assign(f.boundary_edges.size(), 0);
            int comp = 0;
            for (std::size_t i = 0; i < walk.size(); ++i) {
                f.component_of_edge[i] = comp;
                if (hes[walk[i]].to == kInf) comp ^= 1;
            }
        }
        g.faces.push_back(std::move(f));
    }

    int half_planes = 0;
    for (auto& f : g.faces)
        if (f.kind == Face::Kind::half_plane)
            ++half_planes;
        else
            ++g.strip_count;
    if (half_planes != 5)
        throw NumericError("classify: expected 5 half-plane faces, found " +
                           std::to_string(half_planes));

    // anticlockwise half-plane indexing starting at the face containing the
    // first anti-Stokes direction alpha_0 (the paper orders anticlockwise but
    // fixes no origin)
    {
        std::vector<std::pair<double, Face*>> hp;
        for (auto& f : g.faces)
            if (f.kind == Face::Kind::half_plane)
                hp.push_back({wrap_2pi(cd.alpha[f.anti_stokes_dir] - cd.alpha[0]), &f});
        std::sort(hp.begin(), hp.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        for (int i = 0; i < static_cast<int>(hp.size()); ++i) hp[i].second->index = i;
    }

    // --- stage 5: type label and complexes ---
    bool short_on_strip = false;
    for (const auto& f : g.faces) {
        if (f.kind != Face::Kind::strip) continue;
        for (int ei : f.boundary_edges)
            if (g.edges[ei].is_short) short_on_strip = true;
    }
    const int shorts = static_cast<int>(g.short_trajectories.size());
    if (shorts > 2) throw NumericError("classify: more than two short trajectories");
    const int expect_strips = (shorts == 0) ? 2 : (shorts == 1 ? 1 : 0);
    if (g.strip_count != expect_strips)
        throw NumericError("classify: strip count " + std::to_string(g.strip_count) +
                           " inconsistent with " + std::to_string(shorts) +
                           " short trajectories");
    g.type_label = label_from_counts(shorts, g.strip_count, short_on_strip);

    {
        // connected components of the turning-point graph under short edges
        std::array<int, 3> comp{0, 1, 2};
        for (const auto& s : g.short_trajectories) {
            const int a = std::min(comp[s.tp0], comp[s.tp1]);
            const int b = std::max(comp[s.tp0], comp[s.tp1]);
            for (int& c : comp)
                if (c == b) c = a;
        }
        std::map<int, std::vector<int>> groups;
        for (int t = 0; t < 3; ++t) groups[comp[t]].push_back(t);
        for (auto& [k, v] : groups) g.stokes_complexes.push_back(v);
    }
    return g;
}

namespace {

// face index of the corner of `tp` not touching the short edge `ei`
int corner_face_at(const StokesGraph& g, int ei, int tp) {
    for (int fi = 0; fi < static_cast<int>(g.faces.size()); ++fi) {
        const Face& f = g.faces[fi];
        if (f.kind != Face::Kind::half_plane) continue;
        bool has_corner = false;
        for (int t : f.corner_tps)
            if (t == tp) has_corner = true;
        if (!has_corner) continue;
        bool touches_edge = false;
        for (int e : f.boundary_edges)
            if (e == ei) touches_edge = true;
        if (!touches_edge) return fi;
    }
    return -1;
}

}  // namespace

std::vector<EigenvalueProblemDescriptor> admissible_pairs(const StokesGraph& g) {
    const int nf = static_cast<int>(g.faces.size());
    // shared edges per face pair
    std::map<std::pair<int, int>, std::vector<int>> shared;
    for (int i = 0; i < nf; ++i)
        for (int j = i + 1; j < nf; ++j)
            for (int ei : g.faces[i].boundary_edges)
                for (int ej : g.faces[j].boundary_edges)
                    if (ei == ej) shared[{i, j}].push_back(ei);

    auto edges_between = [&](int i, int j) -> const std::vector<int>* {
        auto it = shared.find({std::min(i, j), std::max(i, j)});
        return it == shared.end() ? nullptr : &it->second;
    };
    auto strip_component = [&](int strip_face, int edge) {
        const Face& f = g.faces[strip_face];
        for (std::size_t k = 0; k < f.boundary_edges.size(); ++k)
            if (f.boundary_edges[k] == edge) return f.component_of_edge[k];
        return -1;
    };

    std::vector<int> hp, strips;
    for (int i = 0; i < nf; ++i)
        (g.faces[i].kind == Face::Kind::half_plane ? hp : strips).push_back(i);

    auto admissible = [&](int A, int B) {
        if (edges_between(A, B) != nullptr) return true;  // adjacent
        // through one strip, entering and leaving on different components
        for (int s : strips) {
            const auto* ea = edges_between(A, s);
            const auto* eb = edges_between(B, s);
            if (!ea || !eb) continue;
            for (int x : *ea)
                for (int y : *eb)
                    if (strip_component(s, x) != strip_component(s, y)) return true;
        }
        // through two strips
        for (int s1 : strips)
            for (int s2 : strips) {
                if (s1 == s2) continue;
                const auto* ea = edges_between(A, s1);
                const auto* em = edges_between(s1, s2);
                const auto* eb = edges_between(B, s2);
                if (!ea || !em || !eb) continue;
                for (int x : *ea)
                    for (int m : *em) {
                        if (strip_component(s1, x) == strip_component(s1, m)) continue;
                        for (int y : *eb)
                            if (strip_component(s2, m) != strip_component(s2, y)) return true;
                    }
            }
        return false;
    };

    // corner faces of each short trajectory
    std::vector<std::pair<int, int>> corner_pairs;  // (face, face) per short edge
    std::vector<int> short_edges;
    for (int ei = 0; ei < static_cast<int>(g.edges.size()); ++ei)
        if (g.edges[ei].is_short) short_edges.push_back(ei);
    for (int ei : short_edges)
        corner_pairs.push_back({corner_face_at(g, ei, g.edges[ei].v0),
                                corner_face_at(g, ei, g.edges[ei].v1)});

    auto complex_of_tp = [&](int tp) {
        for (int c = 0; c < static_cast<int>(g.stokes_complexes.size()); ++c)
            for (int t : g.stokes_complexes[c])
                if (t == tp) return c;
        return -1;
    };

    std::vector<EigenvalueProblemDescriptor> out;
    for (std::size_t i = 0; i < hp.size(); ++i) {
        for (std::size_t j = i + 1; j < hp.size(); ++j) {
            const int A = hp[i], B = hp[j];
            if (admissible(A, B)) continue;
            EigenvalueProblemDescriptor d;
            d.face_a = A;
            d.face_b = B;
            // match against the corner-face pattern of a single short edge
            bool matched = false;
            for (std::size_t k = 0; k < corner_pairs.size(); ++k) {
                const auto [ca, cb] = corner_pairs[k];
                if ((ca == A && cb == B) || (ca == B && cb == A)) {
                    d.broken = false;
                    d.period_contours = {{g.edges[short_edges[k]].v0,
                                          g.edges[short_edges[k]].v1}};
                    d.joining_complex = complex_of_tp(g.edges[short_edges[k]].v0);
                    matched = true;
                    break;
                }
            }
            if (!matched && g.type_label == GraphType::Tree) {
                d.broken = true;
                for (int ei : short_edges)
                    d.period_contours.push_back({g.edges[ei].v0, g.edges[ei].v1});
                d.joining_complex = complex_of_tp(g.edges[short_edges[0]].v0);
            } else if (!matched) {
                // type BB: the pairs are anchored at the joining complex even
                // though their corner faces do not flank the short trajectory
                d.broken = false;
                if (!short_edges.empty()) {
                    d.period_contours = {{g.edges[short_edges[0]].v0,
                                          g.edges[short_edges[0]].v1}};
                    d.joining_complex = complex_of_tp(g.edges[short_edges[0]].v0);
                }
            }
            out.push_back(std::move(d));
        }
    }
    return out;
}

AccumulationResult accumulation_check(const StokesGraph& g,
                                      const EigenvalueProblemDescriptor& d) {
    AccumulationResult r;
    switch (g.type_label) {
        case GraphType::A:
            r.accumulates = false;
            return r;
        case GraphType::BB:
            r.accumulates = false;
            return r;
        case GraphType::B:
            r.accumulates = true;
            return r;
        case GraphType::Tree:
            if (!d.broken) {
                r.accumulates = true;
                return r;
            }
            r.rationality_condition = true;
            r.alpha = tree_period_ratio(g.potential);
            r.accumulates = detect_rational(*r.alpha).is_rational;
            return r;
    }
    return r;
}

}  // namespace cwkb
