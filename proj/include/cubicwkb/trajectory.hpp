#pragma once

#include "cubicwkb/quadrature.hpp"

namespace cwkb {

enum class TraceKind { vertical, horizontal };

struct Terminal {
    enum class Type { escaped, hit_turning_point, arc_length_cap };
    Type type = Type::arc_length_cap;
    int direction_index = -1;  // index j into alpha_perp (vertical) / alpha (horizontal)
    int hit_tp = -1;           // 0: z=-1, 1: z=+1, 2: z=a
    double final_angle = 0.0;
};

struct Trajectory {
    TraceKind kind = TraceKind::vertical;
    cplx seed;
    double direction = 0.0;
    Polyline points;
    Terminal terminal;
    double re_h_drift = 0.0;  // max |Re h| dev (vertical) or |Im h| (horizontal)
    cplx h_end;               // accumulated h along the trace
    int seed_tp = -1;         // seed turning point index for critical traces
    bool im_h_monotone = true;
};

struct TraceLimits {
    double arc_cap = 0.0;         // 0 = 200 (1+|a|)
    double escape_radius = 0.0;   // 0 = 20 max(1,|a|)
    double capture_radius = 0.0;  // 0 = 10 delta_tp
    double step_tol = 1e-10;
};

// Integrates the unit-h-speed field (i e^{-i theta} / sqrt(p) for vertical
// trajectories) with one transverse Newton projection per step back onto the
// level set through the seed.
Trajectory trace(const Potential& pot, cplx seed, double direction, TraceKind kind,
                 const TraceLimits& limits = {});

// Critical trace from a turning point along one of its local Stokes
// directions (the level Re h = 0 measured from the turning point itself).
Trajectory trace_critical(const Potential& pot, int tp_index, int dir_index,
                          TraceKind kind = TraceKind::vertical, const TraceLimits& limits = {});

// The 9 vertical critical trajectories, 3 per turning point.
std::vector<Trajectory> trace_critical_graph(const Potential& pot,
                                             const TraceLimits& limits = {});

struct ShortTrajectory {
    int tp0 = -1, tp1 = -1;
    Polyline points;     // turning point to turning point
    double residual = 0.0;  // |Re integral of e^{i theta} sqrt(p) dz| along it
    cplx period_half;    // the integral itself (one pass, fixed branch)
};

// Confirms a coarse connection by fresh quadrature along a simplified path
// with both endpoint singularities removed.  Throws NotActuallyShort if the
// residual stays above tolerance.
ShortTrajectory refine_short_trajectory(const Potential& pot, std::pair<int, int> tp_pair,
                                        const Polyline& coarse, double tol = 1e-9);

cplx turning_point_location(const Potential& pot, int index);

}  // namespace cwkb
