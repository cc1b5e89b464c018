#pragma once

#include "cubicwkb/graph.hpp"

namespace cwkb {

// Scaled ODE state for y'' = lambda^2 p(z) y: the true solution is
// (y, dy) * exp(log_scale); the factor is stripped whenever the magnitudes
// threaten overflow.
struct OdeState {
    cplx y{1.0, 0.0};
    cplx dy{0.0, 0.0};
    double log_scale = 0.0;
};

// High-accuracy integration along the straight segment from z0 to z1.
OdeState integrate_ode(const Potential& pot, cplx lambda, OdeState s, cplx z0, cplx z1,
                       double tol = 1e-12);

// Same, accumulating the logarithmic increment Int (y'/y) dz; throws
// ZeroOnContour if |y| dips below the floor along the way.
OdeState integrate_ode_logged(const Potential& pot, cplx lambda, OdeState s, cplx z0, cplx z1,
                              cplx& log_increment, double rel_floor = 1e-9,
                              double tol = 1e-12);

struct ShootingProblem {
    Potential pot;
    EigenvalueProblemDescriptor descriptor;
    double ray_a = 0.0, ray_b = 0.0;  // outgoing anti-Stokes directions
    double radius = 0.0;              // seeding radius
    cplx matching_point;
    ShootingProblem(const Potential& p) : pot(p) {}
};

ShootingProblem make_shooting_problem(const StokesGraph& graph,
                                      const EigenvalueProblemDescriptor& d);

// Subdominant WKB seed at radius R along direction alpha, then inward
// integration to the matching point; returns the state there.
OdeState shoot_ray(const ShootingProblem& prob, cplx lambda, double alpha);

// Normalized Wronskian mismatch of the two ray solutions at the matching
// point (dimensionless; zero at an eigenvalue).
cplx wronskian_mismatch(const ShootingProblem& prob, cplx lambda);

struct EigenvalueHit {
    double lambda_mod = 0.0;  // |lambda| of the polished eigenvalue
    cplx lambda;              // full complex eigenvalue
    double mismatch = 0.0;    // |W| after polishing
};

// Scans |lambda| over the bracket on the ray arg lambda = theta, refines the
// mismatch minima and polishes in the complex plane.  Throws NoSignChange if
// no eigenvalue converges inside the bracket.
EigenvalueHit shoot_eigenvalue(const ShootingProblem& prob, double mod_lo, double mod_hi);

// Eigenfunction samples over a rectangular window, filled column by column
// with renormalization bookkeeping.
struct EigenfunctionGrid {
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    int nx = 0, ny = 0;
    std::vector<cplx> value;       // normalized samples
    std::vector<double> log_scale; // per-sample scale
    std::vector<cplx> deriv;
    cplx lambda;

    cplx at(int i, int j) const { return value[std::size_t(j) * nx + i]; }
    cplx node(int i, int j) const {
        return cplx(x0 + (x1 - x0) * i / (nx - 1.0), y0 + (y1 - y0) * j / (ny - 1.0));
    }
};

EigenfunctionGrid eigenfunction_grid(const ShootingProblem& prob, cplx lambda, double x0,
                                     double x1, double y0, double y1, int nx, int ny);

// Winding number of the eigenfunction along a closed contour by transporting
// the solution and accumulating the logarithmic derivative.
int count_zeros(const ShootingProblem& prob, cplx lambda, const Polyline& contour);

struct ZeroSet {
    int n_index = 0;
    std::vector<cplx> zeros;
    std::vector<cplx> bounded_component;    // near the short trajectory
    std::vector<cplx> unbounded_component;  // near the infinite marked line
    double max_dist_to_support = 0.0;
};

// Locates the zeros inside the grid window by cellwise winding numbers and
// Newton polishing; partitions them against the supplied support lines.
ZeroSet locate_zeros(const ShootingProblem& prob, cplx lambda, const EigenfunctionGrid& grid,
                     const Polyline& ell, const Polyline& ell_star);

// The infinite Stokes line expected to carry the unbounded zeros: for an
// unbroken join this is the third turning point's trace that does not bound
// the strip; for the broken tree join it is the summit's free infinite trace.
Polyline marked_infinite_line(const StokesGraph& graph, const EigenvalueProblemDescriptor& d);

}  // namespace cwkb
