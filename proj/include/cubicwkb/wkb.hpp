#pragma once

#include "cubicwkb/graph.hpp"

namespace cwkb {

// Error-control integrand of the asymptotic construction:
// |5/16 p'^2/p^3 - p''/(4 p^2)| sqrt|p|, integrated along canonical paths.
double wkb_error_integrand(const Potential& pot, cplx z);

// Supremum of the error integral over a family of canonical paths (polylines
// in z).  Tails beyond the last node are bounded analytically and truncated
// once the bound drops below 1e-12.
double r_epsilon(const Potential& pot, const std::vector<Polyline>& path_family);

// A canonical path family for a given half-plane sector: anti-Stokes traces
// started from points at distance >= eps from the turning points.
std::vector<Polyline> sample_canonical_paths(const Potential& pot, double eps, int count = 6);

struct VolterraResult {
    std::vector<cplx> zeta;               // h-values along the path
    std::vector<cplx> w;                  // converged correction samples
    std::vector<double> contraction_ratios;
    int iterations = 0;
    double w1_norm = 0.0;
};

// Successive approximations for the correction term along a canonical path
// (given as a z-polyline); the kernel is (1 - exp(2 r (zeta - t)))/(2 r).
// psi may be overridden for testing (null = the potential's own error term).
VolterraResult volterra_solve(const Potential& pot, cplx lambda, const Polyline& z_path,
                              double tol = 1e-12, int n_max = 60,
                              const std::function<cplx(cplx)>* psi_override = nullptr);

struct WKBSolution {
    Potential pot;
    cplx lambda;
    int base_tp = 0;        // turning point index anchoring h
    int sign = -1;          // -1: decaying factor exp(-h); +1: exp(+h)
    double r_eps = 0.0;
    double correction_bound = 0.0;  // c r_eps/(r - r_eps)
    double eps = 0.1;       // validity clearance from turning points

    WKBSolution(const Potential& p, cplx lam, int tp, int sgn, double reps, double c_const,
                double eps_ = 0.1)
        : pot(p), lambda(lam), base_tp(tp), sign(sgn), r_eps(reps), eps(eps_) {
        const double r = std::abs(lam);
        if (r <= reps)
            throw std::invalid_argument("WKB solution defined only for |lambda| > r_epsilon");
        correction_bound = c_const * reps / (r - reps);
    }
};

struct WKBValue {
    cplx y;
    cplx dy;           // three-term leading derivative (if requested)
    cplx h;            // the exponent actually used
    double bound;      // relative correction bound
};

// Leading-order evaluation along the straight path from the base turning
// point; throws OutsideValidityDomain when the path runs too close to
// another turning point.
WKBValue wkb_evaluate(const WKBSolution& sol, cplx z, bool with_derivative = false);

// Normalization phase of an elementary basis: |c| = 1 and arg(c) is the limit
// of arg(p^{1/4}) approaching the turning point along the Stokes line.
cplx elementary_basis_phase(const Potential& pot, int tp, const Polyline& stokes_line);

enum class TransitionKind { finite_stokes, anti_stokes, turning_rotation };

struct TransitionData {
    double alpha = 0.0;   // |h displacement| per unit |lambda| (finite Stokes)
    cplx lambda;          // needed by the anti-Stokes type
    cplx xi;              // h displacement (anti-Stokes), Re(lambda xi) > 0
    double sigma = 0.0;   // phase exp(i sigma) = c2/c1
};

struct TransitionMatrix {
    TransitionKind kind;
    std::array<cplx, 4> m;  // row major 2x2

    TransitionMatrix operator*(const TransitionMatrix& o) const {
        TransitionMatrix r{kind, {}};
        r.m = {m[0] * o.m[0] + m[1] * o.m[2], m[0] * o.m[1] + m[1] * o.m[3],
               m[2] * o.m[0] + m[3] * o.m[2], m[2] * o.m[1] + m[3] * o.m[3]};
        return r;
    }
    TransitionMatrix inverse() const;
};

TransitionMatrix transition(TransitionKind kind, const TransitionData& data);

enum class SpectrumSource { quantization, oracle };

struct Spectrum {
    double theta = 0.0;
    std::vector<double> lambda_mods;
    int n_offset = 1;
    SpectrumSource source = SpectrumSource::quantization;
    Period period_used;
    double alpha_ratio = 1.0;  // meaningful for the broken tree case
};

// Quantization-condition spectrum for a descriptor.  Unbroken joins give
// |lambda_n| = (2n-1) pi / abs_value(period); the broken tree join solves the
// leading-order two-term condition and returns the roots in the window.
Spectrum quantize(const StokesGraph& graph, const EigenvalueProblemDescriptor& d, int n_min,
                  int n_max);

}  // namespace cwkb
