#pragma once

#include <optional>

#include "cubicwkb/parallel.hpp"
#include "cubicwkb/quadrature.hpp"

namespace cwkb {

enum class SigmaKind { plus1, minus1, triangle };

struct LevelSetCurve {
    SigmaKind which = SigmaKind::plus1;
    double theta = 0.0;
    Polyline points;          // in the a-plane
    std::string branch_tag;   // e.g. "sigma1'", "sigma1''", "sigma1-arm", "S-triangle"
    bool in_chi = false;      // belongs to the short-trajectory locus chi_theta
};

struct LevelSetAtlas {
    double theta = 0.0;
    std::vector<LevelSetCurve> curves;
    double s_triangle = 0.0;              // on [-1, 0]
    std::optional<cplx> t_point;
    std::optional<cplx> e_point;
    int n_regions = 0;
    double radius = 8.0;

    std::vector<const LevelSetCurve*> chi_curves() const {
        std::vector<const LevelSetCurve*> out;
        for (const auto& c : curves)
            if (c.in_chi) out.push_back(&c);
        return out;
    }
};

// Re(e^{i theta} Int sqrt(p_a) dz) over the defining straight segment:
// [1,a], [-1,a] or [-1,1].  The branch starts from the principal local root
// at the base turning point; a segment passing within the capture radius of
// the third turning point is detoured by a half circle on the fixed
// (counterclockwise) side.  Throws OnExcludedCut on the excluded rays.
double sigma_residual(cplx a, double theta, SigmaKind which);

// Both residuals needed by the special-point solves.
cplx sigma_residual_pair(cplx a, double theta);  // (plus1, minus1) packed re/im

struct SpecialPoints {
    double s_triangle;
    std::optional<cplx> t_point;
    std::optional<cplx> e_point;
};

// s_triangle by bisection on [-1,0]; t/e points by 2-D Newton on the
// (plus1, minus1) residual pair seeded from a grid scan of the upper half
// plane.  Requires theta in [0, pi/2).
SpecialPoints solve_special_points(double theta, Exec mode = Exec::parallel);

// Predictor-corrector continuation of the residual zero set through `seed`.
LevelSetCurve trace_sigma(double theta, SigmaKind which, cplx seed, double radius = 8.0,
                          std::optional<cplx> first_direction = std::nullopt);

// Full atlas: all Sigma branches, chi subset flags, special points and the
// region count of the complement of chi_theta.
LevelSetAtlas build_atlas(double theta, Exec mode = Exec::parallel);

// Connected components of (disk of given radius) minus chi_theta, counted by
// flood fill on a grid refined near the curves.
int region_count(const LevelSetAtlas& atlas, int grid = 1201, Exec mode = Exec::parallel);

struct Membership {
    enum class Kind { interior, on_s_plus1, on_s_minus1, on_s_triangle, at_t_point, at_e_point };
    Kind kind = Kind::interior;
    int region_index = -1;   // filled for interior points
    double distance = 0.0;   // distance to the nearest chi curve
};

Membership membership(const LevelSetAtlas& atlas, cplx a, double tol = 2e-3);

}  // namespace cwkb
