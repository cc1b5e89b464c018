#pragma once

#include <optional>

#include "cubicwkb/periods.hpp"
#include "cubicwkb/trajectory.hpp"

namespace cwkb {

enum class GraphType { A, B, BB, Tree };

inline const char* graph_type_name(GraphType t) {
    switch (t) {
        case GraphType::A: return "A";
        case GraphType::B: return "B";
        case GraphType::BB: return "BB";
        case GraphType::Tree: return "Tree";
    }
    return "?";
}

struct Face {
    enum class Kind { half_plane, strip };
    Kind kind = Kind::half_plane;
    int index = -1;                        // H0..H4 anticlockwise for half-planes
    std::vector<int> boundary_edges;       // edge ids along the face walk
    std::vector<int> asymptotic_directions;  // alpha_perp indices of bounding rays
    int anti_stokes_dir = -1;              // contained alpha_j index (half-planes)
    std::vector<int> corner_tps;           // finite turning points visited
    // for strips: edge ids split by boundary component
    std::vector<int> component_of_edge;    // parallel to boundary_edges (0 or 1)
};

struct GraphEdge {
    int v0 = -1, v1 = -1;  // 0,1,2 = turning points; 3 = infinity
    bool is_short = false;
    Polyline points;
    double angle0 = 0.0, angle1 = 0.0;  // departure angles at each end
    int dir_index = -1;                 // alpha_perp index for escaping edges
};

struct EigenvalueProblemDescriptor {
    int face_a = -1, face_b = -1;       // indices into StokesGraph::faces
    int joining_complex = -1;
    bool broken = false;                // broken short trajectory (tree middle pair)
    std::vector<std::pair<int, int>> period_contours;  // turning point pairs
};

struct StokesGraph {
    Potential potential;
    std::vector<Trajectory> critical_traces;   // the 9 raw traces
    std::vector<ShortTrajectory> short_trajectories;
    std::vector<GraphEdge> edges;
    std::vector<Face> faces;
    GraphType type_label = GraphType::A;
    std::vector<std::vector<int>> stokes_complexes;  // turning point sets per component
    int strip_count = 0;

    const Face* strip() const {
        for (const auto& f : faces)
            if (f.kind == Face::Kind::strip) return &f;
        return nullptr;
    }
};

// Traces the critical graph, confirms short trajectories with the two-stage
// test, decomposes the sphere into faces and assigns the type label.  Near
// misses with refined residual in [1e-9, 1e-6] raise AmbiguousNearMiss.
StokesGraph classify(const Potential& pot);

// All non-admissible half-plane pairs (the eigenvalue problems), computed by
// canonical-domain chains: two half-planes are admissible when they are
// adjacent or joined through at most two strips entered and left on distinct
// boundary components.
std::vector<EigenvalueProblemDescriptor> admissible_pairs(const StokesGraph& graph);

struct AccumulationResult {
    bool accumulates = false;
    std::optional<double> alpha;  // period ratio, set for broken tree pairs
    bool rationality_condition = false;
};

AccumulationResult accumulation_check(const StokesGraph& graph,
                                      const EigenvalueProblemDescriptor& descriptor);

}  // namespace cwkb
