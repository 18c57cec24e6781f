#pragma once

#include "lod2rec/partition.hpp"

#include <vector>

namespace lod2rec {

struct Regularize2DParams {
    double tau_h = 0.5;            // short-edge collapse threshold [m]
    double parallel_tol_deg = 5.0;
    double ortho_tol_deg = 5.0;
};

enum class Relation : std::uint8_t { parallel, orthogonal };

struct RegularityLink {
    std::size_t edge_a, edge_b;  // indices into the partition edge table
    Relation relation;
};

struct OrientationClass {
    std::vector<std::size_t> members;
    std::vector<int> branch;    // 0: target direction, 1: target + 90 deg
    double target_angle = 0.0;  // radians in [0, pi/2)
    bool anchored = false;      // contains a footprint edge (direction locked)
};

struct RegularityGraph {
    std::vector<RegularityLink> links;
    std::vector<OrientationClass> classes;
    std::vector<int> edge_class;  // per partition edge; -1 = unconstrained
};

// Near-parallel / near-orthogonal edge pair detection plus orientation
// classes. Footprint edges anchor their class to the footprint direction.
RegularityGraph build_regularity_graph(const Partition2D& partition,
                                       const Regularize2DParams& params);

// Collapse edges shorter than tau_h, shortest first. Footprint-boundary
// endpoints are immovable. Returns the new partition and the surviving-edge
// remap: edge_map[old_edge] = new edge index or -1.
struct CollapseResult {
    Partition2D partition;
    std::vector<int> edge_map;
};
CollapseResult collapse_short_edges(const Partition2D& partition, double tau_h);

// Global constrained least squares on the vertex coordinates: every classed
// edge becomes exactly parallel to its class direction, footprint vertices
// slide along their original footprint lines only. Rolls back (returns the
// input, rolled_back = true) if the optimum inverts a cell or crosses edges.
struct OptimizeResult {
    Partition2D partition;
    bool rolled_back = false;
    std::string rollback_cause;
    double max_link_residual = 0.0;  // |cross| for parallel, |dot| for orthogonal
    double mean_displacement = 0.0;
    double objective = 0.0;          // sum of squared vertex displacements
    // Direction constraints abandoned to restore feasibility. Frozen class
    // directions make cycles through pinned footprint corners generically
    // inconsistent (hip roofs); the weakest rows are released one at a time.
    std::size_t dropped_constraints = 0;
};
OptimizeResult optimize_vertices(const Partition2D& partition, const RegularityGraph& graph,
                                 const Polygon2& footprint,
                                 const std::vector<int>* edge_map = nullptr);

// Angle of an edge folded into [0, pi).
double edge_angle(const Partition2D& partition, const PartitionEdge& e);

} // namespace lod2rec
