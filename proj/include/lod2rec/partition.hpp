#pragma once

#include "lod2rec/geom.hpp"
#include "lod2rec/line_extract.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lod2rec {

struct Rect {
    Point2 lo, hi;
    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    double area() const { return width() * height(); }
    bool contains(Point2 p) const {
        return p.x >= lo.x - eps_geom && p.x <= hi.x + eps_geom && p.y >= lo.y - eps_geom &&
               p.y <= hi.y + eps_geom;
    }
};

struct PartitionCell {
    std::vector<std::size_t> outer;               // vertex ids, counter-clockwise
    std::vector<std::vector<std::size_t>> holes;  // clockwise
    int label = -1;                               // -1 unset, 0 ground, >0 primitive id
    std::optional<Plane3> plane;
    double area = 0.0;
};

struct PartitionEdge {
    std::size_t a = 0, b = 0;  // vertex ids, a < b
    int left = -1, right = -1; // cell index for the directed edge a->b; -1 = exterior
    SegmentKind kind = SegmentKind::intersection;
    bool on_footprint = false;
};

// Planar subdivision; the kinetic stage produces one that tiles its bbox
// exactly, the labeling merge reduces it to the roof cells only.
struct Partition2D {
    std::vector<Point2> vertices;
    std::vector<PartitionEdge> edges;
    std::vector<PartitionCell> cells;
    Rect bbox;

    Point2 cell_interior_point(std::size_t cell) const;
    Polygon2 cell_polygon(std::size_t cell) const;
};

// Build the cell complex induced by a set of segments plus the bbox boundary.
// Segments may mutually cross; endpoints and crossings are welded at eps_geom.
Partition2D assemble_partition(std::span<const SoupSegment> segments, Rect bbox);

// Build a partition directly from explicit cells (rings as vertex indices).
// Derives the edge table with left/right references; edges lying on the
// footprint outline get the footprint tag. Used by fixtures and tests.
Partition2D partition_from_cells(std::vector<Point2> vertices,
                                 std::vector<PartitionCell> cells,
                                 const Polygon2* footprint = nullptr);

struct PartitionDiagnostics {
    std::size_t vertices = 0, edges = 0, bounded_cells = 0, components = 0;
    double worst_area_mismatch = 0.0;   // | sum(cells) - bbox | / bbox
    double worst_edge_clearance = 0.0;  // deepest crossing between non-adjacent edges
    bool ok = true;
    std::string violation;
};

// Remove degree-2 vertices whose two edges are collinear within angle_tol
// radians, splicing the edges and cell rings. Regularization aligns chained
// edges exactly, so boundary jogs left by labeling collapse to single edges;
// a loose tolerance also flattens sub-0.1 deg kinks left where an infeasible
// direction constraint was released.
Partition2D remove_collinear_vertices(const Partition2D& p, double angle_tol = 1e-9);

// Non-throwing invariant check.
PartitionDiagnostics check_partition(const Partition2D& p);

// Throws InvalidPartition naming the violated invariant; returns diagnostics.
PartitionDiagnostics validate_partition(const Partition2D& p);

} // namespace lod2rec
