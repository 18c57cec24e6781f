#pragma once

#include "lod2rec/geom.hpp"
#include "lod2rec/plane_detect.hpp"

#include <vector>

namespace lod2rec {

struct LineExtractionParams {
    double adjacency_dist = 0.4;        // max 3D contour gap for adjacency [m]
    double simplify_tol = 0.25;         // contour polyline simplification [m]
    double discontinuity_height = 0.5;  // side-to-side mean height jump [m]
    double side_band = 0.75;            // averaging band on each side [m]
    // Collinear-overlap merge tolerance; <= 0 derives it from the point
    // spacing (contour edges sit about half a spacing inside the true edge,
    // so twin lines from the two sides of a step are one spacing apart).
    double merge_lateral_tol = -1.0;
    double merge_angle_deg = 2.5;
};

struct SoupSegment {
    Segment2 seg;
    int source_a = 0;  // primitive id (intersection/discontinuity), 0 otherwise
    int source_b = 0;  // second primitive id for intersection lines
};

struct SegmentSoup2 {
    std::vector<SoupSegment> segments;
};

// One 3D segment per adjacent, non-parallel primitive pair: the plane-plane
// intersection line clipped to the union of the two contours dilated by
// adjacency_dist. Contour adjacency is measured in 3D.
std::vector<Segment3> intersection_lines(std::span<const PlanarPrimitive> primitives,
                                         double adjacency_dist);

// Contour edges (after simplification) whose side-to-side mean point height
// differs by more than the threshold. Caches the per-edge side means on the
// primitive.
std::vector<Segment3> discontinuity_lines(PlanarPrimitive& primitive, const PointCloud& cloud,
                                          const LineExtractionParams& params);

// Plan projection of all intersection + discontinuity lines plus the footprint
// ring edges, deduplicated by the collinear-overlap merge and canonically
// sorted.
SegmentSoup2 build_soup(std::vector<PlanarPrimitive>& primitives, const Polygon2& footprint,
                        const PointCloud& cloud, const LineExtractionParams& params);

// Recursive max-deviation polyline simplification (open polyline).
std::vector<Point2> simplify_polyline(std::span<const Point2> pts, double tol);

// Closed-ring variant; anchors at the two mutually farthest vertices.
std::vector<Point2> simplify_ring(std::span<const Point2> ring, double tol);

} // namespace lod2rec
