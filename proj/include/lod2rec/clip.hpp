#pragma once

#include "lod2rec/geom.hpp"

#include <array>
#include <vector>

namespace lod2rec {

using ConvexPoly = std::vector<Point2>;  // counter-clockwise

// Clip a convex polygon against the half-plane on the left of a->b.
ConvexPoly clip_halfplane(const ConvexPoly& poly, Point2 a, Point2 b);

double convex_area(const ConvexPoly& poly);

// Area of the intersection of two triangles (each given CCW).
double triangle_intersection_area(const std::array<Point2, 3>& t1,
                                  const std::array<Point2, 3>& t2);

// Split convex \ triangle into disjoint convex pieces.
std::vector<ConvexPoly> convex_minus_triangle(const ConvexPoly& poly,
                                              const std::array<Point2, 3>& tri);

// Fan-free triangulation of a simple CCW ring by ear clipping.
// Returns index triples into the ring.
std::vector<std::array<std::size_t, 3>> ear_clip(std::span<const Point2> ring);

// Triangulate a polygon with holes; hole rings are bridged into the outer
// ring first, so output triangles reference points of the returned vertex
// list (outer vertices first, then each hole's, in order).
struct PolyTriangulation {
    std::vector<Point2> points;
    std::vector<std::array<std::size_t, 3>> triangles;
};
PolyTriangulation triangulate_polygon(const Polygon2& poly);

// Area of polygon intersection computed through triangle decompositions.
double polygon_intersection_area(const Polygon2& a, const Polygon2& b);

// Area of `a` not covered by any polygon in `covers`.
double polygon_uncovered_area(const Polygon2& a, std::span<const Polygon2> covers);

} // namespace lod2rec
