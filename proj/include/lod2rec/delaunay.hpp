#pragma once

#include "lod2rec/geom.hpp"

#include <array>
#include <vector>

namespace lod2rec {

// Delaunay triangulation of a 2D point set (Bowyer-Watson). Input points in
// nearly-degenerate position (grids) are handled through a deterministic
// symbolic jitter; output triangle geometry always refers to the original
// coordinates.
std::vector<std::array<std::size_t, 3>> delaunay_triangulate(std::span<const Point2> points);

double circumradius_squared(Point2 a, Point2 b, Point2 c);

// Boundary of the largest-area connected component of the 2D alpha shape.
// `alpha` is the squared-radius bound in m^2: a triangle belongs to the shape
// iff its circumradius^2 <= alpha. The outer loop comes back counter-
// clockwise, hole loops clockwise; all index `points`. Empty when no
// triangle qualifies.
struct AlphaBoundary {
    std::vector<std::size_t> outer;
    std::vector<std::vector<std::size_t>> holes;
};
AlphaBoundary alpha_shape_boundary(std::span<const Point2> points, double alpha);

// Outer loop only; convenience for hole-free callers.
std::vector<std::size_t> alpha_shape_outer_boundary(std::span<const Point2> points,
                                                    double alpha);

} // namespace lod2rec
