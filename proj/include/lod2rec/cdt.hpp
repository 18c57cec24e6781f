#pragma once

#include "lod2rec/clip.hpp"

namespace lod2rec {

// Constrained Delaunay triangulation of a polygon with holes: ear clipping
// over the bridged ring followed by Lawson flips on unconstrained edges.
// Output triangles index the combined point list (outer ring first, then
// hole rings in order), exactly like triangulate_polygon.
PolyTriangulation cdt_polygon(const Polygon2& poly);

} // namespace lod2rec
