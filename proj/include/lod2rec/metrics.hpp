#pragma once

#include "lod2rec/mesh.hpp"

#include <cstdint>
#include <vector>

namespace lod2rec {

struct ComplexityReport {
    std::size_t vertices = 0;
    std::size_t polygon_facets = 0;
    std::size_t triangles = 0;
    double short_edge_ratio = 0.0;  // fraction of polygon-facet edges below threshold
    double edge_threshold = 0.5;
};

struct AccuracyReport {
    double cd_inp_to_rec = 0.0;
    double cd_rec_to_ref = -1.0;  // < 0 when no reference was available
    std::size_t sample_count = 100000;
};

// Area-uniform surface samples over the CDT triangles; reproducible per seed.
// Throws ZeroArea on an empty or degenerate mesh.
std::vector<Point3> sample_surface(const BuildingMesh& mesh, std::size_t n,
                                   std::uint64_t seed);

// Mean over `from` of the exact nearest-neighbor distance into `to`.
double chamfer_one_sided(std::span<const Point3> from, std::span<const Point3> to);

// Vertex / facet / triangle counts and the short-edge ratio. Vertices are
// deduplicated within eps_geom so welding policy differences stay fair.
ComplexityReport complexity(const BuildingMesh& mesh, double edge_threshold = 0.5);

} // namespace lod2rec
