#pragma once

#include "lod2rec/geom.hpp"

#include <array>
#include <string>
#include <vector>

namespace lod2rec {

enum class FacetRole : std::uint8_t { roof, wall, ground };

struct MeshFacet {
    std::vector<std::size_t> ring;                // outward-oriented outer loop
    std::vector<std::vector<std::size_t>> holes;  // opposite orientation
    FacetRole role = FacetRole::roof;
    Plane3 plane;

    std::size_t vertex_count() const {
        std::size_t n = ring.size();
        for (const auto& h : holes) n += h.size();
        return n;
    }
};

// Polygon surface mesh with per-facet exact plane equations. The assembly
// guarantees watertightness, 2-manifoldness and intersection-freeness; the
// checker below re-verifies all of it.
struct BuildingMesh {
    std::vector<Point3> vertices;
    std::vector<MeshFacet> facets;

    double facet_area(std::size_t f) const;
    double total_area() const;
};

struct MeshCheckReport {
    bool watertight = false;
    bool manifold = false;
    bool intersection_free = false;
    double max_planarity_residual = 0.0;
    bool ok() const {
        return watertight && manifold && intersection_free && max_planarity_residual <= 1e-9;
    }
    std::string first_violation;
};

MeshCheckReport check_mesh(const BuildingMesh& mesh);

// Per-facet constrained Delaunay triangles, indices into mesh.vertices.
// Triangles reuse facet vertices only and tile the facet exactly.
std::vector<std::array<std::size_t, 3>> triangulate_facet(const BuildingMesh& mesh,
                                                          const MeshFacet& facet);
std::vector<std::array<std::size_t, 3>> triangulate_facets(const BuildingMesh& mesh);

} // namespace lod2rec
