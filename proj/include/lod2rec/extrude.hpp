#pragma once

#include "lod2rec/mesh.hpp"
#include "lod2rec/partition.hpp"

#include <vector>

namespace lod2rec {

struct ExtrudeParams {
    double tau_v = 0.5;     // vertical vertex-merge threshold [m]
    double ground_z = 0.0;
    bool merge_enabled = true;  // disable for the no-3D-regularization ablation
};

// Per-(corner, cell) height variables plus per-cell plane variables.
struct RoofGraph {
    struct Incidence {
        std::size_t corner;  // partition vertex id
        std::size_t cell;
        double z = 0.0;
        std::size_t merge_class = 0;
    };
    std::vector<Incidence> incidences;
    std::vector<std::array<double, 3>> detected;  // height form (a, b, c) per cell
    std::vector<std::array<double, 3>> planes;    // current planes, same layout
    std::vector<double> cell_area;
    std::vector<char> rank_deficient;
    std::vector<double> class_z;
    std::size_t n_classes = 0;

    // incidence index by (corner, cell); SIZE_MAX when absent
    std::size_t find(std::size_t corner, std::size_t cell) const;
};

// Project every cell corner through the cell's plane; one merge class per
// incidence. Throws MissingPlane when a cell has no plane.
RoofGraph extrude_cells(const Partition2D& partition);

// Single-linkage clustering of incidence heights per corner with threshold
// tau_v; cluster z set provisionally to the mean.
void merge_vertical(RoofGraph& graph, const Partition2D& partition, double tau_v);

struct HeightOptResult {
    double objective = 0.0;            // weighted squared plane deviation
    double max_constraint_residual = 0.0;
    std::size_t n_rank_deficient = 0;
};

// Joint least squares over plane coefficients and class heights: every
// incidence in a class meets its cell plane exactly; near-flat detected
// planes are pinned exactly horizontal. Area-weighted prior on the planes.
HeightOptResult optimize_heights(RoofGraph& graph, const Partition2D& partition);

// Roof facets from cells, walls from unmerged height classes and region
// boundary edges, ground facet(s) from the region outline. Throws
// AssemblyFailure naming the first violated mesh invariant.
BuildingMesh assemble_mesh(const RoofGraph& graph, const Partition2D& partition,
                           const Polygon2& footprint, double ground_z);

} // namespace lod2rec
