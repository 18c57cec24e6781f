#pragma once

#include "lod2rec/partition.hpp"
#include "lod2rec/plane_detect.hpp"

#include <vector>

namespace lod2rec {

struct EnergyWeights {
    double w_d = 1.0;
    // Wall cost per meter of edge per meter of height gap. Must stay below
    // area/(perimeter*gap) of real superstructures or they get flattened;
    // must stay above ~0.05 so uncovered boundary slivers still join the roof.
    double w_p = 0.3;
    double w_c = -1.0;       // < 0: scale from contour perimeters at setup
    double ridge_tol = 0.1;  // mean height gap below this is free [m]
};

// Everything the energy terms need, precomputed once per partition.
struct LabelingProblem {
    const Partition2D* partition = nullptr;
    std::size_t n_labels = 0;  // M + 1 including ground
    EnergyWeights weights;
    double ground_z = 0.0;

    std::vector<double> cell_area;
    std::vector<char> inside_footprint;
    // coverage[cell][label]: fraction of cell area covered by that label's
    // contour; index 0 holds the uncovered fraction.
    std::vector<std::vector<double>> coverage;
    std::vector<Plane3> planes;  // planes[l] for l >= 1; planes[0] unused

    struct AdjEdge {
        std::size_t edge_idx;
        std::size_t cell_a, cell_b;
        Point2 pa, pb;
        double length;
        bool on_footprint;
    };
    std::vector<AdjEdge> adjacency;                  // edges with two bounded cells
    std::vector<std::vector<std::size_t>> cell_adj;  // adjacency indices per cell

    double height_at(int label, Point2 p) const {
        return label == 0 ? ground_z : planes[static_cast<std::size_t>(label)].height_at(p);
    }
};

LabelingProblem make_labeling_problem(const Partition2D& partition,
                                      std::span<const PlanarPrimitive> primitives,
                                      const Polygon2& footprint, const PointCloud& cloud,
                                      EnergyWeights weights);

// area(cell) * (1 - coverage); +inf for non-ground labels outside the footprint.
double data_term(const LabelingProblem& prob, std::size_t cell, int label);

// Exact integral of the absolute height gap along the shared edge; zero when
// the labels agree or the mean gap stays below ridge_tol.
double pairwise_term(const LabelingProblem& prob, const LabelingProblem::AdjEdge& edge,
                     int label_a, int label_b);

// w_c times the number of interior label-boundary edges. Footprint edges and
// edges against the exterior are mandatory boundaries and never counted.
double complexity_term(const LabelingProblem& prob, std::span<const int> labels);

struct LabelState {
    std::vector<int> labels;
    double e_data = 0.0, e_pair = 0.0, e_complex = 0.0;
    double total() const { return e_data + e_pair + e_complex; }
    // (E_d, E_p, E_c, E) after each applied move, starting with the initial state.
    std::vector<std::array<double, 4>> trace;
};

// Recompute all three cached terms from scratch.
void recompute_energy(const LabelingProblem& prob, LabelState& state);

// Greedy priority-queue descent over single-cell and whole-region flips.
LabelState assign_labels(const LabelingProblem& prob);

// Fuse adjacent same-label cells, drop ground cells, remove collinear
// degree-2 vertices. Cell planes come from the label's primitive.
Partition2D merge_cells(const Partition2D& partition, const LabelState& state,
                        std::span<const PlanarPrimitive> primitives);

// 5th percentile of z among cloud points within 2 m outside the footprint;
// falls back to the minimum z inside.
double ground_elevation(const PointCloud& cloud, const Polygon2& footprint);

} // namespace lod2rec
