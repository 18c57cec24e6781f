#pragma once

#include "lod2rec/extrude.hpp"
#include "lod2rec/mesh.hpp"
#include "lod2rec/partition.hpp"
#include "lod2rec/plane_detect.hpp"

#include <cstdint>
#include <string>

namespace lod2rec {

enum class Archetype : std::uint8_t {
    flat,
    gable,
    hip,
    pyramid,
    step,
    l_gable,
    cross_gable,
    flat_with_superstructure,
};

Archetype archetype_from_name(const std::string& name);
std::string archetype_name(Archetype a);

struct FixtureSpec {
    Archetype archetype = Archetype::gable;
    double width = 10.0;   // plan extent along x [m]
    double depth = 8.0;    // plan extent along y [m]
    double eave_height = 3.0;
    double pitch_deg = 30.0;
    double density = 20.0;  // points per m^2
    double sigma = 0.0;     // isotropic noise [m]
    double rotation_deg = 0.0;
    std::uint64_t seed = 1;
};

struct Fixture {
    PointCloud cloud;      // roof samples (building class) + ground ring
    Polygon2 footprint;
    BuildingMesh truth;    // exact model, all mesh invariants hold
    Partition2D truth_partition;  // exact labeled roof partition
    double ground_z = 0.0;
};

// Deterministic synthetic building: samples the upward-facing truth surfaces
// area-uniformly, adds noise, and surrounds the footprint with ground points.
Fixture generate_fixture(const FixtureSpec& spec);

// Closed-form complexity of each archetype's ground-truth model.
struct TruthCounts {
    std::size_t vertices;
    std::size_t facets;
};
TruthCounts truth_counts(Archetype a);

} // namespace lod2rec
