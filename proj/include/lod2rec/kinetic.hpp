#pragma once

#include "lod2rec/partition.hpp"

#include <cstddef>
#include <limits>

namespace lod2rec {

struct KineticParams {
    // Number of segments an extending tip may cross before it freezes at the
    // next hit; K=0 freezes at the first hit.
    std::size_t max_extensions = 1;
    bool unbounded = false;  // K = infinity: every supporting line spans the bbox
    double bbox_margin = 1.0;
};

// Grow the soup segments along their supporting lines at unit speed until
// collision events freeze the tips, then build the induced cell complex.
// Footprint segments are static barriers. Deterministic: events are processed
// in (time, segment, tip) order.
Partition2D build_partition(const SegmentSoup2& soup, Rect bbox, const KineticParams& params);

// Final extent of each soup segment after the kinetic simulation, before the
// arrangement is assembled. Exposed for the reference-simulator oracle.
std::vector<Segment2> simulate_extents(const SegmentSoup2& soup, Rect bbox,
                                       const KineticParams& params);

} // namespace lod2rec
