#pragma once

#include "lod2rec/partition.hpp"
#include "lod2rec/regularize.hpp"

#include <string>

namespace lod2rec {

// Cells filled by label color, edges stroked; for eyeballing partitions.
void write_partition_svg(const Partition2D& partition, const std::string& path);

// Before/after vertex layouts with the regularity links drawn
// (green = parallel, purple = orthogonal).
void write_regularity_svg(const Partition2D& before, const Partition2D& after,
                          const RegularityGraph& graph, const std::vector<int>* edge_map,
                          const std::string& path);

} // namespace lod2rec
