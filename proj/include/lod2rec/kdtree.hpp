#pragma once

#include "lod2rec/geom.hpp"

#include <cstddef>
#include <vector>

namespace lod2rec {

// Static kd-tree over 3D points. Built once, queried many times.
// Nearest-neighbor queries are exact (branch-and-bound, no approximation).
class KdTree3 {
public:
    KdTree3() = default;
    explicit KdTree3(std::vector<Point3> points);

    std::size_t size() const { return points_.size(); }
    const Point3& point(std::size_t i) const { return points_[i]; }

    // Index of the exact nearest neighbor; points_ must be non-empty.
    std::size_t nearest(Point3 q) const;
    double nearest_distance(Point3 q) const;

    // Indices of the k nearest neighbors, nearest first (ties by index).
    std::vector<std::size_t> knn(Point3 q, std::size_t k) const;

    // All indices within radius r of q (unsorted by distance; ascending index).
    std::vector<std::size_t> radius(Point3 q, double r) const;

private:
    struct Node {
        int axis = -1;              // -1 marks a leaf
        double split = 0.0;
        std::uint32_t begin = 0, end = 0;  // leaf range into order_
        std::int32_t left = -1, right = -1;
    };

    std::vector<Point3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;

    std::int32_t build(std::uint32_t begin, std::uint32_t end, int depth);

    template <typename Visit>
    void search(std::int32_t node, Point3 q, double& bound, Visit&& visit) const;
};

} // namespace lod2rec
