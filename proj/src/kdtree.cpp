#include "lod2rec/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace lod2rec {

namespace {
constexpr std::uint32_t kLeafSize = 16;

double axis_coord(const Point3& p, int axis) {
    return axis == 0 ? p.x : (axis == 1 ? p.y : p.z);
}
} // namespace

KdTree3::KdTree3(std::vector<Point3> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!points_.empty()) build(0, static_cast<std::uint32_t>(points_.size()), 0);
}

std::int32_t KdTree3::build(std::uint32_t begin, std::uint32_t end, int depth) {
    Node node;
    if (end - begin <= kLeafSize) {
        node.begin = begin;
        node.end = end;
        // Ascending-index leaves keep query results deterministic.
        std::sort(order_.begin() + begin, order_.begin() + end);
        nodes_.push_back(node);
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    // Split the widest axis at the median.
    Point3 lo = points_[order_[begin]], hi = lo;
    for (std::uint32_t i = begin; i < end; ++i) {
        const Point3& p = points_[order_[i]];
        lo.x = std::min(lo.x, p.x); hi.x = std::max(hi.x, p.x);
        lo.y = std::min(lo.y, p.y); hi.y = std::max(hi.y, p.y);
        lo.z = std::min(lo.z, p.z); hi.z = std::max(hi.z, p.z);
    }
    Vec3 extent = hi - lo;
    int axis = 0;
    if (extent.y > extent.x) axis = 1;
    if (extent.z > axis_coord(extent, axis)) axis = 2;

    std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         double ca = axis_coord(points_[a], axis);
                         double cb = axis_coord(points_[b], axis);
                         return ca < cb || (ca == cb && a < b);
                     });

    node.axis = axis;
    node.split = axis_coord(points_[order_[mid]], axis);
    std::int32_t self = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);
    std::int32_t left = build(begin, mid, depth + 1);
    std::int32_t right = build(mid, end, depth + 1);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
}

template <typename Visit>
void KdTree3::search(std::int32_t idx, Point3 q, double& bound, Visit&& visit) const {
    const Node& node = nodes_[idx];
    if (node.axis < 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) visit(order_[i]);
        return;
    }
    double delta = axis_coord(q, node.axis) - node.split;
    std::int32_t near = delta <= 0.0 ? node.left : node.right;
    std::int32_t far = delta <= 0.0 ? node.right : node.left;
    search(near, q, bound, visit);
    if (delta * delta <= bound) search(far, q, bound, visit);
}

std::size_t KdTree3::nearest(Point3 q) const {
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    search(0, q, best_d2, [&](std::uint32_t i) {
        double d2 = (points_[i] - q).squared_norm();
        if (d2 < best_d2 || (d2 == best_d2 && i < best)) {
            best_d2 = d2;
            best = i;
        }
    });
    return best;
}

double KdTree3::nearest_distance(Point3 q) const {
    return (points_[nearest(q)] - q).norm();
}

std::vector<std::size_t> KdTree3::knn(Point3 q, std::size_t k) const {
    if (points_.empty() || k == 0) return {};
    k = std::min(k, points_.size());

    using Entry = std::pair<double, std::uint32_t>;  // (distance^2, index)
    std::priority_queue<Entry> heap;                 // max-heap on distance
    double bound = std::numeric_limits<double>::infinity();
    search(0, q, bound, [&](std::uint32_t i) {
        double d2 = (points_[i] - q).squared_norm();
        if (heap.size() < k) {
            heap.emplace(d2, i);
        } else if (d2 < heap.top().first ||
                   (d2 == heap.top().first && i < heap.top().second)) {
            heap.pop();
            heap.emplace(d2, i);
        }
        if (heap.size() == k) bound = heap.top().first;
    });

    std::vector<Entry> entries;
    entries.reserve(heap.size());
    while (!heap.empty()) {
        entries.push_back(heap.top());
        heap.pop();
    }
    std::sort(entries.begin(), entries.end());
    std::vector<std::size_t> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.second);
    return out;
}

std::vector<std::size_t> KdTree3::radius(Point3 q, double r) const {
    std::vector<std::size_t> out;
    if (points_.empty()) return out;
    double bound = r * r;
    search(0, q, bound, [&](std::uint32_t i) {
        if ((points_[i] - q).squared_norm() <= r * r) out.push_back(i);
    });
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace lod2rec
