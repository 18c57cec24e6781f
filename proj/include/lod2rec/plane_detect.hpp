#pragma once

#include "lod2rec/geom.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace lod2rec {

// LAS-style classification codes; only these two matter here.
inline constexpr std::uint8_t kClassGround = 2;
inline constexpr std::uint8_t kClassBuilding = 6;

struct PointCloud {
    std::vector<Point3> points;
    std::vector<std::uint8_t> classes;  // empty, or one code per point

    bool has_classes() const { return classes.size() == points.size() && !classes.empty(); }
    std::size_t size() const { return points.size(); }
};

struct DetectionParams {
    double fitting_tolerance = 0.05;  // max inlier-to-plane distance [m]
    std::size_t min_inliers = 30;
    double normal_angle_tol_deg = 30.0;
    std::size_t knn = 16;
    double alpha = 0.0;  // alpha-shape parameter [m^2]; <= 0 means auto (4 / density)
};

// Orthonormal in-plane coordinate frame.
struct PlaneFrame {
    Point3 origin;
    Vec3 u, v, n;

    Point2 to_plane(Point3 p) const {
        Vec3 d = p - origin;
        return {d.dot(u), d.dot(v)};
    }
    Point3 to_world(Point2 q) const { return origin + u * q.x + v * q.y; }
};

PlaneFrame make_plane_frame(const Plane3& plane, Point3 on_plane);

struct PlanarPrimitive {
    int id = 0;  // 1..M, by descending inlier count
    Plane3 plane;
    std::vector<std::size_t> inliers;  // indices into the source cloud
    Polygon2 contour;                  // in-plane coordinates, outer ring only
    PlaneFrame frame;
    Polygon2 plan_contour;             // contour projected to the xy plane
    // Cached per-contour-edge mean heights of nearby points on each side;
    // filled by the discontinuity extraction.
    std::vector<std::pair<double, double>> mean_height_samples;
};

// Region-growing plane detection. Deterministic: seeds ordered by neighborhood
// planarity, ties broken by point index. Throws NoPlanesFound when no region
// reaches min_inliers.
std::vector<PlanarPrimitive> detect_planes(const PointCloud& cloud,
                                           const DetectionParams& params);

// 2D alpha-shape contour of points projected into `plane`. Returned polygon is
// in-plane; vertices are a subset of the projected inputs. Throws
// DegenerateInput when projections are collinear.
Polygon2 alpha_contour(std::span<const Point3> primitive_points, const Plane3& plane,
                       double alpha, PlaneFrame* frame_out = nullptr);

// Median point density [pts/m^2] estimated from k-th neighbor distances.
double estimate_density(const PointCloud& cloud, std::size_t knn);

} // namespace lod2rec
