#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace lod2rec {

// One global length tolerance for point identity and incidence tests.
// Modeling thresholds (tau_h, tau_v, ...) are separate user parameters.
inline constexpr double eps_geom = 1e-6;

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    bool operator==(const Vec2&) const = default;

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
    Vec2 normalized() const { double n = norm(); return {x / n, y / n}; }
    Vec2 perp() const { return {-y, x}; }  // 90 degrees counter-clockwise
};

using Point2 = Vec2;

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(Vec3 o) { x += o.x; y += o.y; z += o.z; return *this; }
    bool operator==(const Vec3&) const = default;

    double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(Vec3 o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    double squared_norm() const { return x * x + y * y + z * z; }
    Vec3 normalized() const { double n = norm(); return {x / n, y / n, z / n}; }
    Vec2 xy() const { return {x, y}; }
};

using Point3 = Vec3;

// Plane in normal form n.p + d = 0 with ||n|| = 1. Non-vertical planes also
// admit the height form z = a x + b y + c used by all extrusion algebra.
struct Plane3 {
    Vec3 n{0, 0, 1};
    double d = 0.0;

    static constexpr double vertical_floor = 0.1;  // |n_z| below this counts as vertical

    bool non_vertical() const { return std::abs(n.z) > vertical_floor; }

    double signed_distance(Point3 p) const { return n.dot(p) + d; }
    double distance(Point3 p) const { return std::abs(signed_distance(p)); }

    // Height form; valid only for non-vertical planes.
    double height_a() const { return -n.x / n.z; }
    double height_b() const { return -n.y / n.z; }
    double height_c() const { return -d / n.z; }
    double height_at(Point2 p) const { return height_a() * p.x + height_b() * p.y + height_c(); }

    static Plane3 from_height_form(double a, double b, double c) {
        Vec3 n{-a, -b, 1.0};
        double len = n.norm();
        return {n / len, -c / len};
    }
};

enum class SegmentKind : std::uint8_t { intersection, discontinuity, footprint };

struct Segment2 {
    Point2 a, b;
    SegmentKind kind = SegmentKind::intersection;

    double length() const { return (b - a).norm(); }
    Vec2 direction() const { return (b - a).normalized(); }
    Point2 midpoint() const { return (a + b) * 0.5; }
};

struct Segment3 {
    Point3 a, b;
    SegmentKind kind = SegmentKind::intersection;

    double length() const { return (b - a).norm(); }
    Segment2 to_plan() const { return {a.xy(), b.xy(), kind}; }
};

// Simple polygon with optional holes. Outer ring counter-clockwise,
// holes clockwise, all rings simple.
struct Polygon2 {
    std::vector<Point2> outer;
    std::vector<std::vector<Point2>> holes;

    double area() const;        // outer minus holes
    double signed_area() const; // outer ring only, sign included
    bool contains(Point2 p) const;
    struct Box {
        Point2 lo{0, 0}, hi{0, 0};
    };
    Box bbox() const;
};

double ring_signed_area(std::span<const Point2> ring);
bool ring_contains(std::span<const Point2> ring, Point2 p);
bool ring_is_simple(std::span<const Point2> ring);

double point_segment_distance(Point2 p, Point2 a, Point2 b);
double point_segment_distance3(Point3 p, Point3 a, Point3 b);
double segment_segment_distance3(Point3 a0, Point3 a1, Point3 b0, Point3 b1);

// Total-least-squares plane through >= 3 non-collinear points.
// Normal oriented with n_z >= 0 when |n_z| > 0.
// Throws DegenerateInput otherwise.
Plane3 fit_plane(std::span<const Point3> points);

// Transversal intersection of two open segments within tolerance eps.
// Collinear overlaps return nothing; the caller's collinearity merge owns those.
std::optional<Point2> segment_intersection_2d(const Segment2& s1, const Segment2& s2,
                                              double eps = eps_geom);

// Intersection of a parametric line p + t*dir with the line through a segment.
// Returns the parameter t, or nothing for (near-)parallel configurations.
std::optional<double> line_segment_line_param(Point2 p, Vec2 dir, Point2 a, Point2 b);

// Assemble directed edges (tail, head) into closed loops. Edges must have the
// enclosed region on their left; at a pinch vertex the walk continues with the
// first edge clockwise from the reversed incoming direction, which keeps the
// region on the left through the pinch.
std::vector<std::vector<std::size_t>> walk_directed_loops(
    std::span<const Point2> points,
    std::span<const std::pair<std::size_t, std::size_t>> directed_edges);

} // namespace lod2rec
