#include "lod2rec/geom.hpp"
#include "lod2rec/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>

namespace lod2rec {

double ring_signed_area(std::span<const Point2> ring) {
    double acc = 0.0;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& p = ring[i];
        const Point2& q = ring[(i + 1) % n];
        acc += p.x * q.y - q.x * p.y;
    }
    return 0.5 * acc;
}

bool ring_contains(std::span<const Point2> ring, Point2 p) {
    // Crossing count; points on the boundary count as inside.
    bool inside = false;
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = ring[j];
        const Point2& b = ring[i];
        if (point_segment_distance(p, a, b) <= eps_geom) return true;
        if ((b.y > p.y) != (a.y > p.y)) {
            double xcross = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
            if (p.x < xcross) inside = !inside;
        }
    }
    return inside;
}

bool ring_is_simple(std::span<const Point2> ring) {
    const std::size_t n = ring.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        Segment2 si{ring[i], ring[(i + 1) % n]};
        if (si.length() < eps_geom) return false;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            Segment2 sj{ring[j], ring[(j + 1) % n]};
            if (segment_intersection_2d(si, sj, 0.0)) return false;
        }
    }
    return true;
}

double Polygon2::signed_area() const { return ring_signed_area(outer); }

double Polygon2::area() const {
    double a = std::abs(ring_signed_area(outer));
    for (const auto& h : holes) a -= std::abs(ring_signed_area(h));
    return a;
}

bool Polygon2::contains(Point2 p) const {
    if (!ring_contains(outer, p)) return false;
    for (const auto& h : holes) {
        // Boundary of a hole still counts as inside the polygon.
        bool on_boundary = false;
        const std::size_t n = h.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            if (point_segment_distance(p, h[j], h[i]) <= eps_geom) { on_boundary = true; break; }
        }
        if (on_boundary) continue;
        if (ring_contains(h, p)) return false;
    }
    return true;
}

Polygon2::Box Polygon2::bbox() const {
    Box b;
    if (outer.empty()) return b;
    b.lo = b.hi = outer.front();
    for (const auto& p : outer) {
        b.lo.x = std::min(b.lo.x, p.x);
        b.lo.y = std::min(b.lo.y, p.y);
        b.hi.x = std::max(b.hi.x, p.x);
        b.hi.y = std::max(b.hi.y, p.y);
    }
    return b;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    Vec2 ab = b - a;
    double len2 = ab.squared_norm();
    if (len2 == 0.0) return (p - a).norm();
    double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

double point_segment_distance3(Point3 p, Point3 a, Point3 b) {
    Vec3 ab = b - a;
    double len2 = ab.squared_norm();
    if (len2 == 0.0) return (p - a).norm();
    double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

double segment_segment_distance3(Point3 a0, Point3 a1, Point3 b0, Point3 b1) {
    // Closest approach of two 3D segments, clamped parametrization.
    Vec3 u = a1 - a0, v = b1 - b0, w = a0 - b0;
    double A = u.dot(u), B = u.dot(v), C = v.dot(v), D = u.dot(w), E = v.dot(w);
    double denom = A * C - B * B;
    double s, t;
    if (denom < 1e-14 * A * C || denom == 0.0) {
        s = 0.0;
        t = (C > 0.0) ? E / C : 0.0;
    } else {
        s = (B * E - C * D) / denom;
        t = (A * E - B * D) / denom;
    }
    s = std::clamp(s, 0.0, 1.0);
    // Recompute t for clamped s, then s for clamped t.
    t = (C > 0.0) ? std::clamp((E + B * s) / C, 0.0, 1.0) : 0.0;
    s = (A > 0.0) ? std::clamp((B * t - D) / A, 0.0, 1.0) : 0.0;
    Vec3 diff = (a0 + u * s) - (b0 + v * t);
    return diff.norm();
}

Plane3 fit_plane(std::span<const Point3> points) {
    if (points.size() < 3) throw DegenerateInput("fit_plane: fewer than 3 points");

    Vec3 c{0, 0, 0};
    for (const auto& p : points) c += p;
    c = c / static_cast<double>(points.size());

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : points) {
        Eigen::Vector3d q(p.x - c.x, p.y - c.y, p.z - c.z);
        cov += q * q.transpose();
    }

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    const auto& evals = es.eigenvalues();  // ascending
    // Collinear input: the two smallest eigenvalues both vanish.
    if (evals[1] <= 1e-12 * std::max(evals[2], 1e-30)) {
        throw DegenerateInput("fit_plane: collinear points");
    }

    Eigen::Vector3d nv = es.eigenvectors().col(0);
    Vec3 n{nv[0], nv[1], nv[2]};
    if (n.z < 0.0) n = -n;
    if (n.z == 0.0) {
        if (n.x < 0.0 || (n.x == 0.0 && n.y < 0.0)) n = -n;
    }
    n = n.normalized();
    return Plane3{n, -n.dot(c)};
}

std::optional<Point2> segment_intersection_2d(const Segment2& s1, const Segment2& s2,
                                              double eps) {
    Vec2 r = s1.b - s1.a;
    Vec2 s = s2.b - s2.a;
    double denom = r.cross(s);
    double len1 = r.norm(), len2 = s.norm();
    if (len1 == 0.0 || len2 == 0.0) return std::nullopt;
    // Near-parallel pairs (collinear overlap included) are not transversal.
    if (std::abs(denom) <= 1e-12 * len1 * len2) return std::nullopt;

    Vec2 qp = s2.a - s1.a;
    double t = qp.cross(s) / denom;
    double u = qp.cross(r) / denom;

    double slack1 = eps / len1;
    double slack2 = eps / len2;
    if (t < -slack1 || t > 1.0 + slack1) return std::nullopt;
    if (u < -slack2 || u > 1.0 + slack2) return std::nullopt;
    return s1.a + r * t;
}

std::optional<double> line_segment_line_param(Point2 p, Vec2 dir, Point2 a, Point2 b) {
    Vec2 s = b - a;
    double denom = dir.cross(s);
    if (std::abs(denom) <= 1e-14 * dir.norm() * s.norm()) return std::nullopt;
    return (a - p).cross(s) / denom;
}

std::vector<std::vector<std::size_t>> walk_directed_loops(
    std::span<const Point2> points,
    std::span<const std::pair<std::size_t, std::size_t>> directed_edges) {
    constexpr double two_pi = 6.283185307179586;
    std::vector<std::vector<std::size_t>> loops;

    // Outgoing edge slots per vertex, in input order for determinism.
    std::vector<std::pair<std::size_t, std::size_t>> sorted(directed_edges.begin(),
                                                            directed_edges.end());
    std::vector<char> consumed(sorted.size(), 0);
    std::vector<std::vector<std::size_t>> out_of(points.size());
    for (std::size_t e = 0; e < sorted.size(); ++e) out_of[sorted[e].first].push_back(e);

    for (std::size_t start = 0; start < sorted.size(); ++start) {
        if (consumed[start]) continue;
        std::vector<std::size_t> loop;
        std::size_t cur = start;
        while (!consumed[cur]) {
            consumed[cur] = 1;
            std::size_t u = sorted[cur].first, v = sorted[cur].second;
            loop.push_back(u);
            Vec2 rev = points[u] - points[v];
            std::size_t best = SIZE_MAX;
            double best_cw = std::numeric_limits<double>::infinity();
            for (std::size_t cand : out_of[v]) {
                if (consumed[cand]) continue;
                Vec2 d = points[sorted[cand].second] - points[v];
                double ccw = std::atan2(rev.cross(d), rev.dot(d));
                double cw = ccw <= 0.0 ? -ccw : two_pi - ccw;
                if (cw == 0.0) cw = two_pi;
                if (cw < best_cw) {
                    best_cw = cw;
                    best = cand;
                }
            }
            if (best == SIZE_MAX) break;
            cur = best;
        }
        if (loop.size() >= 3) loops.push_back(std::move(loop));
    }
    return loops;
}

} // namespace lod2rec
