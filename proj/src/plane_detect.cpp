#include "lod2rec/plane_detect.hpp"

#include "lod2rec/delaunay.hpp"
#include "lod2rec/errors.hpp"
#include "lod2rec/kdtree.hpp"
#include "lod2rec/line_extract.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace lod2rec {

PlaneFrame make_plane_frame(const Plane3& plane, Point3 on_plane) {
    Vec3 n = plane.n;
    // Seed axis least aligned with the normal keeps the basis stable.
    Vec3 seed{1, 0, 0};
    double ax = std::abs(n.x), ay = std::abs(n.y), az = std::abs(n.z);
    if (ay <= ax && ay <= az) seed = {0, 1, 0};
    else if (az <= ax && az <= ay) seed = {0, 0, 1};
    Vec3 u = (seed - n * n.dot(seed)).normalized();
    Vec3 v = n.cross(u);
    Point3 origin = on_plane - n * plane.signed_distance(on_plane);
    return {origin, u, v, n};
}

double estimate_density(const PointCloud& cloud, std::size_t knn) {
    if (cloud.points.size() < knn + 1) return 1.0;
    KdTree3 tree(cloud.points);
    std::vector<double> densities;
    // Sample at most 512 points; density only tunes the default alpha.
    std::size_t stride = std::max<std::size_t>(1, cloud.points.size() / 512);
    for (std::size_t i = 0; i < cloud.points.size(); i += stride) {
        auto nb = tree.knn(cloud.points[i], knn + 1);
        double r = (cloud.points[nb.back()] - cloud.points[i]).norm();
        if (r > 0.0) densities.push_back(static_cast<double>(knn) / (3.141592653589793 * r * r));
    }
    if (densities.empty()) return 1.0;
    std::nth_element(densities.begin(), densities.begin() + densities.size() / 2,
                     densities.end());
    return densities[densities.size() / 2];
}

namespace {

struct NeighborhoodInfo {
    Vec3 normal{0, 0, 1};
    double planarity = 1.0;  // smallest eigenvalue ratio; lower is flatter
    bool valid = false;
};

NeighborhoodInfo local_pca(const std::vector<Point3>& pts, const std::vector<std::size_t>& nb) {
    NeighborhoodInfo info;
    if (nb.size() < 3) return info;
    std::vector<Point3> local;
    local.reserve(nb.size());
    for (auto j : nb) local.push_back(pts[j]);
    try {
        Plane3 p = fit_plane(local);
        info.normal = p.n;
        info.valid = true;
    } catch (const DegenerateInput&) {
        return info;
    }
    // Planarity score from the covariance eigenvalues.
    Point3 c{0, 0, 0};
    for (const auto& p : local) c += p;
    c = c / static_cast<double>(local.size());
    double sum_d2 = 0.0, sum_all = 0.0;
    for (const auto& p : local) {
        double d = (p - c).dot(info.normal);
        sum_d2 += d * d;
        sum_all += (p - c).squared_norm();
    }
    info.planarity = sum_all > 0.0 ? sum_d2 / sum_all : 1.0;
    return info;
}

} // namespace

namespace {

// Replace the noisy alpha boundary by fitted support lines: simplification
// breakpoints delimit straight runs, each run gets a least-squares line, and
// consecutive lines intersect into corners. This both straightens sampling
// noise and restores the corners that the alpha probe radius chamfers off.
std::vector<Point2> fit_ring_lines(const std::vector<Point2>& raw, double tol) {
    const std::size_t n = raw.size();
    if (n < 4) return raw;

    auto simplified = simplify_ring(raw, tol);
    if (simplified.size() < 3) return raw;

    // Map simplified vertices back to raw indices.
    std::vector<std::size_t> breaks;
    for (const auto& sp : simplified) {
        for (std::size_t i = 0; i < n; ++i) {
            if ((raw[i] - sp).norm() < 1e-12) {
                breaks.push_back(i);
                break;
            }
        }
    }
    if (breaks.size() != simplified.size() || breaks.size() < 3) return simplified;

    struct Line {
        Point2 p;
        Vec2 dir;
    };
    std::vector<Line> lines;
    const std::size_t m = breaks.size();
    for (std::size_t k = 0; k < m; ++k) {
        std::size_t i0 = breaks[k], i1 = breaks[(k + 1) % m];
        std::vector<Point2> run;
        for (std::size_t i = i0;; i = (i + 1) % n) {
            run.push_back(raw[i]);
            if (i == i1) break;
        }
        Point2 c{0, 0};
        for (const auto& q : run) c += q;
        c = c / static_cast<double>(run.size());
        double sxx = 0, sxy = 0, syy = 0;
        for (const auto& q : run) {
            Vec2 d = q - c;
            sxx += d.x * d.x;
            sxy += d.x * d.y;
            syy += d.y * d.y;
        }
        // Principal direction of the 2x2 scatter.
        double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
        Vec2 dir{std::cos(theta), std::sin(theta)};
        if (run.size() < 3) dir = (raw[i1] - raw[i0]).normalized();
        if (dir.dot(raw[i1] - raw[i0]) < 0.0) dir = -dir;
        lines.push_back({c, dir});
    }

    std::vector<Point2> out(m);
    for (std::size_t k = 0; k < m; ++k) {
        const Line& prev = lines[(k + m - 1) % m];
        const Line& cur = lines[k];
        Point2 joint = raw[breaks[k]];
        double denom = prev.dir.cross(cur.dir);
        if (std::abs(denom) > 0.17) {  // > ~10 deg between support lines
            double t = (cur.p - prev.p).cross(cur.dir) / denom;
            Point2 corner = prev.p + prev.dir * t;
            if ((corner - joint).norm() < 5.0 * tol) joint = corner;
        } else {
            // Near-collinear runs: project the joint onto the bisecting line.
            Vec2 dir = (prev.dir + cur.dir).normalized();
            Point2 base = (prev.p + cur.p) * 0.5;
            joint = base + dir * (joint - base).dot(dir);
        }
        out[k] = joint;
    }
    // Guard against degenerate output.
    double raw_area = std::abs(ring_signed_area(raw));
    double new_area = std::abs(ring_signed_area(out));
    if (out.size() < 3 || new_area < 0.5 * raw_area) return simplified;
    return out;
}

Polygon2 refine_contour(const Polygon2& raw, double simplify_tol) {
    Polygon2 out;
    out.outer = fit_ring_lines(raw.outer, simplify_tol);
    for (const auto& hole : raw.holes) {
        auto ring = fit_ring_lines(hole, simplify_tol);
        if (ring.size() >= 3) out.holes.push_back(std::move(ring));
    }
    return out;
}

} // namespace

Polygon2 alpha_contour(std::span<const Point3> primitive_points, const Plane3& plane,
                       double alpha, PlaneFrame* frame_out) {
    if (primitive_points.size() < 3)
        throw DegenerateInput("alpha_contour: fewer than 3 points");

    Point3 centroid{0, 0, 0};
    for (const auto& p : primitive_points) centroid += p;
    centroid = centroid / static_cast<double>(primitive_points.size());
    PlaneFrame frame = make_plane_frame(plane, centroid);
    if (frame_out) *frame_out = frame;

    std::vector<Point2> proj;
    proj.reserve(primitive_points.size());
    for (const auto& p : primitive_points) proj.push_back(frame.to_plane(p));

    auto boundary = alpha_shape_boundary(proj, alpha);
    if (boundary.outer.size() < 3) {
        // Either collinear projections or alpha too small for any triangle.
        // Retry once with a hull-sized alpha to separate the two cases.
        Point2 lo = proj[0], hi = proj[0];
        for (const auto& q : proj) {
            lo.x = std::min(lo.x, q.x); lo.y = std::min(lo.y, q.y);
            hi.x = std::max(hi.x, q.x); hi.y = std::max(hi.y, q.y);
        }
        double big = (hi - lo).squared_norm();
        boundary = alpha_shape_boundary(proj, std::max(big, 1.0));
        if (boundary.outer.size() < 3)
            throw DegenerateInput("alpha_contour: collinear projections");
    }

    Polygon2 poly;
    poly.outer.reserve(boundary.outer.size());
    for (auto i : boundary.outer) poly.outer.push_back(proj[i]);
    if (ring_signed_area(poly.outer) < 0.0)
        std::reverse(poly.outer.begin(), poly.outer.end());
    // Ring-shaped roof sections keep their holes; coverage terms need them.
    for (const auto& hole : boundary.holes) {
        if (hole.size() < 3) continue;
        std::vector<Point2> ring;
        ring.reserve(hole.size());
        for (auto i : hole) ring.push_back(proj[i]);
        if (std::abs(ring_signed_area(ring)) < 4.0 * alpha) continue;  // sampling gaps
        if (ring_signed_area(ring) > 0.0) std::reverse(ring.begin(), ring.end());
        poly.holes.push_back(std::move(ring));
    }
    return poly;
}

std::vector<PlanarPrimitive> detect_planes(const PointCloud& cloud,
                                           const DetectionParams& params) {
    // Work on building-classified points when a classification is present.
    std::vector<std::size_t> used;
    if (cloud.has_classes()) {
        for (std::size_t i = 0; i < cloud.size(); ++i)
            if (cloud.classes[i] == kClassBuilding) used.push_back(i);
        if (used.empty()) {
            used.resize(cloud.size());
            std::iota(used.begin(), used.end(), 0u);
        }
    } else {
        used.resize(cloud.size());
        std::iota(used.begin(), used.end(), 0u);
    }

    if (used.size() < params.min_inliers)
        throw NoPlanesFound("detect_planes: not enough candidate points");

    std::vector<Point3> pts;
    pts.reserve(used.size());
    for (auto i : used) pts.push_back(cloud.points[i]);
    KdTree3 tree(pts);

    const std::size_t n = pts.size();
    const std::size_t k = std::min(params.knn, n - 1);
    std::vector<std::vector<std::size_t>> neighbors(n);
    std::vector<NeighborhoodInfo> info(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto nb = tree.knn(pts[i], k + 1);  // includes the point itself
        neighbors[i] = nb;
        info[i] = local_pca(pts, nb);
    }

    std::vector<std::size_t> seeds(n);
    std::iota(seeds.begin(), seeds.end(), 0u);
    std::sort(seeds.begin(), seeds.end(), [&](std::size_t a, std::size_t b) {
        if (info[a].planarity != info[b].planarity)
            return info[a].planarity < info[b].planarity;
        return a < b;
    });

    const double cos_tol = std::cos(params.normal_angle_tol_deg * 3.141592653589793 / 180.0);
    std::vector<char> assigned(n, 0);
    std::vector<char> seed_spent(n, 0);

    struct Region {
        Plane3 plane;
        std::vector<std::size_t> members;  // indices into pts
    };
    std::vector<Region> regions;

    for (std::size_t seed : seeds) {
        if (assigned[seed] || seed_spent[seed] || !info[seed].valid) continue;

        std::vector<Point3> seed_local;
        for (auto j : neighbors[seed]) seed_local.push_back(pts[j]);
        Plane3 plane;
        try {
            plane = fit_plane(seed_local);
        } catch (const DegenerateInput&) {
            seed_spent[seed] = 1;
            continue;
        }

        std::vector<std::size_t> members;
        std::vector<char> in_region(n, 0);
        std::deque<std::size_t> queue;
        queue.push_back(seed);
        in_region[seed] = 1;
        std::size_t since_refit = 0;

        while (!queue.empty()) {
            std::size_t p = queue.front();
            queue.pop_front();
            members.push_back(p);
            if (++since_refit >= 50) {
                std::vector<Point3> mem_pts;
                mem_pts.reserve(members.size());
                for (auto m : members) mem_pts.push_back(pts[m]);
                try {
                    plane = fit_plane(mem_pts);
                } catch (const DegenerateInput&) {
                }
                since_refit = 0;
            }
            for (auto q : neighbors[p]) {
                if (in_region[q] || assigned[q] || !info[q].valid) continue;
                if (plane.distance(pts[q]) > params.fitting_tolerance) continue;
                if (std::abs(info[q].normal.dot(plane.n)) < cos_tol) continue;
                in_region[q] = 1;
                queue.push_back(q);
            }
        }

        seed_spent[seed] = 1;
        if (members.size() < params.min_inliers) continue;

        std::vector<Point3> mem_pts;
        mem_pts.reserve(members.size());
        for (auto m : members) mem_pts.push_back(pts[m]);
        Plane3 final_plane;
        try {
            final_plane = fit_plane(mem_pts);
        } catch (const DegenerateInput&) {
            continue;
        }
        // The extrusion model is 2.5D; near-vertical sheets become
        // discontinuity walls instead.
        if (std::abs(final_plane.n.z) < Plane3::vertical_floor) {
            for (auto m : members) seed_spent[m] = 1;
            continue;
        }
        // Drop members pushed outside the tolerance by refits.
        std::vector<std::size_t> kept;
        for (auto m : members)
            if (final_plane.distance(pts[m]) <= params.fitting_tolerance) kept.push_back(m);
        if (kept.size() < params.min_inliers) continue;

        for (auto m : kept) assigned[m] = 1;
        std::sort(kept.begin(), kept.end());
        regions.push_back({final_plane, std::move(kept)});
    }

    if (regions.empty()) throw NoPlanesFound("detect_planes: no region reached min_inliers");

    std::sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
        if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
        return a.members.front() < b.members.front();
    });

    double alpha = params.alpha;
    if (alpha <= 0.0) {
        double density = estimate_density(cloud, std::min<std::size_t>(params.knn, 12));
        alpha = 4.0 / std::max(density, 1e-6);
    }

    std::vector<PlanarPrimitive> out;
    int next_id = 1;
    for (auto& region : regions) {
        PlanarPrimitive prim;
        prim.plane = region.plane;
        std::vector<Point3> mem_pts;
        mem_pts.reserve(region.members.size());
        for (auto m : region.members) mem_pts.push_back(pts[m]);
        try {
            prim.contour = alpha_contour(mem_pts, prim.plane, alpha, &prim.frame);
        } catch (const DegenerateInput&) {
            continue;
        }
        // Simplified, corner-recovered contour; the raw alpha boundary is
        // noisy at point-spacing scale and chamfers every corner.
        prim.contour = refine_contour(prim.contour, 0.25);
        if (prim.contour.outer.size() < 3 || prim.contour.area() <= 0.0) continue;

        prim.plan_contour.outer.reserve(prim.contour.outer.size());
        for (const auto& q : prim.contour.outer)
            prim.plan_contour.outer.push_back(prim.frame.to_world(q).xy());
        if (ring_signed_area(prim.plan_contour.outer) < 0.0)
            std::reverse(prim.plan_contour.outer.begin(), prim.plan_contour.outer.end());
        for (const auto& hole : prim.contour.holes) {
            std::vector<Point2> plan_hole;
            plan_hole.reserve(hole.size());
            for (const auto& q : hole) plan_hole.push_back(prim.frame.to_world(q).xy());
            if (ring_signed_area(plan_hole) > 0.0)
                std::reverse(plan_hole.begin(), plan_hole.end());
            prim.plan_contour.holes.push_back(std::move(plan_hole));
        }

        prim.inliers.reserve(region.members.size());
        for (auto m : region.members) prim.inliers.push_back(used[m]);
        prim.id = next_id++;
        out.push_back(std::move(prim));
    }

    if (out.empty()) throw NoPlanesFound("detect_planes: all regions degenerate");
    return out;
}

} // namespace lod2rec
