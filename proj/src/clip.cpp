#include "lod2rec/clip.hpp"
#include "lod2rec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lod2rec {

ConvexPoly clip_halfplane(const ConvexPoly& poly, Point2 a, Point2 b) {
    ConvexPoly out;
    const std::size_t n = poly.size();
    if (n == 0) return out;
    Vec2 dir = b - a;
    auto side = [&](Point2 p) { return dir.cross(p - a); };
    for (std::size_t i = 0; i < n; ++i) {
        Point2 cur = poly[i];
        Point2 nxt = poly[(i + 1) % n];
        double sc = side(cur), sn = side(nxt);
        if (sc >= 0.0) out.push_back(cur);
        if ((sc > 0.0 && sn < 0.0) || (sc < 0.0 && sn > 0.0)) {
            double t = sc / (sc - sn);
            out.push_back(cur + (nxt - cur) * t);
        }
    }
    return out;
}

double convex_area(const ConvexPoly& poly) {
    if (poly.size() < 3) return 0.0;
    return std::abs(ring_signed_area(poly));
}

double triangle_intersection_area(const std::array<Point2, 3>& t1,
                                  const std::array<Point2, 3>& t2) {
    ConvexPoly poly{t1[0], t1[1], t1[2]};
    for (int i = 0; i < 3; ++i) {
        poly = clip_halfplane(poly, t2[i], t2[(i + 1) % 3]);
        if (poly.size() < 3) return 0.0;
    }
    return convex_area(poly);
}

std::vector<ConvexPoly> convex_minus_triangle(const ConvexPoly& poly,
                                              const std::array<Point2, 3>& tri) {
    // Peel off the outside of each edge half-plane in turn; the pieces are
    // disjoint and their union is poly \ tri.
    std::vector<ConvexPoly> pieces;
    ConvexPoly remaining = poly;
    for (int i = 0; i < 3 && remaining.size() >= 3; ++i) {
        Point2 a = tri[i], b = tri[(i + 1) % 3];
        ConvexPoly outside = clip_halfplane(remaining, b, a);  // right of a->b
        if (outside.size() >= 3 && convex_area(outside) > 1e-14) pieces.push_back(outside);
        remaining = clip_halfplane(remaining, a, b);
    }
    return pieces;
}

namespace {

bool point_in_triangle(Point2 p, Point2 a, Point2 b, Point2 c) {
    double d1 = (b - a).cross(p - a);
    double d2 = (c - b).cross(p - b);
    double d3 = (a - c).cross(p - c);
    bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
    bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
    return !(has_neg && has_pos);
}

} // namespace

std::vector<std::array<std::size_t, 3>> ear_clip(std::span<const Point2> ring) {
    std::vector<std::array<std::size_t, 3>> tris;
    std::size_t n = ring.size();
    if (n < 3) return tris;

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    bool ccw = ring_signed_area(ring) > 0.0;

    auto cross_at = [&](std::size_t a, std::size_t b, std::size_t c) {
        double v = (ring[b] - ring[a]).cross(ring[c] - ring[a]);
        return ccw ? v : -v;
    };

    std::size_t guard = 0;
    while (idx.size() > 3 && guard++ < n * n + 16) {
        bool clipped = false;
        std::size_t m = idx.size();
        // First pass: strictly convex ears; fallback pass allows collinear ears.
        for (int pass = 0; pass < 2 && !clipped; ++pass) {
            double convex_floor = pass == 0 ? 1e-14 : -1e-12;
            for (std::size_t i = 0; i < m; ++i) {
                std::size_t ia = idx[(i + m - 1) % m], ib = idx[i], ic = idx[(i + 1) % m];
                double cr = cross_at(ia, ib, ic);
                if (cr <= convex_floor) continue;
                bool ear = true;
                for (std::size_t j = 0; j < m && ear; ++j) {
                    std::size_t v = idx[j];
                    if (v == ia || v == ib || v == ic) continue;
                    // Skip duplicated bridge vertices coincident with a corner.
                    if ((ring[v] - ring[ia]).norm() < 1e-12 ||
                        (ring[v] - ring[ib]).norm() < 1e-12 ||
                        (ring[v] - ring[ic]).norm() < 1e-12)
                        continue;
                    if (point_in_triangle(ring[v], ring[ia], ring[ib], ring[ic])) ear = false;
                }
                if (!ear) continue;
                if (cr > 1e-14) tris.push_back({ia, ib, ic});
                idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(i));
                clipped = true;
                break;
            }
        }
        if (!clipped) {
            // Degenerate remainder; drop the flattest corner and continue.
            std::size_t worst = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < idx.size(); ++i) {
                std::size_t ia = idx[(i + idx.size() - 1) % idx.size()], ib = idx[i],
                            ic = idx[(i + 1) % idx.size()];
                double cr = std::abs(cross_at(ia, ib, ic));
                if (cr < best) { best = cr; worst = i; }
            }
            idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(worst));
        }
    }
    if (idx.size() == 3) {
        if (std::abs(cross_at(idx[0], idx[1], idx[2])) > 1e-14)
            tris.push_back({idx[0], idx[1], idx[2]});
    }
    if (!ccw) {
        for (auto& t : tris) std::swap(t[1], t[2]);
    }
    return tris;
}

namespace {

// Bridge every hole into the outer ring through mutually visible vertices
// (rightmost-hole-vertex strategy), producing one weakly simple ring.
std::vector<std::size_t> bridge_holes(const std::vector<Point2>& pts,
                                      std::vector<std::size_t> outer,
                                      std::vector<std::vector<std::size_t>> holes) {
    // Holes processed by descending max-x.
    std::sort(holes.begin(), holes.end(), [&](const auto& a, const auto& b) {
        double ma = -std::numeric_limits<double>::infinity();
        double mb = ma;
        for (auto i : a) ma = std::max(ma, pts[i].x);
        for (auto i : b) mb = std::max(mb, pts[i].x);
        return ma > mb;
    });

    for (const auto& hole : holes) {
        // Rightmost hole vertex.
        std::size_t hv = hole[0];
        std::size_t hpos = 0;
        for (std::size_t i = 0; i < hole.size(); ++i) {
            if (pts[hole[i]].x > pts[hv].x ||
                (pts[hole[i]].x == pts[hv].x && pts[hole[i]].y < pts[hv].y)) {
                hv = hole[i];
                hpos = i;
            }
        }
        Point2 h = pts[hv];

        // Ray h -> +x; find the nearest crossing of the current ring.
        double best_t = std::numeric_limits<double>::infinity();
        std::size_t best_edge = 0;
        for (std::size_t i = 0; i < outer.size(); ++i) {
            Point2 a = pts[outer[i]];
            Point2 b = pts[outer[(i + 1) % outer.size()]];
            if ((a.y > h.y) == (b.y > h.y)) continue;
            double t = a.x + (h.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (t >= h.x - 1e-12 && t < best_t) {
                best_t = t;
                best_edge = i;
            }
        }

        // Candidate connection vertex: endpoint of the hit edge with larger x,
        // unless a reflex outer vertex hides inside the visibility triangle.
        std::size_t conn_pos = best_edge;
        {
            Point2 a = pts[outer[best_edge]];
            Point2 b = pts[outer[(best_edge + 1) % outer.size()]];
            conn_pos = (a.x > b.x) ? best_edge : (best_edge + 1) % outer.size();
            Point2 m{best_t, h.y};
            Point2 c = pts[outer[conn_pos]];
            double best_metric = std::numeric_limits<double>::infinity();
            std::size_t pick = conn_pos;
            for (std::size_t i = 0; i < outer.size(); ++i) {
                Point2 p = pts[outer[i]];
                if (point_in_triangle(p, h, m, c) && p.x >= h.x) {
                    double metric = std::abs(p.y - h.y) * 1e6 + (p.x - h.x);
                    if (metric < best_metric) {
                        best_metric = metric;
                        pick = i;
                    }
                }
            }
            if (best_metric < std::numeric_limits<double>::infinity()) conn_pos = pick;
        }

        // Splice: outer[0..conn_pos], hole[hpos..], hole[..hpos], conn again.
        std::vector<std::size_t> merged;
        merged.reserve(outer.size() + hole.size() + 2);
        for (std::size_t i = 0; i <= conn_pos; ++i) merged.push_back(outer[i]);
        for (std::size_t i = 0; i <= hole.size(); ++i)
            merged.push_back(hole[(hpos + i) % hole.size()]);
        merged.push_back(outer[conn_pos]);
        for (std::size_t i = conn_pos + 1; i < outer.size(); ++i) merged.push_back(outer[i]);
        outer = std::move(merged);
    }
    return outer;
}

} // namespace

PolyTriangulation triangulate_polygon(const Polygon2& poly) {
    PolyTriangulation out;
    out.points = poly.outer;
    std::vector<std::size_t> outer_idx(poly.outer.size());
    for (std::size_t i = 0; i < outer_idx.size(); ++i) outer_idx[i] = i;

    if (poly.holes.empty()) {
        out.triangles = ear_clip(out.points);
        return out;
    }

    std::vector<std::vector<std::size_t>> hole_idx;
    for (const auto& hole : poly.holes) {
        std::vector<std::size_t> ids;
        // Hole rings are stored clockwise; the bridge walk needs them as-is.
        for (const auto& p : hole) {
            ids.push_back(out.points.size());
            out.points.push_back(p);
        }
        hole_idx.push_back(std::move(ids));
    }

    std::vector<std::size_t> ring = bridge_holes(out.points, outer_idx, hole_idx);
    std::vector<Point2> ring_pts;
    ring_pts.reserve(ring.size());
    for (auto i : ring) ring_pts.push_back(out.points[i]);
    auto tris = ear_clip(ring_pts);
    out.triangles.reserve(tris.size());
    for (const auto& t : tris) out.triangles.push_back({ring[t[0]], ring[t[1]], ring[t[2]]});
    return out;
}

double polygon_intersection_area(const Polygon2& a, const Polygon2& b) {
    auto ba = a.bbox();
    auto bb = b.bbox();
    if (ba.hi.x < bb.lo.x || bb.hi.x < ba.lo.x || ba.hi.y < bb.lo.y || bb.hi.y < ba.lo.y)
        return 0.0;

    auto ta = triangulate_polygon(a);
    auto tb = triangulate_polygon(b);
    double area = 0.0;
    for (const auto& t1 : ta.triangles) {
        std::array<Point2, 3> p1{ta.points[t1[0]], ta.points[t1[1]], ta.points[t1[2]]};
        for (const auto& t2 : tb.triangles) {
            std::array<Point2, 3> p2{tb.points[t2[0]], tb.points[t2[1]], tb.points[t2[2]]};
            area += triangle_intersection_area(p1, p2);
        }
    }
    return area;
}

double polygon_uncovered_area(const Polygon2& a, std::span<const Polygon2> covers) {
    auto ta = triangulate_polygon(a);
    std::vector<ConvexPoly> pieces;
    for (const auto& t : ta.triangles)
        pieces.push_back({ta.points[t[0]], ta.points[t[1]], ta.points[t[2]]});

    for (const auto& cover : covers) {
        if (pieces.empty()) break;
        auto tc = triangulate_polygon(cover);
        for (const auto& t : tc.triangles) {
            std::array<Point2, 3> tri{tc.points[t[0]], tc.points[t[1]], tc.points[t[2]]};
            if (ring_signed_area(std::span<const Point2>(tri.data(), 3)) < 0.0)
                std::swap(tri[1], tri[2]);
            std::vector<ConvexPoly> next;
            next.reserve(pieces.size());
            for (const auto& piece : pieces) {
                auto rest = convex_minus_triangle(piece, tri);
                for (auto& r : rest) next.push_back(std::move(r));
            }
            pieces = std::move(next);
        }
    }

    double area = 0.0;
    for (const auto& piece : pieces) area += convex_area(piece);
    return area;
}

} // namespace lod2rec
