#include "lod2rec/line_extract.hpp"

#include "lod2rec/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lod2rec {

namespace {

constexpr double kPi = 3.141592653589793;

std::vector<Point3> contour_world_points(const PlanarPrimitive& prim) {
    std::vector<Point3> out;
    out.reserve(prim.contour.outer.size());
    for (const auto& q : prim.contour.outer) out.push_back(prim.frame.to_world(q));
    return out;
}

double contour_distance_3d(const std::vector<Point3>& a, const std::vector<Point3>& b) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) {
        Point3 a0 = a[i], a1 = a[(i + 1) % a.size()];
        for (std::size_t j = 0; j < b.size(); ++j) {
            Point3 b0 = b[j], b1 = b[(j + 1) % b.size()];
            best = std::min(best, segment_segment_distance3(a0, a1, b0, b1));
        }
    }
    return best;
}

struct Interval {
    double lo, hi;
};

void push_interval(std::vector<Interval>& acc, double lo, double hi) {
    if (hi > lo) acc.push_back({lo, hi});
}

// t-intervals where |L(t) - p| <= d, L(t) = o + t*dir with unit dir.
void ball_interval(std::vector<Interval>& acc, Point3 o, Vec3 dir, Point3 p, double d) {
    Vec3 w = p - o;
    double proj = w.dot(dir);
    double disc = d * d - (w.squared_norm() - proj * proj);
    if (disc < 0.0) return;
    double s = std::sqrt(disc);
    push_interval(acc, proj - s, proj + s);
}

// t-intervals where the distance from L(t) to segment [p,q] is <= d.
void segment_band_interval(std::vector<Interval>& acc, Point3 o, Vec3 dir, Point3 p, Point3 q,
                           double d) {
    ball_interval(acc, o, dir, p, d);
    ball_interval(acc, o, dir, q, d);

    Vec3 e = q - p;
    double elen2 = e.squared_norm();
    if (elen2 <= 0.0) return;

    // Distance^2 to the infinite line of [p,q] is quadratic in t.
    // w(t) = o + t*dir - p ;  f(t) = |w|^2 - (w.e)^2/|e|^2 <= d^2
    Vec3 w0 = o - p;
    double a = 1.0 - dir.dot(e) * dir.dot(e) / elen2;
    double b = 2.0 * (w0.dot(dir) - w0.dot(e) * dir.dot(e) / elen2);
    double c = w0.squared_norm() - w0.dot(e) * w0.dot(e) / elen2 - d * d;
    double t_lo, t_hi;
    if (a < 1e-14) {
        if (c > 0.0) return;  // parallel and too far
        t_lo = -std::numeric_limits<double>::infinity();
        t_hi = std::numeric_limits<double>::infinity();
    } else {
        double disc = b * b - 4.0 * a * c;
        if (disc < 0.0) return;
        double s = std::sqrt(disc);
        t_lo = (-b - s) / (2.0 * a);
        t_hi = (-b + s) / (2.0 * a);
    }

    // Restrict to parameters whose foot point lies inside the segment.
    double u0 = w0.dot(e) / elen2;
    double du = dir.dot(e) / elen2;
    if (std::abs(du) < 1e-14) {
        if (u0 < 0.0 || u0 > 1.0) return;
    } else {
        double ua = (0.0 - u0) / du;
        double ub = (1.0 - u0) / du;
        if (ua > ub) std::swap(ua, ub);
        t_lo = std::max(t_lo, ua);
        t_hi = std::min(t_hi, ub);
    }
    push_interval(acc, t_lo, t_hi);
}

std::vector<Interval> merge_intervals(std::vector<Interval> v) {
    if (v.empty()) return v;
    std::sort(v.begin(), v.end(), [](Interval a, Interval b) { return a.lo < b.lo; });
    std::vector<Interval> out{v[0]};
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i].lo <= out.back().hi + eps_geom) out.back().hi = std::max(out.back().hi, v[i].hi);
        else out.push_back(v[i]);
    }
    return out;
}

} // namespace

std::vector<Segment3> intersection_lines(std::span<const PlanarPrimitive> primitives,
                                         double adjacency_dist) {
    std::vector<Segment3> out;
    std::vector<std::vector<Point3>> world;
    world.reserve(primitives.size());
    for (const auto& p : primitives) world.push_back(contour_world_points(p));

    for (std::size_t i = 0; i < primitives.size(); ++i) {
        for (std::size_t j = i + 1; j < primitives.size(); ++j) {
            Vec3 dir = primitives[i].plane.n.cross(primitives[j].plane.n);
            double dlen = dir.norm();
            if (dlen < 1e-8) continue;  // parallel pair
            dir = dir / dlen;

            if (contour_distance_3d(world[i], world[j]) > adjacency_dist) continue;

            // Point on the intersection line: solve both plane equations plus
            // a minimal-norm gauge along the line direction.
            Eigen::Matrix3d A;
            const Vec3 &ni = primitives[i].plane.n, &nj = primitives[j].plane.n;
            A << ni.x, ni.y, ni.z, nj.x, nj.y, nj.z, dir.x, dir.y, dir.z;
            Eigen::Vector3d rhs(-primitives[i].plane.d, -primitives[j].plane.d, 0.0);
            Eigen::Vector3d sol = A.fullPivLu().solve(rhs);
            Point3 origin{sol[0], sol[1], sol[2]};

            std::vector<Interval> iv;
            for (std::size_t e = 0; e < world[i].size(); ++e)
                segment_band_interval(iv, origin, dir, world[i][e],
                                      world[i][(e + 1) % world[i].size()], adjacency_dist);
            for (std::size_t e = 0; e < world[j].size(); ++e)
                segment_band_interval(iv, origin, dir, world[j][e],
                                      world[j][(e + 1) % world[j].size()], adjacency_dist);
            auto merged = merge_intervals(std::move(iv));
            if (merged.empty()) continue;
            double lo = merged.front().lo, hi = merged.back().hi;
            if (hi - lo < eps_geom) continue;

            Segment3 seg{origin + dir * lo, origin + dir * hi, SegmentKind::intersection};
            out.push_back(seg);
        }
    }
    return out;
}

std::vector<Point2> simplify_polyline(std::span<const Point2> pts, double tol) {
    if (pts.size() <= 2) return {pts.begin(), pts.end()};
    double worst = -1.0;
    std::size_t split = 0;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        double d = point_segment_distance(pts[i], pts.front(), pts.back());
        if (d > worst) {
            worst = d;
            split = i;
        }
    }
    if (worst <= tol) return {pts.front(), pts.back()};
    auto left = simplify_polyline(pts.subspan(0, split + 1), tol);
    auto right = simplify_polyline(pts.subspan(split), tol);
    left.pop_back();
    left.insert(left.end(), right.begin(), right.end());
    return left;
}

std::vector<Point2> simplify_ring(std::span<const Point2> ring, double tol) {
    if (ring.size() <= 3) return {ring.begin(), ring.end()};
    // Anchor at the lexicographically smallest vertex and the vertex farthest
    // from it, then simplify the two open halves.
    std::size_t i0 = 0;
    for (std::size_t i = 1; i < ring.size(); ++i) {
        if (ring[i].x < ring[i0].x || (ring[i].x == ring[i0].x && ring[i].y < ring[i0].y)) i0 = i;
    }
    std::size_t i1 = i0;
    double far = -1.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        double d = (ring[i] - ring[i0]).squared_norm();
        if (d > far) {
            far = d;
            i1 = i;
        }
    }
    std::vector<Point2> half_a, half_b;
    for (std::size_t i = i0;; i = (i + 1) % ring.size()) {
        half_a.push_back(ring[i]);
        if (i == i1) break;
    }
    for (std::size_t i = i1;; i = (i + 1) % ring.size()) {
        half_b.push_back(ring[i]);
        if (i == i0) break;
    }
    auto sa = simplify_polyline(half_a, tol);
    auto sb = simplify_polyline(half_b, tol);
    sa.pop_back();
    sb.pop_back();
    sa.insert(sa.end(), sb.begin(), sb.end());
    return sa;
}

std::vector<Segment3> discontinuity_lines(PlanarPrimitive& primitive, const PointCloud& cloud,
                                          const LineExtractionParams& params) {
    std::vector<Segment3> out;
    if (primitive.plan_contour.outer.size() < 3) return out;
    primitive.mean_height_samples.clear();

    const double band = params.side_band;
    auto scan_ring = [&](const std::vector<Point2>& ring) {
        auto simplified = simplify_ring(ring, params.simplify_tol);
        for (std::size_t e = 0; e < simplified.size(); ++e) {
            Point2 a = simplified[e];
            Point2 b = simplified[(e + 1) % simplified.size()];
            double len = (b - a).norm();
            if (len < eps_geom) continue;
            Vec2 dir = (b - a) / len;

            double sum_l = 0.0, sum_r = 0.0;
            std::size_t cnt_l = 0, cnt_r = 0;
            for (const auto& p : cloud.points) {
                Vec2 rel = p.xy() - a;
                double s = rel.dot(dir);
                if (s < 0.0 || s > len) continue;
                double lateral = dir.cross(rel);
                if (lateral > eps_geom && lateral <= band) {
                    sum_l += p.z;
                    ++cnt_l;
                } else if (lateral < -eps_geom && lateral >= -band) {
                    sum_r += p.z;
                    ++cnt_r;
                }
            }
            if (cnt_l == 0 || cnt_r == 0) {
                primitive.mean_height_samples.push_back({0.0, 0.0});
                continue;
            }
            double mean_l = sum_l / static_cast<double>(cnt_l);
            double mean_r = sum_r / static_cast<double>(cnt_r);
            primitive.mean_height_samples.push_back({mean_l, mean_r});
            if (std::abs(mean_l - mean_r) <= params.discontinuity_height) continue;

            const Plane3& pl = primitive.plane;
            Segment3 seg{{a.x, a.y, pl.height_at(a)},
                         {b.x, b.y, pl.height_at(b)},
                         SegmentKind::discontinuity};
            out.push_back(seg);
        }
    };
    scan_ring(primitive.plan_contour.outer);
    for (const auto& hole : primitive.plan_contour.holes) scan_ring(hole);
    return out;
}

namespace {

int kind_priority(SegmentKind k) {
    switch (k) {
        case SegmentKind::footprint: return 2;
        case SegmentKind::discontinuity: return 1;
        case SegmentKind::intersection: return 0;
    }
    return 0;
}

// Angle of the supporting line folded into [0, pi).
double line_angle(const Segment2& s) {
    double a = std::atan2(s.b.y - s.a.y, s.b.x - s.a.x);
    if (a < 0.0) a += kPi;
    if (a >= kPi) a -= kPi;
    return a;
}

bool near_collinear(const Segment2& hi, const Segment2& lo, double angle_tol_rad,
                    double lateral_tol) {
    double da = std::abs(line_angle(hi) - line_angle(lo));
    da = std::min(da, kPi - da);
    if (da > angle_tol_rad) return false;
    Vec2 dir = (hi.b - hi.a).normalized();
    return std::abs(dir.cross(lo.a - hi.a)) <= lateral_tol &&
           std::abs(dir.cross(lo.b - hi.a)) <= lateral_tol;
}

// Fraction of `lo` whose projection falls inside `hi`'s extent.
double overlap_fraction(const Segment2& hi, const Segment2& lo) {
    Vec2 dir = (hi.b - hi.a).normalized();
    double h0 = 0.0, h1 = (hi.b - hi.a).norm();
    double s0 = (lo.a - hi.a).dot(dir);
    double s1 = (lo.b - hi.a).dot(dir);
    if (s0 > s1) std::swap(s0, s1);
    double inter = std::min(s1, h1 + 0.1) - std::max(s0, h0 - 0.1);
    double len = s1 - s0;
    return len > 0.0 ? std::max(0.0, inter) / len : 1.0;
}

} // namespace

SegmentSoup2 build_soup(std::vector<PlanarPrimitive>& primitives, const Polygon2& footprint,
                        const PointCloud& cloud, const LineExtractionParams& params) {
    SegmentSoup2 soup;

    auto inter = intersection_lines(primitives, params.adjacency_dist);
    for (const auto& s : inter) soup.segments.push_back({s.to_plan(), 0, 0});
    for (auto& prim : primitives) {
        auto disc = discontinuity_lines(prim, cloud, params);
        for (const auto& s : disc) soup.segments.push_back({s.to_plan(), prim.id, 0});
    }

    auto add_ring = [&](const std::vector<Point2>& ring) {
        for (std::size_t i = 0; i < ring.size(); ++i) {
            Segment2 s{ring[i], ring[(i + 1) % ring.size()], SegmentKind::footprint};
            soup.segments.push_back({s, 0, 0});
        }
    };
    add_ring(footprint.outer);
    for (const auto& h : footprint.holes) add_ring(h);

    // Clip non-footprint segments to the footprint bbox expanded by 1 m.
    auto box = footprint.bbox();
    Point2 lo = box.lo - Vec2{1.0, 1.0};
    Point2 hi = box.hi + Vec2{1.0, 1.0};
    for (auto& entry : soup.segments) {
        if (entry.seg.kind == SegmentKind::footprint) continue;
        // Liang-Barsky clip.
        Point2 a = entry.seg.a;
        Vec2 d = entry.seg.b - entry.seg.a;
        double t0 = 0.0, t1 = 1.0;
        auto clip1 = [&](double p, double q) {
            if (std::abs(p) < 1e-15) return q >= 0.0;
            double r = q / p;
            if (p < 0.0) t0 = std::max(t0, r);
            else t1 = std::min(t1, r);
            return true;
        };
        bool keep = clip1(-d.x, a.x - lo.x) && clip1(d.x, hi.x - a.x) &&
                    clip1(-d.y, a.y - lo.y) && clip1(d.y, hi.y - a.y) && t0 < t1;
        if (!keep) {
            entry.seg.a = entry.seg.b;  // zero length, dropped below
        } else {
            entry.seg.b = a + d * t1;
            entry.seg.a = a + d * t0;
        }
    }

    std::erase_if(soup.segments,
                  [](const SoupSegment& s) { return s.seg.length() < eps_geom; });

    // Collinear-overlap merge: absorb into the higher-priority segment, or
    // unify extents for same-kind pairs.
    const double angle_tol = params.merge_angle_deg * kPi / 180.0;
    double lateral_tol = params.merge_lateral_tol;
    if (lateral_tol <= 0.0) {
        double density = estimate_density(cloud, 8);
        lateral_tol = std::max(0.05, 1.2 / std::sqrt(std::max(density, 1e-6)));
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < soup.segments.size() && !changed; ++i) {
            for (std::size_t j = i + 1; j < soup.segments.size() && !changed; ++j) {
                SoupSegment& si = soup.segments[i];
                SoupSegment& sj = soup.segments[j];
                std::size_t hi_idx = i, lo_idx = j;
                if (kind_priority(sj.seg.kind) > kind_priority(si.seg.kind) ||
                    (kind_priority(sj.seg.kind) == kind_priority(si.seg.kind) &&
                     sj.seg.length() > si.seg.length())) {
                    std::swap(hi_idx, lo_idx);
                }
                SoupSegment& shi = soup.segments[hi_idx];
                SoupSegment& slo = soup.segments[lo_idx];
                if (!near_collinear(shi.seg, slo.seg, angle_tol, lateral_tol)) continue;
                // Same-kind pieces chain-merge along a line even with partial
                // overlap; absorption into a footprint edge needs more.
                bool same_kind = shi.seg.kind == slo.seg.kind;
                if (overlap_fraction(shi.seg, slo.seg) < (same_kind ? 0.25 : 0.8)) continue;

                if (same_kind && shi.seg.kind != SegmentKind::footprint) {
                    // Extend the kept segment to cover both extents.
                    Vec2 dir = shi.seg.direction();
                    double s0 = 0.0, s1 = shi.seg.length();
                    double a0 = (slo.seg.a - shi.seg.a).dot(dir);
                    double a1 = (slo.seg.b - shi.seg.a).dot(dir);
                    double mn = std::min({s0, a0, a1});
                    double mx = std::max({s1, a0, a1});
                    Point2 base = shi.seg.a;
                    shi.seg.a = base + dir * mn;
                    shi.seg.b = base + dir * mx;
                }
                soup.segments.erase(soup.segments.begin() +
                                    static_cast<std::ptrdiff_t>(lo_idx));
                changed = true;
            }
        }
    }

    // Canonical order: output must not depend on primitive enumeration.
    std::sort(soup.segments.begin(), soup.segments.end(),
              [](const SoupSegment& x, const SoupSegment& y) {
                  if (x.seg.kind != y.seg.kind) return x.seg.kind < y.seg.kind;
                  double ax = line_angle(x.seg), ay = line_angle(y.seg);
                  if (ax != ay) return ax < ay;
                  auto key = [](const Segment2& s) {
                      Point2 p = s.a, q = s.b;
                      if (q.x < p.x || (q.x == p.x && q.y < p.y)) std::swap(p, q);
                      return std::array<double, 4>{p.x, p.y, q.x, q.y};
                  };
                  return key(x.seg) < key(y.seg);
              });
    for (auto& entry : soup.segments) {
        Point2& p = entry.seg.a;
        Point2& q = entry.seg.b;
        if (q.x < p.x || (q.x == p.x && q.y < p.y)) std::swap(p, q);
    }
    return soup;
}

} // namespace lod2rec
