#include "lod2rec/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>

namespace lod2rec {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

double hash_unit(std::uint64_t key) {
    return static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53;
}

struct Tri {
    std::size_t v[3];
    bool alive = true;
};

// Positive when d lies inside the circumcircle of ccw triangle (a,b,c).
double incircle(Point2 a, Point2 b, Point2 c, Point2 d) {
    double adx = a.x - d.x, ady = a.y - d.y;
    double bdx = b.x - d.x, bdy = b.y - d.y;
    double cdx = c.x - d.x, cdy = c.y - d.y;
    double ad = adx * adx + ady * ady;
    double bd = bdx * bdx + bdy * bdy;
    double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
           ad * (bdx * cdy - bdy * cdx);
}

} // namespace

double circumradius_squared(Point2 a, Point2 b, Point2 c) {
    double d = 2.0 * ((b - a).cross(c - a));
    if (d == 0.0) return std::numeric_limits<double>::infinity();
    double a2 = a.squared_norm(), b2 = b.squared_norm(), c2 = c.squared_norm();
    double ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    double uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    return (Point2{ux, uy} - a).squared_norm();
}

std::vector<std::array<std::size_t, 3>> delaunay_triangulate(std::span<const Point2> points) {
    std::vector<std::array<std::size_t, 3>> out;
    const std::size_t n = points.size();
    if (n < 3) return out;

    Point2 lo = points[0], hi = points[0];
    for (const auto& p : points) {
        lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y);
    }
    double extent = std::max({hi.x - lo.x, hi.y - lo.y, 1e-9});

    // Regular grids and other cocircular layouts break floating-point
    // Bowyer-Watson; a reproducible sub-nanometer jitter restores general
    // position without moving any reported geometry.
    double jit = 1e-9 * extent;
    std::vector<Point2> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        pts[i].x = points[i].x + jit * (hash_unit(2 * i) - 0.5);
        pts[i].y = points[i].y + jit * (hash_unit(2 * i + 1) - 0.5);
    }

    // Super-triangle far outside the data.
    Point2 center = (lo + hi) * 0.5;
    double r = 10.0 * extent + 1.0;
    pts.push_back({center.x - 2.0 * r, center.y - r});
    pts.push_back({center.x + 2.0 * r, center.y - r});
    pts.push_back({center.x, center.y + 2.0 * r});
    const std::size_t s0 = n, s1 = n + 1, s2 = n + 2;

    std::vector<Tri> tris;
    tris.push_back({{s0, s1, s2}, true});

    // Insertion order randomized (deterministically) to avoid adversarial
    // O(n^2) cavity growth on sorted inputs.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return splitmix64(a * 3 + 1) < splitmix64(b * 3 + 1);
    });

    std::map<std::pair<std::size_t, std::size_t>, int> edge_count;
    for (std::size_t ip : order) {
        Point2 p = pts[ip];
        edge_count.clear();
        std::vector<std::size_t> bad;
        for (std::size_t t = 0; t < tris.size(); ++t) {
            if (!tris[t].alive) continue;
            Point2 a = pts[tris[t].v[0]], b = pts[tris[t].v[1]], c = pts[tris[t].v[2]];
            if (incircle(a, b, c, p) > 0.0) bad.push_back(t);
        }
        for (std::size_t t : bad) {
            tris[t].alive = false;
            for (int e = 0; e < 3; ++e) {
                std::size_t u = tris[t].v[e], v = tris[t].v[(e + 1) % 3];
                auto key = std::minmax(u, v);
                edge_count[{key.first, key.second}]++;
            }
        }
        // Cavity boundary edges (seen once) reconnect to the new point.
        for (std::size_t t : bad) {
            for (int e = 0; e < 3; ++e) {
                std::size_t u = tris[t].v[e], v = tris[t].v[(e + 1) % 3];
                auto key = std::minmax(u, v);
                if (edge_count[{key.first, key.second}] == 1) {
                    tris.push_back({{u, v, ip}, true});
                }
            }
        }
    }

    for (const auto& t : tris) {
        if (!t.alive) continue;
        if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
        std::array<std::size_t, 3> tri{t.v[0], t.v[1], t.v[2]};
        // Canonical CCW order on the original coordinates.
        if ((points[tri[1]] - points[tri[0]]).cross(points[tri[2]] - points[tri[0]]) < 0.0)
            std::swap(tri[1], tri[2]);
        out.push_back(tri);
    }
    return out;
}

AlphaBoundary alpha_shape_boundary(std::span<const Point2> points, double alpha) {
    auto tris = delaunay_triangulate(points);
    std::vector<std::array<std::size_t, 3>> kept;
    for (const auto& t : tris) {
        if (circumradius_squared(points[t[0]], points[t[1]], points[t[2]]) <= alpha)
            kept.push_back(t);
    }
    if (kept.empty()) return {};

    // Connected components over shared edges.
    std::vector<std::size_t> parent(kept.size());
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_owner;
    for (std::size_t t = 0; t < kept.size(); ++t) {
        for (int e = 0; e < 3; ++e) {
            auto key = std::minmax(kept[t][e], kept[t][(e + 1) % 3]);
            auto [it, fresh] = edge_owner.try_emplace({key.first, key.second}, t);
            if (!fresh) parent[find(it->second)] = find(t);
        }
    }
    std::vector<double> comp_area(kept.size(), 0.0);
    for (std::size_t t = 0; t < kept.size(); ++t) {
        double a = 0.5 * std::abs((points[kept[t][1]] - points[kept[t][0]])
                                      .cross(points[kept[t][2]] - points[kept[t][0]]));
        comp_area[find(t)] += a;
    }
    std::size_t best_comp = find(0);
    for (std::size_t t = 0; t < kept.size(); ++t) {
        if (comp_area[find(t)] > comp_area[best_comp]) best_comp = find(t);
    }

    // Directed boundary edges of the winning component, interior on the left
    // (kept triangles are CCW, so a boundary edge in triangle order already
    // has the shape on its left).
    std::map<std::pair<std::size_t, std::size_t>, int> count;
    for (const auto& t : kept)
        for (int e = 0; e < 3; ++e) {
            auto key = std::minmax(t[e], t[(e + 1) % 3]);
            count[{key.first, key.second}]++;
        }
    std::vector<std::pair<std::size_t, std::size_t>> boundary;
    for (std::size_t t = 0; t < kept.size(); ++t) {
        if (find(t) != best_comp) continue;
        for (int e = 0; e < 3; ++e) {
            std::size_t u = kept[t][e], v = kept[t][(e + 1) % 3];
            auto key = std::minmax(u, v);
            if (count[{key.first, key.second}] == 1) boundary.push_back({u, v});
        }
    }
    auto loops = walk_directed_loops(points, boundary);

    AlphaBoundary out;
    double best_area = 0.0;
    std::size_t best_idx = SIZE_MAX;
    std::vector<double> areas(loops.size());
    for (std::size_t l = 0; l < loops.size(); ++l) {
        std::vector<Point2> ring;
        ring.reserve(loops[l].size());
        for (auto i : loops[l]) ring.push_back(points[i]);
        areas[l] = ring_signed_area(ring);
        if (areas[l] > best_area) {
            best_area = areas[l];
            best_idx = l;
        }
    }
    if (best_idx == SIZE_MAX) return out;
    out.outer = loops[best_idx];
    for (std::size_t l = 0; l < loops.size(); ++l) {
        if (l == best_idx || areas[l] >= 0.0) continue;
        out.holes.push_back(loops[l]);  // clockwise as walked
    }
    return out;
}

std::vector<std::size_t> alpha_shape_outer_boundary(std::span<const Point2> points,
                                                    double alpha) {
    return alpha_shape_boundary(points, alpha).outer;
}

} // namespace lod2rec
