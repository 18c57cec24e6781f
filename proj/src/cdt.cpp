#include "lod2rec/cdt.hpp"

#include "lod2rec/delaunay.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace lod2rec {

namespace {

double incircle_det(Point2 a, Point2 b, Point2 c, Point2 d) {
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

PolyTriangulation cdt_polygon(const Polygon2& poly) {
    PolyTriangulation tri = triangulate_polygon(poly);
    if (tri.triangles.size() < 2) return tri;

    // Constrained edges: consecutive ring pairs (undirected).
    std::set<std::pair<std::size_t, std::size_t>> constrained;
    auto mark_ring = [&](std::size_t begin, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
            auto key = std::minmax(begin + i, begin + (i + 1) % count);
            constrained.insert({key.first, key.second});
        }
    };
    mark_ring(0, poly.outer.size());
    std::size_t offset = poly.outer.size();
    for (const auto& h : poly.holes) {
        mark_ring(offset, h.size());
        offset += h.size();
    }

    auto& tris = tri.triangles;
    const auto& pts = tri.points;

    // Lawson flips until Delaunay; adjacency rebuilt per pass via directed
    // edges so duplicated bridge vertices pair correctly.
    for (std::size_t pass = 0; pass < tris.size() * tris.size() + 8; ++pass) {
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> owner;  // directed edge
        for (std::size_t t = 0; t < tris.size(); ++t)
            for (int e = 0; e < 3; ++e)
                owner[{tris[t][static_cast<std::size_t>(e)],
                       tris[t][static_cast<std::size_t>((e + 1) % 3)]}] = t;

        bool flipped = false;
        for (std::size_t t = 0; t < tris.size() && !flipped; ++t) {
            for (int e = 0; e < 3 && !flipped; ++e) {
                std::size_t u = tris[t][static_cast<std::size_t>(e)];
                std::size_t v = tris[t][static_cast<std::size_t>((e + 1) % 3)];
                std::size_t w = tris[t][static_cast<std::size_t>((e + 2) % 3)];
                auto key = std::minmax(u, v);
                if (constrained.count({key.first, key.second})) continue;
                auto it = owner.find({v, u});
                if (it == owner.end()) continue;
                std::size_t s = it->second;
                if (s == t) continue;
                // Opposite vertex in neighbor triangle.
                std::size_t x = SIZE_MAX;
                for (int k = 0; k < 3; ++k) {
                    std::size_t cand = tris[s][static_cast<std::size_t>(k)];
                    if (cand != u && cand != v) x = cand;
                }
                if (x == SIZE_MAX) continue;
                if (incircle_det(pts[u], pts[v], pts[w], pts[x]) <= 1e-12) continue;
                // Flip only when the quad is strictly convex.
                double c1 = (pts[x] - pts[w]).cross(pts[u] - pts[w]);
                double c2 = (pts[x] - pts[w]).cross(pts[v] - pts[w]);
                if (c1 * c2 >= -1e-18) continue;
                tris[t] = {w, u, x};
                tris[s] = {x, v, w};
                flipped = true;
            }
        }
        if (!flipped) break;
    }
    return tri;
}

} // namespace lod2rec
