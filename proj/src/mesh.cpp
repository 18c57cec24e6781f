#include "lod2rec/mesh.hpp"

#include "lod2rec/cdt.hpp"
#include "lod2rec/plane_detect.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace lod2rec {

namespace {

// 2D coordinates of a facet in its own plane frame.
struct FacetFrame {
    PlaneFrame frame;
    Polygon2 poly;
    std::vector<std::size_t> point_ids;  // combined ring order -> mesh vertex id
};

FacetFrame facet_frame(const BuildingMesh& mesh, const MeshFacet& facet) {
    FacetFrame out;
    out.frame = make_plane_frame(facet.plane, mesh.vertices[facet.ring.front()]);
    for (auto v : facet.ring) {
        out.poly.outer.push_back(out.frame.to_plane(mesh.vertices[v]));
        out.point_ids.push_back(v);
    }
    // The triangulator wants a CCW outer ring; flip the frame's v axis if the
    // outward orientation projects clockwise.
    if (ring_signed_area(out.poly.outer) < 0.0) {
        out.frame.v = -out.frame.v;
        out.poly.outer.clear();
        for (auto v : facet.ring) out.poly.outer.push_back(out.frame.to_plane(mesh.vertices[v]));
    }
    for (const auto& h : facet.holes) {
        std::vector<Point2> ring;
        for (auto v : h) {
            ring.push_back(out.frame.to_plane(mesh.vertices[v]));
            out.point_ids.push_back(v);
        }
        if (ring_signed_area(ring) > 0.0) {
            // Holes must wind opposite to the outer ring.
            std::reverse(ring.begin(), ring.end());
            std::reverse(out.point_ids.end() - static_cast<std::ptrdiff_t>(ring.size()),
                         out.point_ids.end());
        }
        out.poly.holes.push_back(std::move(ring));
    }
    return out;
}

} // namespace

double BuildingMesh::facet_area(std::size_t f) const {
    auto ff = facet_frame(*this, facets[f]);
    return ff.poly.area();
}

double BuildingMesh::total_area() const {
    double a = 0.0;
    for (std::size_t f = 0; f < facets.size(); ++f) a += facet_area(f);
    return a;
}

std::vector<std::array<std::size_t, 3>> triangulate_facet(const BuildingMesh& mesh,
                                                          const MeshFacet& facet) {
    auto ff = facet_frame(mesh, facet);
    auto tri = cdt_polygon(ff.poly);
    std::vector<std::array<std::size_t, 3>> out;
    out.reserve(tri.triangles.size());
    for (const auto& t : tri.triangles)
        out.push_back({ff.point_ids[t[0]], ff.point_ids[t[1]], ff.point_ids[t[2]]});
    return out;
}

std::vector<std::array<std::size_t, 3>> triangulate_facets(const BuildingMesh& mesh) {
    std::vector<std::array<std::size_t, 3>> out;
    for (const auto& f : mesh.facets) {
        auto tris = triangulate_facet(mesh, f);
        out.insert(out.end(), tris.begin(), tris.end());
    }
    return out;
}

namespace {

bool tri_tri_intersect(const std::array<Point3, 3>& t1, const std::array<Point3, 3>& t2) {
    constexpr double eps = 1e-9;
    Vec3 n1 = (t1[1] - t1[0]).cross(t1[2] - t1[0]);
    Vec3 n2 = (t2[1] - t2[0]).cross(t2[2] - t2[0]);
    double n1len = n1.norm(), n2len = n2.norm();
    if (n1len < 1e-18 || n2len < 1e-18) return false;  // degenerate triangle
    n1 = n1 / n1len;
    n2 = n2 / n2len;

    double d2[3], d1[3];
    for (int i = 0; i < 3; ++i) d2[i] = n1.dot(t2[static_cast<std::size_t>(i)] - t1[0]);
    for (int i = 0; i < 3; ++i) d1[i] = n2.dot(t1[static_cast<std::size_t>(i)] - t2[0]);

    auto all_same_side = [eps](const double* d) {
        return (d[0] > eps && d[1] > eps && d[2] > eps) ||
               (d[0] < -eps && d[1] < -eps && d[2] < -eps);
    };
    if (all_same_side(d2) || all_same_side(d1)) return false;

    bool coplanar = std::abs(d2[0]) <= eps && std::abs(d2[1]) <= eps && std::abs(d2[2]) <= eps;
    if (coplanar) {
        // Project to the dominant axis plane and measure the overlap area.
        PlaneFrame fr = make_plane_frame(Plane3{n1, -n1.dot(t1[0])}, t1[0]);
        std::array<Point2, 3> a, b;
        for (int i = 0; i < 3; ++i) {
            a[static_cast<std::size_t>(i)] = fr.to_plane(t1[static_cast<std::size_t>(i)]);
            b[static_cast<std::size_t>(i)] = fr.to_plane(t2[static_cast<std::size_t>(i)]);
        }
        auto fix = [](std::array<Point2, 3>& t) {
            if ((t[1] - t[0]).cross(t[2] - t[0]) < 0.0) std::swap(t[1], t[2]);
        };
        fix(a);
        fix(b);
        return triangle_intersection_area(a, b) > 1e-12;
    }

    // Interval overlap on the intersection line of the two planes.
    Vec3 dir = n1.cross(n2);
    auto interval = [&](const std::array<Point3, 3>& t, const double* d, double& lo,
                        double& hi) {
        std::vector<double> params;
        for (int i = 0; i < 3; ++i) {
            int j = (i + 1) % 3;
            double di = d[i], dj = d[j];
            if ((di > eps && dj > eps) || (di < -eps && dj < -eps)) continue;
            if (std::abs(di - dj) < 1e-15) continue;
            double s = di / (di - dj);
            if (s < -1e-9 || s > 1.0 + 1e-9) continue;
            Point3 p = t[static_cast<std::size_t>(i)] +
                       (t[static_cast<std::size_t>(j)] - t[static_cast<std::size_t>(i)]) * s;
            params.push_back(dir.dot(p));
        }
        if (params.size() < 2) return false;
        lo = *std::min_element(params.begin(), params.end());
        hi = *std::max_element(params.begin(), params.end());
        return true;
    };
    double lo1, hi1, lo2, hi2;
    if (!interval(t1, d1, lo1, hi1) || !interval(t2, d2, lo2, hi2)) return false;
    double overlap = std::min(hi1, hi2) - std::max(lo1, lo2);
    return overlap > eps;
}

} // namespace

MeshCheckReport check_mesh(const BuildingMesh& mesh) {
    MeshCheckReport report;

    // Collect directed edges over outer rings and holes alike.
    struct Wedge {
        std::size_t facet;
        std::size_t prev, next;
    };
    std::map<std::pair<std::size_t, std::size_t>, int> directed;
    std::map<std::size_t, std::vector<Wedge>> at_vertex;
    bool degenerate = false;
    auto scan_ring = [&](const std::vector<std::size_t>& ring, std::size_t f) {
        const std::size_t n = ring.size();
        if (n < 3) degenerate = true;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t u = ring[i], v = ring[(i + 1) % n], w = ring[(i + 2) % n];
            if (u == v) degenerate = true;
            directed[{u, v}]++;
            at_vertex[v].push_back({f, u, w});
        }
    };
    for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
        scan_ring(mesh.facets[f].ring, f);
        for (const auto& h : mesh.facets[f].holes) scan_ring(h, f);
    }
    if (degenerate) {
        report.first_violation = "degenerate facet ring";
        return report;
    }

    report.watertight = true;
    for (const auto& [edge, count] : directed) {
        auto rev = directed.find({edge.second, edge.first});
        if (count != 1 || rev == directed.end() || rev->second != 1) {
            report.watertight = false;
            report.first_violation = "edge not shared by exactly two facets";
            break;
        }
    }

    // Vertex manifoldness: the wedges around each vertex must chain into a
    // single cycle through shared undirected edges.
    report.manifold = report.watertight;
    if (report.manifold) {
        for (const auto& [v, wedges] : at_vertex) {
            // wedge i connects neighbor endpoints prev -> next.
            std::map<std::size_t, std::size_t> from_prev;
            bool ok = true;
            for (std::size_t i = 0; i < wedges.size(); ++i) {
                if (from_prev.count(wedges[i].prev)) ok = false;
                from_prev[wedges[i].prev] = i;
            }
            if (!ok) {
                report.manifold = false;
                report.first_violation = "non-manifold vertex (duplicate wedge)";
                break;
            }
            // Follow next -> prev chaining.
            std::size_t cycle_len = 0;
            std::size_t start = 0, cur = 0;
            std::set<std::size_t> seen;
            do {
                seen.insert(cur);
                ++cycle_len;
                auto it = from_prev.find(wedges[cur].next);
                if (it == from_prev.end()) {
                    ok = false;
                    break;
                }
                cur = it->second;
            } while (cur != start && cycle_len <= wedges.size());
            if (!ok || cycle_len != wedges.size()) {
                report.manifold = false;
                report.first_violation = "non-manifold vertex (fan not a single cycle)";
                break;
            }
        }
    }

    // Planarity against the stored facet planes.
    for (const auto& f : mesh.facets) {
        auto scan = [&](const std::vector<std::size_t>& ring) {
            for (auto v : ring)
                report.max_planarity_residual = std::max(report.max_planarity_residual,
                                                         f.plane.distance(mesh.vertices[v]));
        };
        scan(f.ring);
        for (const auto& h : f.holes) scan(h);
    }
    if (report.max_planarity_residual > 1e-9 && report.first_violation.empty())
        report.first_violation = "facet vertices off the facet plane";

    // Intersection test over CDT triangles; triangle pairs sharing a mesh
    // vertex are adjacent by construction and excluded.
    report.intersection_free = true;
    std::vector<std::array<std::size_t, 3>> tris;
    std::vector<std::size_t> tri_facet;
    for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
        auto ts = triangulate_facet(mesh, mesh.facets[f]);
        for (const auto& t : ts) {
            tris.push_back(t);
            tri_facet.push_back(f);
        }
    }
    for (std::size_t i = 0; i < tris.size() && report.intersection_free; ++i) {
        for (std::size_t j = i + 1; j < tris.size(); ++j) {
            if (tri_facet[i] == tri_facet[j]) continue;
            bool share = false;
            for (auto a : tris[i])
                for (auto b : tris[j])
                    if (a == b) share = true;
            if (share) continue;
            std::array<Point3, 3> t1{mesh.vertices[tris[i][0]], mesh.vertices[tris[i][1]],
                                     mesh.vertices[tris[i][2]]};
            std::array<Point3, 3> t2{mesh.vertices[tris[j][0]], mesh.vertices[tris[j][1]],
                                     mesh.vertices[tris[j][2]]};
            if (tri_tri_intersect(t1, t2)) {
                report.intersection_free = false;
                report.first_violation = "non-adjacent facets intersect";
                break;
            }
        }
    }

    return report;
}

} // namespace lod2rec
