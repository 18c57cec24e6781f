#include "lod2rec/metrics.hpp"

#include "lod2rec/errors.hpp"
#include "lod2rec/kdtree.hpp"
#include "lod2rec/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace lod2rec {

std::vector<Point3> sample_surface(const BuildingMesh& mesh, std::size_t n,
                                   std::uint64_t seed) {
    auto tris = triangulate_facets(mesh);
    std::vector<double> cum;
    cum.reserve(tris.size());
    double total = 0.0;
    for (const auto& t : tris) {
        Vec3 ab = mesh.vertices[t[1]] - mesh.vertices[t[0]];
        Vec3 ac = mesh.vertices[t[2]] - mesh.vertices[t[0]];
        total += 0.5 * ab.cross(ac).norm();
        cum.push_back(total);
    }
    if (total <= 0.0) throw ZeroArea("sample_surface: mesh has no area");

    Rng rng(seed);
    std::vector<Point3> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double pick = rng.uniform() * total;
        std::size_t t = static_cast<std::size_t>(
            std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin());
        if (t >= tris.size()) t = tris.size() - 1;
        double u = rng.uniform();
        double v = rng.uniform();
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        const Point3& a = mesh.vertices[tris[t][0]];
        const Point3& b = mesh.vertices[tris[t][1]];
        const Point3& c = mesh.vertices[tris[t][2]];
        out.push_back(a + (b - a) * u + (c - a) * v);
    }
    return out;
}

double chamfer_one_sided(std::span<const Point3> from, std::span<const Point3> to) {
    KdTree3 tree(std::vector<Point3>(to.begin(), to.end()));
    double acc = 0.0;
    for (const auto& p : from) acc += tree.nearest_distance(p);
    return from.empty() ? 0.0 : acc / static_cast<double>(from.size());
}

ComplexityReport complexity(const BuildingMesh& mesh, double edge_threshold) {
    ComplexityReport report;
    report.edge_threshold = edge_threshold;
    report.polygon_facets = mesh.facets.size();
    report.triangles = triangulate_facets(mesh).size();

    // Weld coordinates before counting so meshes from tools with different
    // vertex-sharing policies compare fairly.
    std::vector<std::size_t> weld(mesh.vertices.size());
    std::vector<Point3> reps;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        std::size_t id = SIZE_MAX;
        for (std::size_t r = 0; r < reps.size(); ++r) {
            if ((reps[r] - mesh.vertices[v]).norm() <= eps_geom) {
                id = r;
                break;
            }
        }
        if (id == SIZE_MAX) {
            id = reps.size();
            reps.push_back(mesh.vertices[v]);
        }
        weld[v] = id;
    }

    std::set<std::size_t> used;
    std::set<std::pair<std::size_t, std::size_t>> edges;
    auto scan_ring = [&](const std::vector<std::size_t>& ring) {
        for (std::size_t i = 0; i < ring.size(); ++i) {
            std::size_t u = weld[ring[i]], v = weld[ring[(i + 1) % ring.size()]];
            used.insert(u);
            auto key = std::minmax(u, v);
            if (key.first != key.second) edges.insert({key.first, key.second});
        }
    };
    for (const auto& f : mesh.facets) {
        scan_ring(f.ring);
        for (const auto& h : f.holes) scan_ring(h);
    }
    report.vertices = used.size();

    std::size_t short_edges = 0;
    for (const auto& [u, v] : edges) {
        if ((reps[u] - reps[v]).norm() < edge_threshold) ++short_edges;
    }
    report.short_edge_ratio =
        edges.empty() ? 0.0 : static_cast<double>(short_edges) / static_cast<double>(edges.size());
    return report;
}

} // namespace lod2rec
