#include "lod2rec/extrude.hpp"

#include "lod2rec/errors.hpp"
#include "lod2rec/lsq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace lod2rec {

std::size_t RoofGraph::find(std::size_t corner, std::size_t cell) const {
    for (std::size_t i = 0; i < incidences.size(); ++i)
        if (incidences[i].corner == corner && incidences[i].cell == cell) return i;
    return SIZE_MAX;
}

RoofGraph extrude_cells(const Partition2D& partition) {
    RoofGraph graph;
    graph.detected.resize(partition.cells.size());
    graph.cell_area.resize(partition.cells.size());
    graph.rank_deficient.assign(partition.cells.size(), 0);

    for (std::size_t c = 0; c < partition.cells.size(); ++c) {
        const auto& cell = partition.cells[c];
        if (!cell.plane || !cell.plane->non_vertical())
            throw MissingPlane("extrude_cells: cell without a usable plane");
        graph.detected[c] = {cell.plane->height_a(), cell.plane->height_b(),
                             cell.plane->height_c()};
        graph.cell_area[c] = cell.area;

        auto add_ring = [&](const std::vector<std::size_t>& ring) {
            for (auto v : ring) {
                if (graph.find(v, c) != SIZE_MAX) continue;
                RoofGraph::Incidence inc;
                inc.corner = v;
                inc.cell = c;
                Point2 p = partition.vertices[v];
                inc.z = graph.detected[c][0] * p.x + graph.detected[c][1] * p.y +
                        graph.detected[c][2];
                inc.merge_class = graph.incidences.size();
                graph.incidences.push_back(inc);
            }
        };
        add_ring(cell.outer);
        for (const auto& h : cell.holes) add_ring(h);
    }
    graph.planes = graph.detected;
    graph.n_classes = graph.incidences.size();
    graph.class_z.resize(graph.n_classes);
    for (std::size_t i = 0; i < graph.incidences.size(); ++i)
        graph.class_z[i] = graph.incidences[i].z;
    return graph;
}

void merge_vertical(RoofGraph& graph, const Partition2D& partition, double tau_v) {
    std::vector<std::vector<std::size_t>> per_corner(partition.vertices.size());
    for (std::size_t i = 0; i < graph.incidences.size(); ++i)
        per_corner[graph.incidences[i].corner].push_back(i);

    std::size_t next_class = 0;
    std::vector<double> class_z;
    for (auto& incs : per_corner) {
        if (incs.empty()) continue;
        std::sort(incs.begin(), incs.end(), [&](std::size_t a, std::size_t b) {
            if (graph.incidences[a].z != graph.incidences[b].z)
                return graph.incidences[a].z < graph.incidences[b].z;
            return a < b;
        });
        // Single linkage on sorted heights: a gap above tau_v starts a new
        // cluster.
        std::size_t begin = 0;
        for (std::size_t k = 1; k <= incs.size(); ++k) {
            bool split = k == incs.size() ||
                         graph.incidences[incs[k]].z - graph.incidences[incs[k - 1]].z > tau_v;
            if (!split) continue;
            double mean = 0.0;
            for (std::size_t m = begin; m < k; ++m) mean += graph.incidences[incs[m]].z;
            mean /= static_cast<double>(k - begin);
            for (std::size_t m = begin; m < k; ++m) {
                graph.incidences[incs[m]].merge_class = next_class;
                graph.incidences[incs[m]].z = mean;
            }
            class_z.push_back(mean);
            ++next_class;
            begin = k;
        }
    }
    graph.n_classes = next_class;
    graph.class_z = std::move(class_z);
}

HeightOptResult optimize_heights(RoofGraph& graph, const Partition2D& partition) {
    HeightOptResult result;
    const std::size_t n_cells = graph.detected.size();

    // Cells whose corners are collinear cannot carry a plane of their own:
    // pin them to the detected plane and detach their incidences.
    for (std::size_t c = 0; c < n_cells; ++c) {
        std::vector<Point2> corners;
        for (const auto& inc : graph.incidences)
            if (inc.cell == c) corners.push_back(partition.vertices[inc.corner]);
        bool collinear = true;
        for (std::size_t k = 2; k < corners.size() && collinear; ++k) {
            if (std::abs((corners[1] - corners[0]).cross(corners[k] - corners[0])) > 1e-9)
                collinear = false;
        }
        if (corners.size() < 3 || collinear) {
            graph.rank_deficient[c] = 1;
            ++result.n_rank_deficient;
        }
    }
    if (result.n_rank_deficient > 0) {
        for (auto& inc : graph.incidences) {
            if (!graph.rank_deficient[inc.cell]) continue;
            Point2 p = partition.vertices[inc.corner];
            inc.merge_class = graph.n_classes++;
            inc.z = graph.detected[inc.cell][0] * p.x + graph.detected[inc.cell][1] * p.y +
                    graph.detected[inc.cell][2];
            graph.class_z.push_back(inc.z);
        }
    }

    const std::size_t n_vars = 3 * n_cells + graph.n_classes;
    auto var_a = [&](std::size_t c) { return 3 * c; };
    auto var_z = [&](std::size_t k) { return 3 * n_cells + k; };

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_vars),
                                              static_cast<Eigen::Index>(n_vars));
    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_vars));
    for (std::size_t c = 0; c < n_cells; ++c) {
        double w = 2.0 * std::max(graph.cell_area[c], 1e-9);
        for (int k = 0; k < 3; ++k) {
            H(static_cast<Eigen::Index>(var_a(c) + static_cast<std::size_t>(k)),
              static_cast<Eigen::Index>(var_a(c) + static_cast<std::size_t>(k))) = w;
            g[static_cast<Eigen::Index>(var_a(c) + static_cast<std::size_t>(k))] =
                w * graph.detected[c][static_cast<std::size_t>(k)];
        }
    }

    struct Row {
        std::size_t cell;
        double x, y;
        std::size_t cls;
        bool pin_ab;     // horizontal pin row pair instead of incidence row
        double pin_val;  // unused for incidence rows
        int pin_which;   // 0 = a, 1 = b
    };
    std::vector<Row> constraint_rows;
    for (const auto& inc : graph.incidences) {
        Point2 p = partition.vertices[inc.corner];
        constraint_rows.push_back({inc.cell, p.x, p.y, inc.merge_class, false, 0.0, 0});
    }
    // Horizontal-rooftop preservation: near-flat detected planes become
    // exactly flat.
    const double flat_tol = std::tan(2.0 * 3.141592653589793 / 180.0);
    for (std::size_t c = 0; c < n_cells; ++c) {
        if (graph.rank_deficient[c]) continue;
        if (std::abs(graph.detected[c][0]) < flat_tol &&
            std::abs(graph.detected[c][1]) < flat_tol) {
            constraint_rows.push_back({c, 0, 0, 0, true, 0.0, 0});
            constraint_rows.push_back({c, 0, 0, 0, true, 0.0, 1});
        }
    }
    // Rank-deficient cells keep their detected plane verbatim.
    for (std::size_t c = 0; c < n_cells; ++c) {
        if (!graph.rank_deficient[c]) continue;
        for (int k = 0; k < 3; ++k)
            constraint_rows.push_back({c, 0, 0, 0, true, graph.detected[c][static_cast<std::size_t>(k)],
                                       k + 2});
    }

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(constraint_rows.size()), static_cast<Eigen::Index>(n_vars));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(constraint_rows.size()));
    for (std::size_t r = 0; r < constraint_rows.size(); ++r) {
        const Row& row = constraint_rows[r];
        auto R = static_cast<Eigen::Index>(r);
        if (!row.pin_ab) {
            A(R, static_cast<Eigen::Index>(var_a(row.cell))) = row.x;
            A(R, static_cast<Eigen::Index>(var_a(row.cell) + 1)) = row.y;
            A(R, static_cast<Eigen::Index>(var_a(row.cell) + 2)) = 1.0;
            A(R, static_cast<Eigen::Index>(var_z(row.cls))) = -1.0;
        } else if (row.pin_which <= 1) {
            A(R, static_cast<Eigen::Index>(var_a(row.cell) +
                                           static_cast<std::size_t>(row.pin_which))) = 1.0;
            b[R] = 0.0;
        } else {
            A(R, static_cast<Eigen::Index>(var_a(row.cell) +
                                           static_cast<std::size_t>(row.pin_which - 2))) = 1.0;
            b[R] = row.pin_val;
        }
    }

    auto sol = solve_equality_constrained(H, g, A, b);
    result.max_constraint_residual = sol.constraint_residual;

    for (std::size_t c = 0; c < n_cells; ++c)
        for (std::size_t k = 0; k < 3; ++k)
            graph.planes[c][k] = sol.x[static_cast<Eigen::Index>(var_a(c) + k)];
    for (std::size_t k = 0; k < graph.n_classes; ++k)
        graph.class_z[k] = sol.x[static_cast<Eigen::Index>(var_z(k))];
    for (auto& inc : graph.incidences) inc.z = graph.class_z[inc.merge_class];

    double obj = 0.0;
    for (std::size_t c = 0; c < n_cells; ++c) {
        double w = std::max(graph.cell_area[c], 1e-9);
        for (std::size_t k = 0; k < 3; ++k) {
            double d = graph.planes[c][k] - graph.detected[c][k];
            obj += w * d * d;
        }
    }
    result.objective = obj;
    return result;
}

namespace {

// Mesh assembly workspace: vertices welded per plan corner by height.
struct VertexStore {
    const Partition2D* partition;
    std::vector<Point3> points;
    std::vector<std::vector<std::pair<double, std::size_t>>> per_corner;  // (z, id) sorted

    explicit VertexStore(const Partition2D& p)
        : partition(&p), per_corner(p.vertices.size()) {}

    std::size_t get(std::size_t corner, double z) {
        auto& lst = per_corner[corner];
        for (auto& [zz, id] : lst) {
            if (std::abs(zz - z) <= 1e-9) return id;
        }
        Point2 xy = partition->vertices[corner];
        std::size_t id = points.size();
        points.push_back({xy.x, xy.y, z});
        lst.push_back({z, id});
        std::sort(lst.begin(), lst.end());
        return id;
    }
};

Plane3 wall_plane_from_ring(const std::vector<Point3>& pts,
                            const std::vector<std::size_t>& ring) {
    // Exactly vertical plane through the ring's plan line; sign from the
    // Newell normal so the stored plane matches the ring orientation.
    Point2 a{0, 0}, b{0, 0};
    bool found = false;
    for (std::size_t i = 0; i < ring.size() && !found; ++i) {
        Point2 p = pts[ring[i]].xy();
        Point2 q = pts[ring[(i + 1) % ring.size()]].xy();
        if ((q - p).norm() > eps_geom) {
            a = p;
            b = q;
            found = true;
        }
    }
    Vec2 dir = (b - a).normalized();
    Vec3 n{dir.y, -dir.x, 0.0};
    Vec3 newell{0, 0, 0};
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Point3& p = pts[ring[i]];
        const Point3& q = pts[ring[(i + 1) % ring.size()]];
        newell.x += (p.y - q.y) * (p.z + q.z);
        newell.y += (p.z - q.z) * (p.x + q.x);
        newell.z += (p.x - q.x) * (p.y + q.y);
    }
    if (newell.dot(n) < 0.0) n = -n;
    return Plane3{n, -(n.x * a.x + n.y * a.y)};
}

} // namespace

BuildingMesh assemble_mesh(const RoofGraph& graph, const Partition2D& partition,
                           const Polygon2& footprint, double ground_z) {
    (void)footprint;  // outline comes from the partition; the footprint shaped it upstream
    BuildingMesh mesh;
    VertexStore store(partition);

    auto class_z_at = [&](std::size_t corner, std::size_t cell) {
        std::size_t idx = graph.find(corner, cell);
        if (idx == SIZE_MAX)
            throw AssemblyFailure("assemble_mesh: missing incidence");
        return graph.class_z[graph.incidences[idx].merge_class];
    };

    // Roof facets.
    for (std::size_t c = 0; c < partition.cells.size(); ++c) {
        const auto& cell = partition.cells[c];
        MeshFacet facet;
        facet.role = FacetRole::roof;
        facet.plane = Plane3::from_height_form(graph.planes[c][0], graph.planes[c][1],
                                               graph.planes[c][2]);
        for (auto v : cell.outer) facet.ring.push_back(store.get(v, class_z_at(v, c)));
        for (const auto& h : cell.holes) {
            std::vector<std::size_t> hole;
            for (auto v : h) hole.push_back(store.get(v, class_z_at(v, c)));
            facet.holes.push_back(std::move(hole));
        }
        mesh.facets.push_back(std::move(facet));
    }

    // Interior walls between cells whose height classes do not meet.
    for (const auto& e : partition.edges) {
        if (e.left < 0 || e.right < 0) continue;
        std::size_t L = static_cast<std::size_t>(e.left);
        std::size_t R = static_cast<std::size_t>(e.right);
        std::size_t u = e.a, v = e.b;
        std::size_t vL_u = store.get(u, class_z_at(u, L));
        std::size_t vL_v = store.get(v, class_z_at(v, L));
        std::size_t vR_u = store.get(u, class_z_at(u, R));
        std::size_t vR_v = store.get(v, class_z_at(v, R));
        if (vL_u == vR_u && vL_v == vR_v) continue;  // continuous transition

        std::vector<std::size_t> ring{vL_v, vL_u, vR_u, vR_v};
        ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
        while (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
        if (ring.size() < 3) continue;

        MeshFacet facet;
        facet.role = FacetRole::wall;
        facet.ring = std::move(ring);
        facet.plane = wall_plane_from_ring(store.points, facet.ring);
        mesh.facets.push_back(std::move(facet));
    }

    // Region boundary: outer walls down to the ground, plus ground facets.
    std::vector<std::pair<std::size_t, std::size_t>> boundary;  // region on the left
    std::vector<const PartitionEdge*> boundary_src;
    for (const auto& e : partition.edges) {
        if (e.left >= 0 && e.right < 0) {
            boundary.push_back({e.a, e.b});
            boundary_src.push_back(&e);
        } else if (e.right >= 0 && e.left < 0) {
            boundary.push_back({e.b, e.a});
            boundary_src.push_back(&e);
        }
    }
    for (std::size_t k = 0; k < boundary.size(); ++k) {
        auto [u, v] = boundary[k];
        const PartitionEdge& e = *boundary_src[k];
        std::size_t cell = static_cast<std::size_t>(e.left >= 0 ? e.left : e.right);
        std::size_t top_u = store.get(u, class_z_at(u, cell));
        std::size_t top_v = store.get(v, class_z_at(v, cell));
        std::size_t bot_u = store.get(u, ground_z);
        std::size_t bot_v = store.get(v, ground_z);
        std::vector<std::size_t> ring{top_v, top_u, bot_u, bot_v};
        ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
        while (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
        if (ring.size() < 3)
            throw AssemblyFailure("assemble_mesh: degenerate boundary wall");
        MeshFacet facet;
        facet.role = FacetRole::wall;
        facet.ring = std::move(ring);
        facet.plane = wall_plane_from_ring(store.points, facet.ring);
        mesh.facets.push_back(std::move(facet));
    }

    // Ground facets from the plan outline loops.
    auto loops = walk_directed_loops(partition.vertices, boundary);
    struct GroundLoop {
        std::vector<std::size_t> corners;
        double area;
    };
    std::vector<GroundLoop> outers, holes;
    for (auto& loop : loops) {
        std::vector<Point2> ring;
        for (auto c : loop) ring.push_back(partition.vertices[c]);
        double a = ring_signed_area(ring);
        if (a > 0.0) outers.push_back({std::move(loop), a});
        else holes.push_back({std::move(loop), a});
    }
    if (outers.empty()) throw AssemblyFailure("assemble_mesh: no ground outline");
    std::vector<MeshFacet> ground(outers.size());
    for (std::size_t o = 0; o < outers.size(); ++o) {
        ground[o].role = FacetRole::ground;
        ground[o].plane = Plane3{{0, 0, -1}, ground_z};
        for (auto it = outers[o].corners.rbegin(); it != outers[o].corners.rend(); ++it)
            ground[o].ring.push_back(store.get(*it, ground_z));
    }
    for (auto& hole : holes) {
        // Attach to the smallest containing outer loop.
        Point2 probe = partition.vertices[hole.corners.front()];
        std::size_t best = SIZE_MAX;
        double best_area = std::numeric_limits<double>::infinity();
        for (std::size_t o = 0; o < outers.size(); ++o) {
            std::vector<Point2> ring;
            for (auto c : outers[o].corners) ring.push_back(partition.vertices[c]);
            if (!ring_contains(ring, probe)) continue;
            if (outers[o].area < best_area) {
                best_area = outers[o].area;
                best = o;
            }
        }
        if (best == SIZE_MAX)
            throw AssemblyFailure("assemble_mesh: dangling ground hole");
        std::vector<std::size_t> ring;
        for (auto it = hole.corners.rbegin(); it != hole.corners.rend(); ++it)
            ring.push_back(store.get(*it, ground_z));
        ground[best].holes.push_back(std::move(ring));
    }
    for (auto& g : ground) mesh.facets.push_back(std::move(g));

    mesh.vertices = store.points;

    // Merge adjacent coplanar walls sharing a full vertical edge.
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < mesh.facets.size() && !merged; ++i) {
            if (mesh.facets[i].role != FacetRole::wall) continue;
            for (std::size_t j = i + 1; j < mesh.facets.size() && !merged; ++j) {
                if (mesh.facets[j].role != FacetRole::wall) continue;
                MeshFacet& fi = mesh.facets[i];
                MeshFacet& fj = mesh.facets[j];
                if (std::abs(fi.plane.n.dot(fj.plane.n)) < 1.0 - 1e-12) continue;
                // Same supporting plane?
                bool coplanar = true;
                for (auto v : fj.ring)
                    if (fi.plane.distance(mesh.vertices[v]) > 1e-9) coplanar = false;
                if (!coplanar) continue;
                // Find one shared opposite directed edge.
                std::size_t pi = SIZE_MAX, pj = SIZE_MAX;
                for (std::size_t a = 0; a < fi.ring.size() && pi == SIZE_MAX; ++a) {
                    std::size_t u = fi.ring[a], v = fi.ring[(a + 1) % fi.ring.size()];
                    for (std::size_t bidx = 0; bidx < fj.ring.size(); ++bidx) {
                        if (fj.ring[bidx] == v &&
                            fj.ring[(bidx + 1) % fj.ring.size()] == u) {
                            pi = a;
                            pj = bidx;
                            break;
                        }
                    }
                }
                if (pi == SIZE_MAX) continue;
                // Splice: all of fi starting after the shared edge, then fj's
                // interior path (shared endpoints excluded).
                std::vector<std::size_t> merged_ring;
                for (std::size_t k = 0; k < fi.ring.size(); ++k)
                    merged_ring.push_back(fi.ring[(pi + 1 + k) % fi.ring.size()]);
                for (std::size_t k = 1; k + 1 < fj.ring.size(); ++k)
                    merged_ring.push_back(fj.ring[(pj + 1 + k) % fj.ring.size()]);
                // Reject non-simple results (other shared vertices).
                std::set<std::size_t> uniq(merged_ring.begin(), merged_ring.end());
                if (uniq.size() != merged_ring.size()) continue;
                fi.ring = std::move(merged_ring);
                fi.plane = wall_plane_from_ring(mesh.vertices, fi.ring);
                mesh.facets.erase(mesh.facets.begin() + static_cast<std::ptrdiff_t>(j));
                merged = true;
            }
        }
    }

    // Split facet edges passing through existing vertices (T-junctions on
    // vertical edges after merging classes).
    for (auto& facet : mesh.facets) {
        auto split_ring = [&](std::vector<std::size_t>& ring) {
            bool changed = true;
            while (changed) {
                changed = false;
                for (std::size_t i = 0; i < ring.size() && !changed; ++i) {
                    const Point3& p = mesh.vertices[ring[i]];
                    const Point3& q = mesh.vertices[ring[(i + 1) % ring.size()]];
                    for (std::size_t w = 0; w < mesh.vertices.size(); ++w) {
                        if (w == ring[i] || w == ring[(i + 1) % ring.size()]) continue;
                        const Point3& m = mesh.vertices[w];
                        if (point_segment_distance3(m, p, q) > 1e-9) continue;
                        if ((m - p).norm() < 1e-9 || (m - q).norm() < 1e-9) continue;
                        ring.insert(ring.begin() + static_cast<std::ptrdiff_t>(i) + 1, w);
                        changed = true;
                        break;
                    }
                }
            }
        };
        split_ring(facet.ring);
        for (auto& h : facet.holes) split_ring(h);
    }

    // Drop collinear vertices used by exactly two facets.
    bool cleaned = true;
    while (cleaned) {
        cleaned = false;
        std::vector<int> use_count(mesh.vertices.size(), 0);
        for (const auto& f : mesh.facets) {
            for (auto v : f.ring) use_count[v]++;
            for (const auto& h : f.holes)
                for (auto v : h) use_count[v]++;
        }
        for (std::size_t w = 0; w < mesh.vertices.size() && !cleaned; ++w) {
            if (use_count[w] != 2) continue;
            // Check collinearity in both facets that use it.
            bool removable = true;
            std::vector<std::pair<MeshFacet*, std::vector<std::size_t>*>> users;
            for (auto& f : mesh.facets) {
                auto consider = [&](std::vector<std::size_t>& ring) {
                    for (std::size_t i = 0; i < ring.size(); ++i) {
                        if (ring[i] != w) continue;
                        users.push_back({&f, &ring});
                        const Point3& prev = mesh.vertices[ring[(i + ring.size() - 1) % ring.size()]];
                        const Point3& next = mesh.vertices[ring[(i + 1) % ring.size()]];
                        Vec3 d0 = mesh.vertices[w] - prev;
                        Vec3 d1 = next - mesh.vertices[w];
                        if (d0.cross(d1).norm() > 1e-9 * d0.norm() * d1.norm() ||
                            d0.dot(d1) <= 0.0)
                            removable = false;
                        if (ring.size() <= 3) removable = false;
                    }
                };
                consider(f.ring);
                for (auto& h : f.holes) consider(h);
            }
            if (users.size() != 2 || !removable) continue;
            for (auto& [f, ring] : users)
                ring->erase(std::remove(ring->begin(), ring->end(), w), ring->end());
            cleaned = true;
        }
    }

    // Compact unused vertices.
    {
        std::vector<int> remap(mesh.vertices.size(), -1);
        std::vector<Point3> packed;
        auto touch = [&](std::vector<std::size_t>& ring) {
            for (auto& v : ring) {
                if (remap[v] < 0) {
                    remap[v] = static_cast<int>(packed.size());
                    packed.push_back(mesh.vertices[v]);
                }
                v = static_cast<std::size_t>(remap[v]);
            }
        };
        for (auto& f : mesh.facets) {
            touch(f.ring);
            for (auto& h : f.holes) touch(h);
        }
        mesh.vertices = std::move(packed);
    }

    auto report = check_mesh(mesh);
    if (!report.ok())
        throw AssemblyFailure("assemble_mesh: " + report.first_violation);
    return mesh;
}

} // namespace lod2rec
