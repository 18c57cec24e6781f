#include "lod2rec/partition.hpp"

#include "lod2rec/clip.hpp"
#include "lod2rec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace lod2rec {

Polygon2 Partition2D::cell_polygon(std::size_t cell) const {
    Polygon2 poly;
    const PartitionCell& c = cells[cell];
    poly.outer.reserve(c.outer.size());
    for (auto v : c.outer) poly.outer.push_back(vertices[v]);
    for (const auto& hole : c.holes) {
        std::vector<Point2> ring;
        ring.reserve(hole.size());
        for (auto v : hole) ring.push_back(vertices[v]);
        poly.holes.push_back(std::move(ring));
    }
    return poly;
}

Point2 Partition2D::cell_interior_point(std::size_t cell) const {
    Polygon2 poly = cell_polygon(cell);
    auto tri = triangulate_polygon(poly);
    double best = -1.0;
    Point2 out = poly.outer.front();
    for (const auto& t : tri.triangles) {
        Point2 a = tri.points[t[0]], b = tri.points[t[1]], c = tri.points[t[2]];
        double area = std::abs((b - a).cross(c - a));
        if (area > best) {
            best = area;
            out = (a + b + c) / 3.0;
        }
    }
    return out;
}

namespace {

struct WeldedPoints {
    std::vector<Point2> points;

    // Returns the id of the welded point for p, inserting if new.
    std::size_t add(Point2 p) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            if ((points[i] - p).norm() <= eps_geom) return i;
        }
        points.push_back(p);
        return points.size() - 1;
    }
};

struct HalfEdge {
    std::size_t from, to;
    std::size_t twin = 0;
    std::size_t next = 0;
    int face = -1;
};

} // namespace

Partition2D assemble_partition(std::span<const SoupSegment> segments, Rect bbox) {
    // Bbox boundary participates as four barrier segments.
    std::vector<SoupSegment> all(segments.begin(), segments.end());
    Point2 c00 = bbox.lo, c10{bbox.hi.x, bbox.lo.y}, c11 = bbox.hi, c01{bbox.lo.x, bbox.hi.y};
    for (auto [a, b] : {std::pair{c00, c10}, {c10, c11}, {c11, c01}, {c01, c00}})
        all.push_back({{a, b, SegmentKind::footprint}, 0, 0});
    const std::size_t n_real = segments.size();

    // Candidate vertices: endpoints and pairwise transversal crossings.
    WeldedPoints weld;
    for (const auto& s : all) {
        weld.add(s.seg.a);
        weld.add(s.seg.b);
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            auto q = segment_intersection_2d(all[i].seg, all[j].seg, eps_geom);
            if (q) weld.add(*q);
        }
    }

    // Split every segment at the welded vertices lying on it.
    struct EdgeRec {
        SegmentKind kind;
        bool footprint;
    };
    std::map<std::pair<std::size_t, std::size_t>, EdgeRec> edge_set;
    auto kind_rank = [](SegmentKind k) {
        return k == SegmentKind::footprint ? 2 : (k == SegmentKind::discontinuity ? 1 : 0);
    };
    for (std::size_t si = 0; si < all.size(); ++si) {
        const Segment2& s = all[si].seg;
        double len = s.length();
        if (len < eps_geom) continue;
        Vec2 dir = (s.b - s.a) / len;
        std::vector<std::pair<double, std::size_t>> on_seg;
        for (std::size_t v = 0; v < weld.points.size(); ++v) {
            Point2 p = weld.points[v];
            double t = (p - s.a).dot(dir);
            if (t < -eps_geom || t > len + eps_geom) continue;
            double lateral = std::abs(dir.cross(p - s.a));
            if (lateral > eps_geom) continue;
            on_seg.push_back({t, v});
        }
        std::sort(on_seg.begin(), on_seg.end());
        for (std::size_t k = 0; k + 1 < on_seg.size(); ++k) {
            std::size_t u = on_seg[k].second, v = on_seg[k + 1].second;
            if (u == v) continue;
            auto key = std::minmax(u, v);
            bool fp = si >= n_real || s.kind == SegmentKind::footprint;
            auto [it, fresh] = edge_set.try_emplace({key.first, key.second},
                                                    EdgeRec{s.kind, fp});
            if (!fresh) {
                if (kind_rank(s.kind) > kind_rank(it->second.kind)) it->second.kind = s.kind;
                it->second.footprint |= fp;
            }
        }
    }

    Partition2D part;
    part.bbox = bbox;
    part.vertices = weld.points;

    // Half-edge structure with angular next-pointers.
    std::vector<HalfEdge> hes;
    std::vector<std::pair<std::size_t, std::size_t>> undirected;
    for (const auto& [key, rec] : edge_set) {
        std::size_t h0 = hes.size();
        hes.push_back({key.first, key.second});
        hes.push_back({key.second, key.first});
        hes[h0].twin = h0 + 1;
        hes[h0 + 1].twin = h0;
        undirected.push_back(key);
        PartitionEdge e;
        e.a = key.first;
        e.b = key.second;
        e.kind = rec.kind;
        // Re-derive footprint membership from the original input only: the
        // bbox frame must not count.
        e.on_footprint = false;
        part.edges.push_back(e);
    }
    for (std::size_t si = 0; si < n_real; ++si) {
        if (all[si].seg.kind != SegmentKind::footprint) continue;
        const Segment2& s = all[si].seg;
        Vec2 dir = s.direction();
        double len = s.length();
        for (auto& e : part.edges) {
            Point2 m = (part.vertices[e.a] + part.vertices[e.b]) * 0.5;
            double t = (m - s.a).dot(dir);
            if (t < -eps_geom || t > len + eps_geom) continue;
            if (std::abs(dir.cross(m - s.a)) <= eps_geom) e.on_footprint = true;
        }
    }

    // Outgoing half-edges per vertex, sorted counter-clockwise by angle.
    std::vector<std::vector<std::size_t>> out_of(part.vertices.size());
    for (std::size_t h = 0; h < hes.size(); ++h) out_of[hes[h].from].push_back(h);
    for (std::size_t v = 0; v < out_of.size(); ++v) {
        auto& lst = out_of[v];
        std::sort(lst.begin(), lst.end(), [&](std::size_t ha, std::size_t hb) {
            Vec2 da = part.vertices[hes[ha].to] - part.vertices[v];
            Vec2 db = part.vertices[hes[hb].to] - part.vertices[v];
            double aa = std::atan2(da.y, da.x), ab = std::atan2(db.y, db.x);
            if (aa != ab) return aa < ab;
            return ha < hb;
        });
    }
    // next(h) = clockwise successor of twin(h) around head(h).
    for (std::size_t h = 0; h < hes.size(); ++h) {
        std::size_t v = hes[h].to;
        const auto& lst = out_of[v];
        std::size_t tw = hes[h].twin;
        auto it = std::find(lst.begin(), lst.end(), tw);
        std::size_t pos = static_cast<std::size_t>(it - lst.begin());
        std::size_t prev = (pos + lst.size() - 1) % lst.size();
        hes[h].next = lst[prev];
    }

    // Face extraction.
    struct FaceLoop {
        std::vector<std::size_t> hedges;
        double area = 0.0;
    };
    std::vector<FaceLoop> loops;
    for (std::size_t h = 0; h < hes.size(); ++h) {
        if (hes[h].face >= 0) continue;
        FaceLoop loop;
        std::size_t cur = h;
        int fid = static_cast<int>(loops.size());
        do {
            hes[cur].face = fid;
            loop.hedges.push_back(cur);
            cur = hes[cur].next;
        } while (cur != h);
        double area = 0.0;
        for (auto he : loop.hedges) {
            Point2 p = part.vertices[hes[he].from];
            Point2 q = part.vertices[hes[he].to];
            area += p.x * q.y - q.x * p.y;
        }
        loop.area = 0.5 * area;
        loops.push_back(std::move(loop));
    }

    // Positive loops become cells; negative loops are component contours.
    std::vector<int> loop_to_cell(loops.size(), -1);
    for (std::size_t l = 0; l < loops.size(); ++l) {
        if (loops[l].area <= 0.0) continue;
        PartitionCell cell;
        for (auto he : loops[l].hedges) cell.outer.push_back(hes[he].from);
        cell.area = loops[l].area;
        loop_to_cell[l] = static_cast<int>(part.cells.size());
        part.cells.push_back(std::move(cell));
    }

    // Attach island contours (negative loops other than the global outer one)
    // as holes of the smallest containing cell.
    for (std::size_t l = 0; l < loops.size(); ++l) {
        if (loops[l].area > 0.0) continue;
        Point2 probe = part.vertices[hes[loops[l].hedges.front()].from];
        // The global outer loop walks the bbox corners; identify it by probe
        // on the bbox boundary.
        bool on_bbox = std::abs(probe.x - bbox.lo.x) < eps_geom ||
                       std::abs(probe.x - bbox.hi.x) < eps_geom ||
                       std::abs(probe.y - bbox.lo.y) < eps_geom ||
                       std::abs(probe.y - bbox.hi.y) < eps_geom;
        if (on_bbox) continue;
        int best_cell = -1;
        double best_area = std::numeric_limits<double>::infinity();
        for (std::size_t ci = 0; ci < part.cells.size(); ++ci) {
            std::vector<Point2> ring;
            ring.reserve(part.cells[ci].outer.size());
            for (auto v : part.cells[ci].outer) ring.push_back(part.vertices[v]);
            // Skip the island's own cells: their outer rings touch the probe.
            bool touches = false;
            for (auto v : part.cells[ci].outer)
                if (v == hes[loops[l].hedges.front()].from) touches = true;
            if (touches) continue;
            if (!ring_contains(ring, probe)) continue;
            if (part.cells[ci].area < best_area) {
                best_area = part.cells[ci].area;
                best_cell = static_cast<int>(ci);
            }
        }
        if (best_cell >= 0) {
            std::vector<std::size_t> hole;
            for (auto he : loops[l].hedges) hole.push_back(hes[he].from);
            part.cells[best_cell].area -= std::abs(loops[l].area);
            part.cells[best_cell].holes.push_back(std::move(hole));
            loop_to_cell[l] = best_cell;
        }
    }

    // Left/right cells per undirected edge.
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_index;
    for (std::size_t e = 0; e < part.edges.size(); ++e)
        edge_index[{part.edges[e].a, part.edges[e].b}] = e;
    for (std::size_t h = 0; h < hes.size(); h += 2) {
        auto key = std::minmax(hes[h].from, hes[h].to);
        std::size_t e = edge_index[{key.first, key.second}];
        int f_fwd = loop_to_cell[static_cast<std::size_t>(hes[h].face)];
        int f_rev = loop_to_cell[static_cast<std::size_t>(hes[h + 1].face)];
        if (hes[h].from == part.edges[e].a) {
            part.edges[e].left = f_fwd;
            part.edges[e].right = f_rev;
        } else {
            part.edges[e].left = f_rev;
            part.edges[e].right = f_fwd;
        }
    }

    return part;
}

Partition2D partition_from_cells(std::vector<Point2> vertices,
                                 std::vector<PartitionCell> cells,
                                 const Polygon2* footprint) {
    Partition2D p;
    p.vertices = std::move(vertices);
    p.cells = std::move(cells);

    Point2 lo = p.vertices.front(), hi = lo;
    for (const auto& v : p.vertices) {
        lo.x = std::min(lo.x, v.x); lo.y = std::min(lo.y, v.y);
        hi.x = std::max(hi.x, v.x); hi.y = std::max(hi.y, v.y);
    }
    p.bbox = {lo - Vec2{1, 1}, hi + Vec2{1, 1}};

    for (auto& c : p.cells) {
        std::vector<Point2> ring;
        for (auto v : c.outer) ring.push_back(p.vertices[v]);
        c.area = ring_signed_area(ring);
        for (const auto& h : c.holes) {
            std::vector<Point2> hr;
            for (auto v : h) hr.push_back(p.vertices[v]);
            c.area += ring_signed_area(hr);
        }
    }

    std::map<std::pair<std::size_t, std::size_t>, PartitionEdge> edge_map;
    for (std::size_t ci = 0; ci < p.cells.size(); ++ci) {
        auto note = [&](const std::vector<std::size_t>& ring) {
            for (std::size_t i = 0; i < ring.size(); ++i) {
                std::size_t u = ring[i], v = ring[(i + 1) % ring.size()];
                auto key = std::minmax(u, v);
                auto [it, fresh] = edge_map.try_emplace({key.first, key.second});
                if (fresh) {
                    it->second.a = key.first;
                    it->second.b = key.second;
                }
                if (u == it->second.a) it->second.left = static_cast<int>(ci);
                else it->second.right = static_cast<int>(ci);
            }
        };
        note(p.cells[ci].outer);
        for (const auto& h : p.cells[ci].holes) note(h);
    }
    for (auto& [key, e] : edge_map) {
        if (footprint) {
            Point2 m = (p.vertices[e.a] + p.vertices[e.b]) * 0.5;
            auto on_ring = [&](const std::vector<Point2>& ring) {
                for (std::size_t i = 0; i < ring.size(); ++i) {
                    if (point_segment_distance(m, ring[i], ring[(i + 1) % ring.size()]) <=
                        eps_geom)
                        return true;
                }
                return false;
            };
            e.on_footprint = on_ring(footprint->outer);
            for (const auto& h : footprint->holes) e.on_footprint |= on_ring(h);
            if (e.on_footprint) e.kind = SegmentKind::footprint;
        }
        p.edges.push_back(e);
    }
    return p;
}

Partition2D remove_collinear_vertices(const Partition2D& p, double angle_tol) {
    std::vector<int> degree(p.vertices.size(), 0);
    std::vector<std::array<std::size_t, 2>> vertex_edges(p.vertices.size(),
                                                         {SIZE_MAX, SIZE_MAX});
    for (std::size_t e = 0; e < p.edges.size(); ++e) {
        for (std::size_t v : {p.edges[e].a, p.edges[e].b}) {
            if (degree[v] == 0) vertex_edges[v][0] = e;
            else if (degree[v] == 1) vertex_edges[v][1] = e;
            degree[v]++;
        }
    }
    std::vector<char> removable(p.vertices.size(), 0);
    bool any = false;
    for (std::size_t v = 0; v < p.vertices.size(); ++v) {
        if (degree[v] != 2) continue;
        const auto& e0 = p.edges[vertex_edges[v][0]];
        const auto& e1 = p.edges[vertex_edges[v][1]];
        std::size_t u = e0.a == v ? e0.b : e0.a;
        std::size_t w = e1.a == v ? e1.b : e1.a;
        if (u == w) continue;
        Vec2 d0 = (p.vertices[v] - p.vertices[u]).normalized();
        Vec2 d1 = (p.vertices[w] - p.vertices[v]).normalized();
        if (std::abs(d0.cross(d1)) < angle_tol && d0.dot(d1) > 0.0) {
            removable[v] = 1;
            any = true;
        }
    }
    if (!any) return p;

    Partition2D out = p;
    for (auto& cell : out.cells) {
        auto strip = [&](std::vector<std::size_t>& ring) {
            std::vector<std::size_t> kept;
            for (auto v : ring)
                if (!removable[v]) kept.push_back(v);
            if (kept.size() >= 3) ring = std::move(kept);
        };
        strip(cell.outer);
        for (auto& h : cell.holes) strip(h);
    }
    // Rebuild the edge table by splicing chains through removed vertices.
    std::vector<PartitionEdge> edges;
    std::vector<char> consumed(out.edges.size(), 0);
    for (std::size_t e = 0; e < out.edges.size(); ++e) {
        if (consumed[e]) continue;
        PartitionEdge cur = out.edges[e];
        consumed[e] = 1;
        // Extend through removable endpoints in both directions.
        for (int side = 0; side < 2; ++side) {
            for (;;) {
                std::size_t tip = side == 0 ? cur.a : cur.b;
                if (!removable[tip]) break;
                std::size_t other = vertex_edges[tip][0];
                if (consumed[other] || other == SIZE_MAX) other = vertex_edges[tip][1];
                if (other == SIZE_MAX || consumed[other]) break;
                consumed[other] = 1;
                const auto& ext = out.edges[other];
                std::size_t far = ext.a == tip ? ext.b : ext.a;
                if (side == 0) cur.a = far;
                else cur.b = far;
                cur.on_footprint |= ext.on_footprint;
            }
        }
        if (cur.a == cur.b) continue;
        if (cur.a > cur.b) {
            std::swap(cur.a, cur.b);
            std::swap(cur.left, cur.right);
        }
        edges.push_back(cur);
    }
    out.edges = std::move(edges);
    return out;
}

PartitionDiagnostics check_partition(const Partition2D& p) {
    PartitionDiagnostics d;
    d.vertices = p.vertices.size();
    d.edges = p.edges.size();
    d.bounded_cells = p.cells.size();

    // Connected components of the edge graph.
    std::vector<std::size_t> parent(p.vertices.size());
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : p.edges) parent[find(e.a)] = find(e.b);
    std::vector<char> seen(p.vertices.size(), 0);
    std::size_t comps = 0;
    std::vector<char> used(p.vertices.size(), 0);
    for (const auto& e : p.edges) used[e.a] = used[e.b] = 1;
    for (std::size_t v = 0; v < p.vertices.size(); ++v) {
        if (!used[v]) continue;
        std::size_t r = find(v);
        if (!seen[r]) {
            seen[r] = 1;
            ++comps;
        }
    }
    d.components = comps;

    // Every edge borders two distinct faces (exterior counted as one face).
    for (const auto& e : p.edges) {
        if (e.left == e.right) {
            d.ok = false;
            d.violation = "dangling edge (same cell on both sides)";
            return d;
        }
    }

    // Edges meet only at shared endpoints.
    for (std::size_t i = 0; i < p.edges.size(); ++i) {
        Segment2 si{p.vertices[p.edges[i].a], p.vertices[p.edges[i].b]};
        for (std::size_t j = i + 1; j < p.edges.size(); ++j) {
            if (p.edges[i].a == p.edges[j].a || p.edges[i].a == p.edges[j].b ||
                p.edges[i].b == p.edges[j].a || p.edges[i].b == p.edges[j].b)
                continue;
            Segment2 sj{p.vertices[p.edges[j].a], p.vertices[p.edges[j].b]};
            auto hit = segment_intersection_2d(si, sj, 0.0);
            if (hit) {
                // Crossing depth: distance from the crossing to the nearest
                // endpoint of either edge. Near-zero means an unwelded touch.
                double depth = std::min(std::min((si.a - *hit).norm(), (si.b - *hit).norm()),
                                        std::min((sj.a - *hit).norm(), (sj.b - *hit).norm()));
                d.worst_edge_clearance = std::max(d.worst_edge_clearance, depth);
                if (depth > eps_geom) {
                    d.ok = false;
                    d.violation = "edge crossing away from shared endpoints";
                    return d;
                }
            }
        }
    }

    // Euler relation: V - E + F_bounded + 1 == 1 + C.
    long long euler = static_cast<long long>(d.vertices) - static_cast<long long>(d.edges) +
                      static_cast<long long>(d.bounded_cells);
    if (euler != static_cast<long long>(d.components)) {
        d.ok = false;
        d.violation = "Euler relation violated";
        return d;
    }

    double total = 0.0;
    for (const auto& c : p.cells) total += c.area;
    double rel = std::abs(total - p.bbox.area()) / std::max(p.bbox.area(), 1e-12);
    d.worst_area_mismatch = rel;
    if (rel > 1e-6) {
        d.ok = false;
        d.violation = "cell areas do not tile the bbox";
        return d;
    }

    return d;
}

PartitionDiagnostics validate_partition(const Partition2D& p) {
    PartitionDiagnostics d = check_partition(p);
    if (!d.ok) throw InvalidPartition("validate_partition: " + d.violation);
    return d;
}

} // namespace lod2rec
