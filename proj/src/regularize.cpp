#include "lod2rec/regularize.hpp"

#include "lod2rec/errors.hpp"
#include "lod2rec/lsq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>

namespace lod2rec {

namespace {
constexpr double kPi = 3.141592653589793;
constexpr double kHalfPi = kPi / 2.0;

double fold_pi(double a) {
    a = std::fmod(a, kPi);
    if (a < 0.0) a += kPi;
    return a;
}

double fold_half_pi(double a) {
    a = std::fmod(a, kHalfPi);
    if (a < 0.0) a += kHalfPi;
    return a;
}

// Distance between two angles on the mod-pi circle.
double angle_dist_pi(double a, double b) {
    double d = std::abs(fold_pi(a) - fold_pi(b));
    return std::min(d, kPi - d);
}

double angle_dist_half_pi(double a, double b) {
    double d = std::abs(fold_half_pi(a) - fold_half_pi(b));
    return std::min(d, kHalfPi - d);
}

double edge_length(const Partition2D& p, const PartitionEdge& e) {
    return (p.vertices[e.b] - p.vertices[e.a]).norm();
}

} // namespace

double edge_angle(const Partition2D& partition, const PartitionEdge& e) {
    Vec2 d = partition.vertices[e.b] - partition.vertices[e.a];
    return fold_pi(std::atan2(d.y, d.x));
}

RegularityGraph build_regularity_graph(const Partition2D& partition,
                                       const Regularize2DParams& params) {
    RegularityGraph graph;
    const std::size_t ne = partition.edges.size();
    std::vector<double> angles(ne), lengths(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        angles[e] = edge_angle(partition, partition.edges[e]);
        lengths[e] = edge_length(partition, partition.edges[e]);
    }

    const double par_tol = params.parallel_tol_deg * kPi / 180.0;
    const double ortho_tol = params.ortho_tol_deg * kPi / 180.0;
    const double exact_tol = 1e-7;

    for (std::size_t i = 0; i < ne; ++i) {
        for (std::size_t j = i + 1; j < ne; ++j) {
            double d = angle_dist_pi(angles[i], angles[j]);
            bool both_fp = partition.edges[i].on_footprint && partition.edges[j].on_footprint;
            if (d <= par_tol) {
                // Footprint edge directions are immutable; only keep links
                // between them when already exact.
                if (both_fp && d > exact_tol) continue;
                graph.links.push_back({i, j, Relation::parallel});
            } else if (std::abs(d - kHalfPi) <= ortho_tol) {
                if (both_fp && std::abs(d - kHalfPi) > exact_tol) continue;
                graph.links.push_back({i, j, Relation::orthogonal});
            }
        }
    }

    auto rebuild_classes = [&]() {
        graph.classes.clear();
        graph.edge_class.assign(ne, -1);
        std::vector<std::size_t> parent(ne);
        std::iota(parent.begin(), parent.end(), 0u);
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const auto& l : graph.links) parent[find(l.edge_a)] = find(l.edge_b);

        std::map<std::size_t, std::size_t> root_to_class;
        for (const auto& l : graph.links) {
            for (std::size_t e : {l.edge_a, l.edge_b}) {
                std::size_t r = find(e);
                if (!root_to_class.count(r)) {
                    root_to_class[r] = graph.classes.size();
                    graph.classes.push_back({});
                }
                auto& members = graph.classes[root_to_class[r]].members;
                if (std::find(members.begin(), members.end(), e) == members.end()) {
                    members.push_back(e);
                    graph.edge_class[e] = static_cast<int>(root_to_class[r]);
                }
            }
        }
        for (auto& cls : graph.classes) std::sort(cls.members.begin(), cls.members.end());

        for (auto& cls : graph.classes) {
            // Anchored classes take the longest footprint member's direction;
            // free classes take the length-weighted circular mean (quadruple
            // angle trick folds the parallel/orthogonal branches together).
            double best_len = -1.0;
            for (auto e : cls.members) {
                if (partition.edges[e].on_footprint && lengths[e] > best_len) {
                    best_len = lengths[e];
                    cls.target_angle = fold_half_pi(angles[e]);
                    cls.anchored = true;
                }
            }
            if (!cls.anchored) {
                double sx = 0.0, sy = 0.0;
                for (auto e : cls.members) {
                    sx += lengths[e] * std::cos(4.0 * angles[e]);
                    sy += lengths[e] * std::sin(4.0 * angles[e]);
                }
                cls.target_angle = fold_half_pi(std::atan2(sy, sx) / 4.0);
            }
            cls.branch.resize(cls.members.size());
            for (std::size_t m = 0; m < cls.members.size(); ++m) {
                double a = angles[cls.members[m]];
                double d0 = angle_dist_pi(a, cls.target_angle);
                double d1 = angle_dist_pi(a, cls.target_angle + kHalfPi);
                cls.branch[m] = d0 <= d1 ? 0 : 1;
            }
        }
    };

    rebuild_classes();

    // Relation cycles can imply contradictions; drop the weakest link of the
    // worst class until every member sits within tolerance of its branch.
    // Footprint members of anchored classes must agree with the anchor
    // essentially exactly, since their directions cannot move.
    const double max_tol = std::max(par_tol, ortho_tol);
    for (std::size_t guard = 0; guard < graph.links.size() + 1; ++guard) {
        std::size_t worst_edge = SIZE_MAX;
        double worst_excess = 0.0;
        for (const auto& cls : graph.classes) {
            for (std::size_t m = 0; m < cls.members.size(); ++m) {
                double resid = angle_dist_half_pi(angles[cls.members[m]], cls.target_angle);
                bool locked = cls.anchored && partition.edges[cls.members[m]].on_footprint;
                double excess = resid - (locked ? exact_tol : max_tol);
                if (excess > worst_excess) {
                    worst_excess = excess;
                    worst_edge = cls.members[m];
                }
            }
        }
        if (worst_edge == SIZE_MAX) break;
        // Remove the incident link with the least edge-length support.
        std::size_t drop = SIZE_MAX;
        double drop_support = std::numeric_limits<double>::infinity();
        for (std::size_t li = 0; li < graph.links.size(); ++li) {
            const auto& l = graph.links[li];
            if (l.edge_a != worst_edge && l.edge_b != worst_edge) continue;
            double support = std::min(lengths[l.edge_a], lengths[l.edge_b]);
            if (support < drop_support) {
                drop_support = support;
                drop = li;
            }
        }
        if (drop == SIZE_MAX) break;
        graph.links.erase(graph.links.begin() + static_cast<std::ptrdiff_t>(drop));
        rebuild_classes();
    }

    return graph;
}

namespace {

bool ring_ok(const Partition2D& p, const std::vector<std::size_t>& ring, bool outer) {
    if (ring.size() < 3) return false;
    std::vector<Point2> pts;
    pts.reserve(ring.size());
    for (auto v : ring) pts.push_back(p.vertices[v]);
    double area = ring_signed_area(pts);
    if (outer && area <= 0.0) return false;
    if (!outer && area >= 0.0) return false;
    return ring_is_simple(pts);
}

bool cells_ok(const Partition2D& p) {
    for (const auto& c : p.cells) {
        if (!ring_ok(p, c.outer, true)) return false;
        for (const auto& h : c.holes)
            if (!ring_ok(p, h, false)) return false;
    }
    return true;
}

std::vector<char> footprint_vertex_flags(const Partition2D& p) {
    std::vector<char> flags(p.vertices.size(), 0);
    for (const auto& e : p.edges) {
        if (!e.on_footprint) continue;
        flags[e.a] = flags[e.b] = 1;
    }
    return flags;
}

void refresh_cell_areas(Partition2D& p) {
    for (auto& c : p.cells) {
        std::vector<Point2> ring;
        ring.reserve(c.outer.size());
        for (auto v : c.outer) ring.push_back(p.vertices[v]);
        double area = ring_signed_area(ring);
        for (const auto& h : c.holes) {
            std::vector<Point2> hr;
            hr.reserve(h.size());
            for (auto v : h) hr.push_back(p.vertices[v]);
            area += ring_signed_area(hr);  // holes are CW (negative)
        }
        c.area = area;
    }
}

} // namespace

namespace {

// A footprint vertex is a corner when two incident footprint edges have
// genuinely different directions; corners are pinned, mid-edge vertices may
// slide along their line.
std::vector<char> footprint_corner_flags(const Partition2D& p) {
    std::vector<char> corner(p.vertices.size(), 0);
    std::vector<std::vector<Vec2>> dirs(p.vertices.size());
    for (const auto& e : p.edges) {
        if (!e.on_footprint) continue;
        Vec2 d = (p.vertices[e.b] - p.vertices[e.a]).normalized();
        dirs[e.a].push_back(d);
        dirs[e.b].push_back(d);
    }
    for (std::size_t v = 0; v < p.vertices.size(); ++v) {
        for (std::size_t i = 0; i < dirs[v].size(); ++i)
            for (std::size_t j = i + 1; j < dirs[v].size(); ++j)
                if (std::abs(dirs[v][i].cross(dirs[v][j])) > 1e-9) corner[v] = 1;
    }
    return corner;
}

} // namespace

CollapseResult collapse_short_edges(const Partition2D& partition, double tau_h) {
    CollapseResult result;
    Partition2D p = partition;
    std::vector<int> edge_map(partition.edges.size());
    std::iota(edge_map.begin(), edge_map.end(), 0);
    auto fp_vertex = footprint_vertex_flags(p);
    auto fp_corner = footprint_corner_flags(p);

    // alive[e], endpoints tracked in p.edges; rings rewritten on the fly.
    std::vector<char> alive(p.edges.size(), 1);

    using QEntry = std::pair<double, std::size_t>;
    std::priority_queue<QEntry, std::vector<QEntry>, std::greater<QEntry>> queue;
    for (std::size_t e = 0; e < p.edges.size(); ++e) {
        double len = edge_length(p, p.edges[e]);
        if (len < tau_h) queue.push({len, e});
    }

    auto replace_in_rings = [&](std::size_t from, std::size_t to) {
        auto fix_ring = [&](std::vector<std::size_t>& ring) {
            for (auto& v : ring)
                if (v == from) v = to;
            // Drop immediate duplicates created by the contraction.
            std::vector<std::size_t> cleaned;
            for (std::size_t i = 0; i < ring.size(); ++i) {
                if (cleaned.empty() || cleaned.back() != ring[i]) cleaned.push_back(ring[i]);
            }
            while (cleaned.size() > 1 && cleaned.front() == cleaned.back()) cleaned.pop_back();
            ring = std::move(cleaned);
        };
        for (auto& c : p.cells) {
            fix_ring(c.outer);
            for (auto& h : c.holes) fix_ring(h);
        }
    };

    while (!queue.empty()) {
        auto [len, e] = queue.top();
        queue.pop();
        if (!alive[e]) continue;
        double cur_len = edge_length(p, p.edges[e]);
        if (std::abs(cur_len - len) > 1e-12) {
            if (cur_len < tau_h) queue.push({cur_len, e});
            continue;
        }
        if (cur_len >= tau_h) continue;

        std::size_t u = p.edges[e].a, v = p.edges[e].b;
        bool fu = fp_vertex[u], fv = fp_vertex[v];
        std::size_t keep = u, drop = v;
        Point2 new_pos;
        if (fu && fv) {
            // Both on the outline: collapsing is allowed only along a shared
            // footprint line (the vertices keep sliding on it), snapping away
            // from corners.
            if (!p.edges[e].on_footprint) continue;
            bool cu = fp_corner[u], cv = fp_corner[v];
            if (cu && cv) continue;
            if (cv) {
                keep = v;
                drop = u;
            }
            new_pos = cu || cv ? p.vertices[keep]
                               : (p.vertices[u] + p.vertices[v]) * 0.5;
        } else if (fu) {
            new_pos = p.vertices[u];
        } else if (fv) {
            keep = v;
            drop = u;
            new_pos = p.vertices[v];
        } else {
            new_pos = (p.vertices[u] + p.vertices[v]) * 0.5;
        }

        // Tentative application with rollback on inversion.
        Partition2D backup = p;
        p.vertices[keep] = new_pos;
        replace_in_rings(drop, keep);
        bool valid = true;
        for (const auto& c : p.cells) {
            if (c.outer.size() < 3) valid = false;
        }
        if (valid) valid = cells_ok(p);
        if (!valid) {
            p = std::move(backup);
            continue;
        }

        alive[e] = 0;
        // Update edge endpoints; dedupe edges that became parallel copies.
        for (std::size_t k = 0; k < p.edges.size(); ++k) {
            if (!alive[k]) continue;
            if (p.edges[k].a == drop) p.edges[k].a = keep;
            if (p.edges[k].b == drop) p.edges[k].b = keep;
            if (p.edges[k].a == p.edges[k].b) alive[k] = 0;
        }
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
        for (std::size_t k = 0; k < p.edges.size(); ++k) {
            if (!alive[k]) continue;
            auto key = std::minmax(p.edges[k].a, p.edges[k].b);
            auto [it, fresh] = seen.try_emplace({key.first, key.second}, k);
            if (!fresh) {
                alive[k] = 0;
                // Footprint tag wins on merge.
                p.edges[it->second].on_footprint |= p.edges[k].on_footprint;
            }
        }
        fp_vertex[keep] = fp_vertex[keep] || fu || fv;
        // Requeue neighbors whose length changed.
        for (std::size_t k = 0; k < p.edges.size(); ++k) {
            if (!alive[k]) continue;
            if (p.edges[k].a == keep || p.edges[k].b == keep) {
                double l2 = edge_length(p, p.edges[k]);
                if (l2 < tau_h) queue.push({l2, k});
            }
        }
    }

    // Compact the edge table.
    std::vector<PartitionEdge> edges;
    std::vector<int> old_to_new(p.edges.size(), -1);
    for (std::size_t k = 0; k < p.edges.size(); ++k) {
        if (!alive[k]) continue;
        old_to_new[k] = static_cast<int>(edges.size());
        edges.push_back(p.edges[k]);
    }
    p.edges = std::move(edges);
    for (auto& m : edge_map) m = m >= 0 ? old_to_new[static_cast<std::size_t>(m)] : -1;

    refresh_cell_areas(p);
    result.partition = std::move(p);
    result.edge_map = std::move(edge_map);
    return result;
}

namespace {

// Footprint lines (point + unit normal) a vertex must slide along.
struct LineConstraint {
    Point2 p0;
    Vec2 normal;
};

std::vector<std::vector<LineConstraint>> vertex_footprint_lines(const Partition2D& p,
                                                                const Polygon2& footprint) {
    std::vector<std::vector<LineConstraint>> out(p.vertices.size());
    auto add_ring = [&](const std::vector<Point2>& ring) {
        for (std::size_t i = 0; i < ring.size(); ++i) {
            Point2 a = ring[i], b = ring[(i + 1) % ring.size()];
            double len = (b - a).norm();
            if (len < eps_geom) continue;
            Vec2 n = ((b - a) / len).perp();
            for (std::size_t v = 0; v < p.vertices.size(); ++v) {
                if (point_segment_distance(p.vertices[v], a, b) > eps_geom) continue;
                // Avoid duplicate constraints from collinear ring edges.
                bool dup = false;
                for (const auto& lc : out[v])
                    if (std::abs(lc.normal.cross(n)) < 1e-12 &&
                        std::abs((a - lc.p0).dot(lc.normal)) < eps_geom)
                        dup = true;
                if (!dup) out[v].push_back({a, n});
            }
        }
    };
    add_ring(footprint.outer);
    for (const auto& h : footprint.holes) add_ring(h);
    return out;
}

} // namespace

OptimizeResult optimize_vertices(const Partition2D& partition, const RegularityGraph& graph,
                                 const Polygon2& footprint,
                                 const std::vector<int>* edge_map) {
    OptimizeResult result;
    const std::size_t nv = partition.vertices.size();

    // Constraint rows over the 2V coordinate vector. Direction rows are
    // droppable (feasibility recovery); slide rows are not, and they are
    // always feasible since the input vertices already lie on their lines.
    struct RowSpec {
        std::array<std::pair<std::size_t, double>, 4> coeffs;
        std::size_t n_coeffs = 0;
        double rhs = 0.0;
        bool droppable = false;
        double support = 0.0;  // edge length, for the drop order
    };
    std::vector<RowSpec> rows;

    // Classed edges align exactly with their branch direction.
    for (const auto& cls : graph.classes) {
        for (std::size_t m = 0; m < cls.members.size(); ++m) {
            std::size_t graph_edge = cls.members[m];
            int mapped = edge_map ? (*edge_map)[graph_edge] : static_cast<int>(graph_edge);
            if (mapped < 0) continue;  // collapsed away
            const PartitionEdge& e = partition.edges[static_cast<std::size_t>(mapped)];
            if (e.on_footprint) continue;  // direction already locked by slide rows
            double phi = cls.target_angle + (cls.branch[m] == 1 ? kHalfPi : 0.0);
            Vec2 n{-std::sin(phi), std::cos(phi)};
            RowSpec row;
            row.coeffs = {{{2 * e.b, n.x}, {2 * e.b + 1, n.y}, {2 * e.a, -n.x},
                           {2 * e.a + 1, -n.y}}};
            row.n_coeffs = 4;
            row.droppable = true;
            row.support = edge_length(partition, e);
            rows.push_back(row);
        }
    }

    // Footprint vertices slide along their original footprint lines.
    auto slide = vertex_footprint_lines(partition, footprint);
    for (std::size_t v = 0; v < nv; ++v) {
        for (const auto& lc : slide[v]) {
            RowSpec row;
            row.coeffs = {{{2 * v, lc.normal.x}, {2 * v + 1, lc.normal.y}, {0, 0.0}, {0, 0.0}}};
            row.n_coeffs = 2;
            row.rhs = lc.normal.x * lc.p0.x + lc.normal.y * lc.p0.y;
            rows.push_back(row);
        }
    }

    if (rows.empty()) {
        result.partition = partition;
        return result;
    }

    Eigen::VectorXd x0(2 * nv);
    for (std::size_t v = 0; v < nv; ++v) {
        x0[2 * v] = partition.vertices[v].x;
        x0[2 * v + 1] = partition.vertices[v].y;
    }

    std::vector<char> active(rows.size(), 1);
    ConstrainedLsqResult sol;
    for (;;) {
        std::vector<std::size_t> live;
        for (std::size_t r = 0; r < rows.size(); ++r)
            if (active[r]) live.push_back(r);
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(live.size()),
                                                  static_cast<Eigen::Index>(2 * nv));
        Eigen::VectorXd b(static_cast<Eigen::Index>(live.size()));
        for (std::size_t k = 0; k < live.size(); ++k) {
            const RowSpec& row = rows[live[k]];
            for (std::size_t c = 0; c < row.n_coeffs; ++c)
                A(static_cast<Eigen::Index>(k),
                  static_cast<Eigen::Index>(row.coeffs[c].first)) = row.coeffs[c].second;
            b[static_cast<Eigen::Index>(k)] = row.rhs;
        }
        sol = project_onto_constraints(x0, A, b);
        if (sol.constraint_residual < 1e-9) break;

        // Infeasible: release the droppable row with the worst violation,
        // ties by least edge-length support.
        Eigen::VectorXd resid = A * sol.x - b;
        std::size_t worst = SIZE_MAX;
        double worst_key = 1e-9;
        for (std::size_t k = 0; k < live.size(); ++k) {
            if (!rows[live[k]].droppable) continue;
            double r = std::abs(resid[static_cast<Eigen::Index>(k)]);
            if (r > worst_key ||
                (worst != SIZE_MAX && r == worst_key &&
                 rows[live[k]].support < rows[worst].support)) {
                worst_key = r;
                worst = live[k];
            }
        }
        if (worst == SIZE_MAX) break;  // violation sits in slide rows: cannot happen
        active[worst] = 0;
        ++result.dropped_constraints;
    }

    Partition2D moved = partition;
    double disp_sum = 0.0;
    for (std::size_t v = 0; v < nv; ++v) {
        Point2 np{sol.x[2 * v], sol.x[2 * v + 1]};
        disp_sum += (np - partition.vertices[v]).norm();
        moved.vertices[v] = np;
    }
    refresh_cell_areas(moved);
    result.objective = (sol.x - x0).squaredNorm();
    result.mean_displacement = nv > 0 ? disp_sum / static_cast<double>(nv) : 0.0;

    // Link residuals on the optimized layout.
    double worst = 0.0;
    for (const auto& l : graph.links) {
        int ma = edge_map ? (*edge_map)[l.edge_a] : static_cast<int>(l.edge_a);
        int mb = edge_map ? (*edge_map)[l.edge_b] : static_cast<int>(l.edge_b);
        if (ma < 0 || mb < 0) continue;
        const auto& ea = moved.edges[static_cast<std::size_t>(ma)];
        const auto& eb = moved.edges[static_cast<std::size_t>(mb)];
        Vec2 da = (moved.vertices[ea.b] - moved.vertices[ea.a]).normalized();
        Vec2 db = (moved.vertices[eb.b] - moved.vertices[eb.a]).normalized();
        double resid = l.relation == Relation::parallel ? std::abs(da.cross(db))
                                                        : std::abs(da.dot(db));
        worst = std::max(worst, resid);
    }
    result.max_link_residual = worst;

    bool geometry_ok = cells_ok(moved);
    bool constraints_ok = sol.constraint_residual < 1e-9;
    if (!geometry_ok || !constraints_ok) {
        result.partition = partition;
        result.rolled_back = true;
        result.rollback_cause = !geometry_ok ? "cell inversion or edge crossing"
                                             : "inconsistent constraints";
        result.mean_displacement = 0.0;
        result.objective = 0.0;
        return result;
    }

    result.partition = std::move(moved);
    return result;
}

} // namespace lod2rec
