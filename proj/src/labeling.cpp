#include "lod2rec/labeling.hpp"

#include "lod2rec/clip.hpp"
#include "lod2rec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>

namespace lod2rec {

double ground_elevation(const PointCloud& cloud, const Polygon2& footprint) {
    std::vector<double> outside_z;
    double min_inside = std::numeric_limits<double>::infinity();
    auto box = footprint.bbox();
    Rect near{box.lo - Vec2{2.0, 2.0}, box.hi + Vec2{2.0, 2.0}};
    for (const auto& p : cloud.points) {
        Point2 q = p.xy();
        if (footprint.contains(q)) {
            min_inside = std::min(min_inside, p.z);
        } else if (near.contains(q)) {
            outside_z.push_back(p.z);
        }
    }
    if (!outside_z.empty()) {
        std::size_t k = outside_z.size() / 20;  // 5th percentile
        std::nth_element(outside_z.begin(), outside_z.begin() + k, outside_z.end());
        return outside_z[k];
    }
    return std::isfinite(min_inside) ? min_inside : 0.0;
}

LabelingProblem make_labeling_problem(const Partition2D& partition,
                                      std::span<const PlanarPrimitive> primitives,
                                      const Polygon2& footprint, const PointCloud& cloud,
                                      EnergyWeights weights) {
    LabelingProblem prob;
    prob.partition = &partition;
    prob.n_labels = primitives.size() + 1;
    prob.ground_z = ground_elevation(cloud, footprint);

    if (weights.w_c < 0.0) {
        // Complexity should only arbitrate near-ties. The count runs over raw
        // partition edges, which overstates the fused-region boundary length
        // roughly threefold on kinetic partitions, hence the small factor.
        std::vector<double> perims;
        for (const auto& p : primitives) {
            double per = 0.0;
            const auto& ring = p.plan_contour.outer;
            for (std::size_t i = 0; i < ring.size(); ++i)
                per += (ring[(i + 1) % ring.size()] - ring[i]).norm();
            perims.push_back(per);
        }
        std::sort(perims.begin(), perims.end());
        double median = perims.empty() ? 1.0 : perims[perims.size() / 2];
        weights.w_c = 0.01 * median / std::max<double>(1, primitives.size());
    }
    prob.weights = weights;

    prob.planes.resize(prob.n_labels);
    for (const auto& p : primitives) prob.planes[static_cast<std::size_t>(p.id)] = p.plane;

    const std::size_t n_cells = partition.cells.size();
    prob.cell_area.resize(n_cells);
    prob.inside_footprint.resize(n_cells);
    prob.coverage.assign(n_cells, {});

    std::vector<Polygon2> cell_polys(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c) {
        cell_polys[c] = partition.cell_polygon(c);
        prob.cell_area[c] = partition.cells[c].area;
        prob.inside_footprint[c] =
            footprint.contains(partition.cell_interior_point(c)) ? 1 : 0;
    }

    std::vector<Polygon2> contours(prob.n_labels);
    for (const auto& p : primitives) contours[static_cast<std::size_t>(p.id)] = p.plan_contour;

    for (std::size_t c = 0; c < n_cells; ++c) {
        auto& cov = prob.coverage[c];
        cov.assign(prob.n_labels, 0.0);
        if (!prob.inside_footprint[c]) {
            cov[0] = 1.0;  // outside cells are fully "uncovered"
            continue;
        }
        double area = std::max(prob.cell_area[c], 1e-12);
        std::vector<Polygon2> overlapping;
        for (std::size_t l = 1; l < prob.n_labels; ++l) {
            double inter = polygon_intersection_area(cell_polys[c], contours[l]);
            cov[l] = std::clamp(inter / area, 0.0, 1.0);
            if (cov[l] > 0.0) overlapping.push_back(contours[l]);
        }
        double uncovered = polygon_uncovered_area(cell_polys[c], overlapping);
        cov[0] = std::clamp(uncovered / area, 0.0, 1.0);
    }

    // Alpha shapes round concave corners outward, so a contour can claim a
    // wedge that belongs to the neighbor it wraps around. Inliers are the
    // ground truth there: when the area-coverage winner has no points in the
    // cell while another primitive clearly does, redistribute the covered
    // fraction by inlier share.
    {
        std::vector<std::vector<std::size_t>> label_points(prob.n_labels);
        for (const auto& prim : primitives) {
            auto& pts = label_points[static_cast<std::size_t>(prim.id)];
            for (auto idx : prim.inliers) pts.push_back(idx);
        }
        for (std::size_t c = 0; c < n_cells; ++c) {
            if (!prob.inside_footprint[c]) continue;
            auto& cov = prob.coverage[c];
            std::size_t area_winner = 0;
            for (std::size_t l = 1; l < prob.n_labels; ++l)
                if (cov[l] > cov[area_winner] || area_winner == 0) area_winner = l;
            if (area_winner == 0 || cov[area_winner] <= 0.0) continue;

            auto box = cell_polys[c].bbox();
            std::vector<std::size_t> counts(prob.n_labels, 0);
            for (std::size_t l = 1; l < prob.n_labels; ++l) {
                for (auto idx : label_points[l]) {
                    Point2 q = cloud.points[idx].xy();
                    if (q.x < box.lo.x || q.x > box.hi.x || q.y < box.lo.y || q.y > box.hi.y)
                        continue;
                    if (cell_polys[c].contains(q)) counts[l]++;
                }
            }
            std::size_t point_winner = 0;
            std::size_t total = 0;
            for (std::size_t l = 1; l < prob.n_labels; ++l) {
                total += counts[l];
                if (counts[l] > counts[point_winner]) point_winner = l;
            }
            if (point_winner == 0 || point_winner == area_winner) continue;
            if (counts[area_winner] > 0 || counts[point_winner] < 3) continue;

            double covered = 1.0 - cov[0];
            for (std::size_t l = 1; l < prob.n_labels; ++l)
                cov[l] = covered * static_cast<double>(counts[l]) / static_cast<double>(total);
        }
    }

    prob.cell_adj.resize(n_cells);
    for (std::size_t e = 0; e < partition.edges.size(); ++e) {
        const PartitionEdge& edge = partition.edges[e];
        if (edge.left < 0 || edge.right < 0) continue;
        LabelingProblem::AdjEdge adj;
        adj.edge_idx = e;
        adj.cell_a = static_cast<std::size_t>(edge.left);
        adj.cell_b = static_cast<std::size_t>(edge.right);
        adj.pa = partition.vertices[edge.a];
        adj.pb = partition.vertices[edge.b];
        adj.length = (adj.pb - adj.pa).norm();
        adj.on_footprint = edge.on_footprint;
        prob.cell_adj[adj.cell_a].push_back(prob.adjacency.size());
        prob.cell_adj[adj.cell_b].push_back(prob.adjacency.size());
        prob.adjacency.push_back(adj);
    }

    return prob;
}

double data_term(const LabelingProblem& prob, std::size_t cell, int label) {
    if (!prob.inside_footprint[cell])
        return label == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    double cov = prob.coverage[cell][static_cast<std::size_t>(label)];
    return prob.cell_area[cell] * (1.0 - cov);
}

double pairwise_term(const LabelingProblem& prob, const LabelingProblem::AdjEdge& edge,
                     int label_a, int label_b) {
    if (label_a == label_b) return 0.0;
    double g0 = prob.height_at(label_a, edge.pa) - prob.height_at(label_b, edge.pa);
    double g1 = prob.height_at(label_a, edge.pb) - prob.height_at(label_b, edge.pb);
    // Exact integral of |linear gap| over the edge.
    double integral;
    if (g0 * g1 >= 0.0) {
        integral = edge.length * 0.5 * (std::abs(g0) + std::abs(g1));
    } else {
        integral = edge.length * 0.5 * (g0 * g0 + g1 * g1) / (std::abs(g0) + std::abs(g1));
    }
    double mean = edge.length > 0.0 ? integral / edge.length : 0.0;
    return mean < prob.weights.ridge_tol ? 0.0 : integral;
}

double complexity_term(const LabelingProblem& prob, std::span<const int> labels) {
    std::size_t count = 0;
    for (const auto& adj : prob.adjacency) {
        if (adj.on_footprint) continue;
        if (labels[adj.cell_a] != labels[adj.cell_b]) ++count;
    }
    return prob.weights.w_c * static_cast<double>(count);
}

void recompute_energy(const LabelingProblem& prob, LabelState& state) {
    state.e_data = 0.0;
    for (std::size_t c = 0; c < state.labels.size(); ++c)
        state.e_data += prob.weights.w_d * data_term(prob, c, state.labels[c]);
    state.e_pair = 0.0;
    for (const auto& adj : prob.adjacency) {
        if (adj.on_footprint) continue;  // outline walls are mandatory, not a labeling cost
        state.e_pair +=
            prob.weights.w_p * pairwise_term(prob, adj, state.labels[adj.cell_a],
                                             state.labels[adj.cell_b]);
    }
    state.e_complex = complexity_term(prob, state.labels);
}

namespace {

// Energy change if every cell in `cells` switches to `to`. All listed cells
// must currently share one label.
double move_delta(const LabelingProblem& prob, const std::vector<int>& labels,
                  const std::vector<std::size_t>& cells, int to) {
    int from = labels[cells.front()];
    if (from == to) return 0.0;
    std::vector<char> in_set(labels.size(), 0);
    for (auto c : cells) in_set[c] = 1;

    double delta = 0.0;
    for (auto c : cells)
        delta += prob.weights.w_d * (data_term(prob, c, to) - data_term(prob, c, from));

    std::set<std::size_t> touched;
    for (auto c : cells)
        for (auto e : prob.cell_adj[c]) touched.insert(e);
    for (auto e : touched) {
        const auto& adj = prob.adjacency[e];
        bool a_in = in_set[adj.cell_a], b_in = in_set[adj.cell_b];
        int la0 = labels[adj.cell_a], lb0 = labels[adj.cell_b];
        int la1 = a_in ? to : la0, lb1 = b_in ? to : lb0;
        if (!adj.on_footprint) {
            delta += prob.weights.w_p *
                     (pairwise_term(prob, adj, la1, lb1) - pairwise_term(prob, adj, la0, lb0));
            delta += prob.weights.w_c * ((la1 != lb1 ? 1.0 : 0.0) - (la0 != lb0 ? 1.0 : 0.0));
        }
    }
    return delta;
}

// Connected same-label region containing `seed`. Footprint edges are hard
// walls: region connectivity never crosses them, so a sliver cluster inside
// the outline can flip as a unit without dragging the exterior along.
std::vector<std::size_t> region_of(const LabelingProblem& prob, const std::vector<int>& labels,
                                   std::size_t seed) {
    int label = labels[seed];
    std::vector<std::size_t> region;
    std::vector<char> visited(labels.size(), 0);
    std::vector<std::size_t> stack{seed};
    visited[seed] = 1;
    while (!stack.empty()) {
        std::size_t c = stack.back();
        stack.pop_back();
        region.push_back(c);
        for (auto e : prob.cell_adj[c]) {
            const auto& adj = prob.adjacency[e];
            if (adj.on_footprint) continue;
            std::size_t o = adj.cell_a == c ? adj.cell_b : adj.cell_a;
            if (!visited[o] && labels[o] == label) {
                visited[o] = 1;
                stack.push_back(o);
            }
        }
    }
    std::sort(region.begin(), region.end());
    return region;
}

struct Move {
    std::size_t seed;
    std::size_t seed2 = SIZE_MAX;  // adjacent-pair moves; SIZE_MAX otherwise
    bool whole_region = false;
    int from = 0, to = 0;
};

} // namespace

LabelState assign_labels(const LabelingProblem& prob) {
    const std::size_t n = prob.partition->cells.size();
    LabelState state;
    state.labels.resize(n, 0);

    // Initial assignment: maximal coverage, ground included.
    for (std::size_t c = 0; c < n; ++c) {
        if (!prob.inside_footprint[c]) {
            state.labels[c] = 0;
            continue;
        }
        std::size_t best = 0;
        for (std::size_t l = 1; l < prob.n_labels; ++l)
            if (prob.coverage[c][l] > prob.coverage[c][best]) best = l;
        state.labels[c] = static_cast<int>(best);
    }
    recompute_energy(prob, state);
    state.trace.push_back({state.e_data, state.e_pair, state.e_complex, state.total()});

    struct QueueEntry {
        double delta;
        std::size_t order;  // deterministic tiebreak: insertion order
        Move move;
        bool operator>(const QueueEntry& o) const {
            if (delta != o.delta) return delta > o.delta;
            return order > o.order;
        }
    };
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<QueueEntry>> queue;
    std::size_t order = 0;

    auto neighbor_labels = [&](std::span<const std::size_t> cells) {
        std::set<int> out;
        std::vector<char> in_set(n, 0);
        for (auto c : cells) in_set[c] = 1;
        for (auto c : cells)
            for (auto e : prob.cell_adj[c]) {
                const auto& adj = prob.adjacency[e];
                std::size_t o = adj.cell_a == c ? adj.cell_b : adj.cell_a;
                if (!in_set[o]) out.insert(state.labels[o]);
            }
        return out;
    };

    auto push_moves_for = [&](std::size_t cell) {
        std::vector<std::size_t> single{cell};
        for (int to : neighbor_labels(single)) {
            if (to == state.labels[cell]) continue;
            double d = move_delta(prob, state.labels, single, to);
            if (d < -1e-12)
                queue.push({d, order++, {cell, SIZE_MAX, false, state.labels[cell], to}});
        }
        // Adjacent same-label pairs: covers transfers where either cell alone
        // only trades one wall for another.
        for (auto e : prob.cell_adj[cell]) {
            const auto& adj = prob.adjacency[e];
            std::size_t o = adj.cell_a == cell ? adj.cell_b : adj.cell_a;
            if (state.labels[o] != state.labels[cell]) continue;
            std::vector<std::size_t> pair{std::min(cell, o), std::max(cell, o)};
            for (int to : neighbor_labels(pair)) {
                if (to == state.labels[cell]) continue;
                double d = move_delta(prob, state.labels, pair, to);
                if (d < -1e-12)
                    queue.push({d, order++,
                                {pair[0], pair[1], false, state.labels[cell], to}});
            }
        }
        auto region = region_of(prob, state.labels, cell);
        if (region.size() > 1) {
            for (int to : neighbor_labels(region)) {
                if (to == state.labels[cell]) continue;
                double d = move_delta(prob, state.labels, region, to);
                if (d < -1e-12)
                    queue.push({d, order++,
                                {region.front(), SIZE_MAX, true, state.labels[cell], to}});
            }
        }
    };

    for (std::size_t c = 0; c < n; ++c) push_moves_for(c);

    const std::size_t move_cap = 50 * std::max<std::size_t>(n, 1);
    std::size_t applied = 0;
    while (!queue.empty()) {
        QueueEntry entry = queue.top();
        queue.pop();
        const Move& mv = entry.move;
        if (state.labels[mv.seed] != mv.from) continue;  // stale
        if (mv.seed2 != SIZE_MAX && state.labels[mv.seed2] != mv.from) continue;

        std::vector<std::size_t> cells;
        if (mv.whole_region) cells = region_of(prob, state.labels, mv.seed);
        else if (mv.seed2 != SIZE_MAX) cells = {mv.seed, mv.seed2};
        else cells = {mv.seed};
        double fresh = move_delta(prob, state.labels, cells, mv.to);
        if (fresh >= -1e-12) continue;
        if (std::abs(fresh - entry.delta) > 1e-9) {
            // Stale estimate; reinsert with the recomputed drop.
            queue.push({fresh, order++, mv});
            continue;
        }

        for (auto c : cells) state.labels[c] = mv.to;
        recompute_energy(prob, state);
        state.trace.push_back({state.e_data, state.e_pair, state.e_complex, state.total()});

        if (++applied > move_cap)
            throw NonConvergence("assign_labels: move cap exceeded");

        // Refresh candidate moves around the changed cells.
        std::set<std::size_t> to_refresh(cells.begin(), cells.end());
        for (auto c : cells)
            for (auto e : prob.cell_adj[c]) {
                const auto& adj = prob.adjacency[e];
                to_refresh.insert(adj.cell_a == c ? adj.cell_b : adj.cell_a);
            }
        for (auto c : to_refresh) push_moves_for(c);
    }

    return state;
}

Partition2D merge_cells(const Partition2D& partition, const LabelState& state,
                        std::span<const PlanarPrimitive> primitives) {
    const std::size_t n = partition.cells.size();

    // Connected components of same-label (non-ground) cells.
    std::vector<std::vector<std::size_t>> cell_neighbors(n);
    for (const auto& e : partition.edges) {
        if (e.left < 0 || e.right < 0) continue;
        cell_neighbors[static_cast<std::size_t>(e.left)].push_back(
            static_cast<std::size_t>(e.right));
        cell_neighbors[static_cast<std::size_t>(e.right)].push_back(
            static_cast<std::size_t>(e.left));
    }
    std::vector<int> comp(n, -1);
    int n_comp = 0;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (comp[seed] >= 0 || state.labels[seed] == 0) continue;
        int id = n_comp++;
        std::vector<std::size_t> stack{seed};
        comp[seed] = id;
        while (!stack.empty()) {
            std::size_t c = stack.back();
            stack.pop_back();
            for (std::size_t o : cell_neighbors[c]) {
                if (comp[o] < 0 && state.labels[o] == state.labels[c]) {
                    comp[o] = id;
                    stack.push_back(o);
                }
            }
        }
    }

    // Retained edges: label boundary or exterior boundary of a kept component.
    auto comp_of = [&](int cell) { return cell >= 0 ? comp[static_cast<std::size_t>(cell)] : -1; };
    std::vector<std::size_t> retained;
    for (std::size_t e = 0; e < partition.edges.size(); ++e) {
        const auto& edge = partition.edges[e];
        int ca = comp_of(edge.left), cb = comp_of(edge.right);
        if (ca == cb) continue;  // interior to a component, or between dropped cells
        if (ca < 0 && cb < 0) continue;
        retained.push_back(e);
    }

    // Degree-2 collinear vertices disappear; chains of retained edges merge.
    std::vector<int> degree(partition.vertices.size(), 0);
    for (auto e : retained) {
        degree[partition.edges[e].a]++;
        degree[partition.edges[e].b]++;
    }
    std::vector<char> removable(partition.vertices.size(), 0);
    {
        std::vector<std::array<std::size_t, 2>> vertex_edges(partition.vertices.size(),
                                                             {SIZE_MAX, SIZE_MAX});
        for (auto e : retained) {
            for (std::size_t v : {partition.edges[e].a, partition.edges[e].b}) {
                if (vertex_edges[v][0] == SIZE_MAX) vertex_edges[v][0] = e;
                else if (vertex_edges[v][1] == SIZE_MAX) vertex_edges[v][1] = e;
            }
        }
        for (std::size_t v = 0; v < partition.vertices.size(); ++v) {
            if (degree[v] != 2) continue;
            const auto& e0 = partition.edges[vertex_edges[v][0]];
            const auto& e1 = partition.edges[vertex_edges[v][1]];
            std::size_t u = e0.a == v ? e0.b : e0.a;
            std::size_t w = e1.a == v ? e1.b : e1.a;
            Vec2 d0 = (partition.vertices[v] - partition.vertices[u]).normalized();
            Vec2 d1 = (partition.vertices[w] - partition.vertices[v]).normalized();
            if (std::abs(d0.cross(d1)) < 1e-9 && d0.dot(d1) > 0.0) removable[v] = 1;
        }
    }

    // Per-component directed boundary edges (interior on the left).
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> comp_boundary(
        static_cast<std::size_t>(n_comp));
    for (auto e : retained) {
        const auto& edge = partition.edges[e];
        int ca = comp_of(edge.left), cb = comp_of(edge.right);
        if (ca >= 0) comp_boundary[static_cast<std::size_t>(ca)].push_back({edge.a, edge.b});
        if (cb >= 0) comp_boundary[static_cast<std::size_t>(cb)].push_back({edge.b, edge.a});
    }

    Partition2D out;
    out.bbox = partition.bbox;
    std::vector<std::size_t> vertex_map(partition.vertices.size(), SIZE_MAX);
    auto map_vertex = [&](std::size_t v) {
        if (vertex_map[v] == SIZE_MAX) {
            vertex_map[v] = out.vertices.size();
            out.vertices.push_back(partition.vertices[v]);
        }
        return vertex_map[v];
    };

    // Representative label/plane per component.
    std::vector<int> comp_label(static_cast<std::size_t>(n_comp), 0);
    for (std::size_t c = 0; c < n; ++c)
        if (comp[c] >= 0) comp_label[static_cast<std::size_t>(comp[c])] = state.labels[c];

    struct DirectedEdgeUse {
        std::size_t a, b;  // new vertex ids, direction of use
        int cell;
    };
    std::vector<DirectedEdgeUse> uses;

    for (int k = 0; k < n_comp; ++k) {
        auto loops = walk_directed_loops(partition.vertices, comp_boundary[static_cast<std::size_t>(k)]);
        PartitionCell cell;
        cell.label = comp_label[static_cast<std::size_t>(k)];
        for (const auto& p : primitives)
            if (p.id == cell.label) cell.plane = p.plane;

        // Largest-area loop is the outer ring; the rest are holes.
        double best_area = -std::numeric_limits<double>::infinity();
        std::size_t best_loop = 0;
        std::vector<std::vector<std::size_t>> cleaned;
        for (auto& loop : loops) {
            std::vector<std::size_t> kept_vs;
            for (auto v : loop)
                if (!removable[v]) kept_vs.push_back(v);
            if (kept_vs.size() < 3) continue;
            cleaned.push_back(std::move(kept_vs));
        }
        for (std::size_t li = 0; li < cleaned.size(); ++li) {
            std::vector<Point2> ring;
            for (auto v : cleaned[li]) ring.push_back(partition.vertices[v]);
            double a = ring_signed_area(ring);
            if (a > best_area) {
                best_area = a;
                best_loop = li;
            }
        }
        double area_acc = 0.0;
        for (std::size_t li = 0; li < cleaned.size(); ++li) {
            std::vector<std::size_t> mapped;
            for (auto v : cleaned[li]) mapped.push_back(map_vertex(v));
            std::vector<Point2> ring;
            for (auto v : cleaned[li]) ring.push_back(partition.vertices[v]);
            double a = ring_signed_area(ring);
            area_acc += a;
            if (li == best_loop) cell.outer = std::move(mapped);
            else cell.holes.push_back(std::move(mapped));
        }
        cell.area = area_acc;  // holes are CW, so the signed sum is the area
        int cell_id = static_cast<int>(out.cells.size());
        auto note_uses = [&](const std::vector<std::size_t>& ring) {
            for (std::size_t i = 0; i < ring.size(); ++i)
                uses.push_back({ring[i], ring[(i + 1) % ring.size()], cell_id});
        };
        note_uses(cell.outer);
        for (const auto& h : cell.holes) note_uses(h);
        out.cells.push_back(std::move(cell));
    }

    // Rebuild the edge table from ring uses; inherit kind/footprint tags from
    // the source partition where geometry matches.
    std::map<std::pair<std::size_t, std::size_t>, PartitionEdge> edge_map;
    for (const auto& use : uses) {
        auto key = std::minmax(use.a, use.b);
        auto [it, fresh] = edge_map.try_emplace({key.first, key.second});
        PartitionEdge& e = it->second;
        if (fresh) {
            e.a = key.first;
            e.b = key.second;
            e.left = e.right = -1;
        }
        if (use.a == e.a) e.left = use.cell;
        else e.right = use.cell;
    }
    // Kind / footprint tags: look up a source edge lying on the new edge.
    for (auto& [key, e] : edge_map) {
        Point2 a = out.vertices[e.a], b = out.vertices[e.b];
        Vec2 dir = (b - a).normalized();
        double len = (b - a).norm();
        for (const auto& src : partition.edges) {
            Point2 m = (partition.vertices[src.a] + partition.vertices[src.b]) * 0.5;
            double t = (m - a).dot(dir);
            if (t < -eps_geom || t > len + eps_geom) continue;
            if (std::abs(dir.cross(m - a)) > eps_geom) continue;
            e.kind = src.kind;
            e.on_footprint = src.on_footprint;
            if (src.on_footprint) break;
        }
        out.edges.push_back(e);
    }

    return out;
}

} // namespace lod2rec
