#include "lod2rec/pipeline.hpp"

#include "lod2rec/errors.hpp"
#include "lod2rec/svg.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace lod2rec {

PointCloud clip_to_footprint(const PointCloud& cloud, const Polygon2& footprint,
                             double dilation) {
    PointCloud out;
    auto box = footprint.bbox();
    Rect expanded{box.lo - Vec2{dilation, dilation}, box.hi + Vec2{dilation, dilation}};
    auto near_ring = [&](const std::vector<Point2>& ring, Point2 p) {
        for (std::size_t i = 0; i < ring.size(); ++i)
            if (point_segment_distance(p, ring[i], ring[(i + 1) % ring.size()]) <= dilation)
                return true;
        return false;
    };
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        Point2 q = cloud.points[i].xy();
        if (!expanded.contains(q)) continue;
        bool keep = footprint.contains(q) || near_ring(footprint.outer, q);
        if (!keep) {
            for (const auto& h : footprint.holes)
                if (near_ring(h, q)) keep = true;
        }
        if (!keep) continue;
        out.points.push_back(cloud.points[i]);
        if (cloud.has_classes()) out.classes.push_back(cloud.classes[i]);
    }
    if (!cloud.has_classes()) out.classes.clear();
    return out;
}

namespace {

struct StageClock {
    using clock = std::chrono::steady_clock;
    clock::time_point start = clock::now();
    clock::time_point stage_start = clock::now();
    PipelineResult* result;
    double watchdog;

    explicit StageClock(PipelineResult* r, double watchdog_s)
        : result(r), watchdog(watchdog_s) {}

    void lap(const std::string& name) {
        auto now = clock::now();
        result->stage_seconds.push_back(
            {name, std::chrono::duration<double>(now - stage_start).count()});
        stage_start = now;
        if (watchdog > 0.0 &&
            std::chrono::duration<double>(now - start).count() > watchdog)
            throw NonConvergence("watchdog: building exceeded " + std::to_string(watchdog) +
                                 " s at stage " + name);
    }
    double total() const {
        return std::chrono::duration<double>(clock::now() - start).count();
    }
};

Point2 polygon_centroid(const Polygon2& poly) {
    Point2 c{0, 0};
    for (const auto& p : poly.outer) c += p;
    return c / static_cast<double>(poly.outer.size());
}

} // namespace

PipelineResult run_pipeline(const BuildingJob& job) {
    PipelineResult result;
    StageClock clock(&result, job.config.watchdog_seconds);
    std::string stage = "setup";

    try {
        // Work in a local frame around the footprint centroid; survey-scale
        // coordinates would wreck the geometric predicates.
        Point2 origin = polygon_centroid(job.footprint);
        Polygon2 footprint = job.footprint;
        for (auto& p : footprint.outer) p -= origin;
        for (auto& h : footprint.holes)
            for (auto& p : h) p -= origin;
        PointCloud cloud = job.cloud;
        for (auto& p : cloud.points) {
            p.x -= origin.x;
            p.y -= origin.y;
        }

        stage = "plane_detect";
        auto primitives = detect_planes(cloud, job.config.detection);
        clock.lap(stage);

        stage = "line_extract";
        auto soup = build_soup(primitives, footprint, cloud, job.config.lines);
        clock.lap(stage);

        stage = "kinetic2d";
        auto box = footprint.bbox();
        double margin = job.config.kinetic.bbox_margin;
        Rect bbox{box.lo - Vec2{margin, margin}, box.hi + Vec2{margin, margin}};
        Partition2D partition = build_partition(soup, bbox, job.config.kinetic);
        validate_partition(partition);
        if (job.config.emit_debug_svg && !job.debug_dir.empty())
            write_partition_svg(partition, job.debug_dir + "/" + job.id + "_partition.svg");
        clock.lap(stage);

        stage = "labeling";
        auto problem =
            make_labeling_problem(partition, primitives, footprint, cloud, job.config.energy);
        auto labels = assign_labels(problem);
        for (std::size_t c = 0; c < partition.cells.size(); ++c)
            partition.cells[c].label = labels.labels[c];
        if (job.config.emit_debug_svg && !job.debug_dir.empty())
            write_partition_svg(partition, job.debug_dir + "/" + job.id + "_labeled.svg");
        Partition2D roof = merge_cells(partition, labels, primitives);
        if (roof.cells.empty())
            throw NoPlanesFound("labeling: no roof cells survived");
        clock.lap(stage);

        stage = "regularize2d";
        if (job.config.regularize2d_enabled) {
            auto graph = build_regularity_graph(roof, job.config.regularize);
            auto collapsed = collapse_short_edges(roof, job.config.regularize.tau_h);
            auto optimized =
                optimize_vertices(collapsed.partition, graph, footprint, &collapsed.edge_map);
            if (optimized.rolled_back) {
                result.status = PipelineStatus::degraded;
                result.stage = stage;
                result.reason = "regularization rolled back (" + optimized.rollback_cause + ")";
                roof = collapsed.partition;
            } else {
                if (job.config.emit_debug_svg && !job.debug_dir.empty())
                    write_regularity_svg(collapsed.partition, optimized.partition, graph,
                                         &collapsed.edge_map,
                                         job.debug_dir + "/" + job.id + "_regularized.svg");
                roof = optimized.partition;
            }
            // Regularization aligns boundary chains exactly; drop the
            // degree-2 kink vertices it straightened.
            roof = remove_collinear_vertices(roof, 2e-3);
        }
        clock.lap(stage);

        stage = "extrude3d";
        double ground_z = ground_elevation(cloud, footprint);
        RoofGraph graph = extrude_cells(roof);
        if (job.config.extrude.merge_enabled) {
            merge_vertical(graph, roof, job.config.extrude.tau_v);
            auto opt = optimize_heights(graph, roof);
            if (opt.n_rank_deficient > 0 && result.status == PipelineStatus::ok) {
                result.status = PipelineStatus::degraded;
                result.stage = stage;
                result.reason = std::to_string(opt.n_rank_deficient) +
                                " cell(s) could not carry a plane";
            }
        }
        BuildingMesh mesh = assemble_mesh(graph, roof, footprint, ground_z);
        clock.lap(stage);

        stage = "metrics";
        result.complexity = complexity(mesh, 0.5);
        if (job.config.compute_accuracy) {
            auto samples = sample_surface(mesh, job.config.metric_samples, job.config.seed);
            // Accuracy measures the building itself: building-classified
            // points only (ground returns would dominate otherwise).
            std::vector<Point3> input_pts;
            for (std::size_t i = 0; i < cloud.points.size(); ++i) {
                if (cloud.has_classes() && cloud.classes[i] != kClassBuilding) continue;
                input_pts.push_back(cloud.points[i]);
            }
            if (!input_pts.empty())
                result.accuracy.cd_inp_to_rec = chamfer_one_sided(input_pts, samples);
            result.accuracy.sample_count = job.config.metric_samples;
            if (job.reference) {
                BuildingMesh ref = *job.reference;
                for (auto& v : ref.vertices) {
                    v.x -= origin.x;
                    v.y -= origin.y;
                }
                auto ref_samples =
                    sample_surface(ref, job.config.metric_samples, job.config.seed + 1);
                result.accuracy.cd_rec_to_ref = chamfer_one_sided(samples, ref_samples);
            }
        }
        clock.lap(stage);

        // Back to the input frame.
        for (auto& v : mesh.vertices) {
            v.x += origin.x;
            v.y += origin.y;
        }
        for (auto& f : mesh.facets) {
            // n.(p - o) + d = 0 in local frame => d' = d - n.o in world.
            f.plane.d -= f.plane.n.x * origin.x + f.plane.n.y * origin.y;
        }
        result.mesh = std::move(mesh);
    } catch (const Error& e) {
        result.status = PipelineStatus::failed;
        result.stage = stage;
        result.reason = e.what();
        result.mesh.reset();
    }

    result.total_seconds = clock.total();
    return result;
}

std::vector<PipelineResult> run_batch(std::vector<BuildingJob>& jobs, std::size_t n_workers) {
    std::vector<PipelineResult> results(jobs.size());
    if (n_workers == 0) n_workers = 1;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) break;
            results[i] = run_pipeline(jobs[i]);
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w + 1 < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return results;
}

nlohmann::json report_json(const std::string& id, const PipelineResult& result) {
    nlohmann::json doc;
    doc["id"] = id;
    doc["status"] = result.status == PipelineStatus::ok
                        ? "ok"
                        : (result.status == PipelineStatus::degraded ? "degraded" : "failed");
    if (result.status != PipelineStatus::ok) {
        doc["stage"] = result.stage;
        doc["reason"] = result.reason;
    }
    doc["time_seconds"] = result.total_seconds;
    nlohmann::json stages = nlohmann::json::object();
    for (const auto& [name, secs] : result.stage_seconds) stages[name] = secs;
    doc["stage_seconds"] = stages;
    if (result.mesh) {
        doc["complexity"] = {{"V", result.complexity.vertices},
                             {"F", result.complexity.polygon_facets},
                             {"triangles", result.complexity.triangles},
                             {"E_short_ratio", result.complexity.short_edge_ratio},
                             {"edge_threshold", result.complexity.edge_threshold}};
        nlohmann::json acc{{"cd_inp_to_rec", result.accuracy.cd_inp_to_rec},
                           {"sample_count", result.accuracy.sample_count}};
        if (result.accuracy.cd_rec_to_ref >= 0.0)
            acc["cd_rec_to_ref"] = result.accuracy.cd_rec_to_ref;
        doc["accuracy"] = acc;
    }
    return doc;
}

std::string batch_csv(const std::vector<std::string>& ids,
                      const std::vector<PipelineResult>& results) {
    std::string out =
        "id,status,V,F,triangles,E_short_ratio,cd_inp_to_rec,cd_rec_to_ref,time_s\n";
    double sum_v = 0, sum_f = 0, sum_tri = 0, sum_ratio = 0, sum_cd1 = 0, sum_cd2 = 0,
           sum_t = 0;
    std::size_t n_ok = 0, n_cd2 = 0;
    char buf[256];
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        const char* status = r.status == PipelineStatus::ok
                                 ? "ok"
                                 : (r.status == PipelineStatus::degraded ? "degraded"
                                                                         : "failed");
        if (r.mesh) {
            std::snprintf(buf, sizeof buf, "%s,%s,%zu,%zu,%zu,%.6f,%.6f,%.6f,%.3f\n",
                          ids[i].c_str(), status, r.complexity.vertices,
                          r.complexity.polygon_facets, r.complexity.triangles,
                          r.complexity.short_edge_ratio, r.accuracy.cd_inp_to_rec,
                          r.accuracy.cd_rec_to_ref, r.total_seconds);
            sum_v += static_cast<double>(r.complexity.vertices);
            sum_f += static_cast<double>(r.complexity.polygon_facets);
            sum_tri += static_cast<double>(r.complexity.triangles);
            sum_ratio += r.complexity.short_edge_ratio;
            sum_cd1 += r.accuracy.cd_inp_to_rec;
            if (r.accuracy.cd_rec_to_ref >= 0.0) {
                sum_cd2 += r.accuracy.cd_rec_to_ref;
                ++n_cd2;
            }
            ++n_ok;
        } else {
            std::snprintf(buf, sizeof buf, "%s,%s,,,,,,,%.3f\n", ids[i].c_str(), status,
                          r.total_seconds);
        }
        sum_t += r.total_seconds;
        out += buf;
    }
    if (n_ok > 0) {
        double n = static_cast<double>(n_ok);
        std::snprintf(buf, sizeof buf, "mean,,%.2f,%.2f,%.2f,%.6f,%.6f,%.6f,%.3f\n",
                      sum_v / n, sum_f / n, sum_tri / n, sum_ratio / n, sum_cd1 / n,
                      n_cd2 > 0 ? sum_cd2 / static_cast<double>(n_cd2) : -1.0,
                      sum_t / static_cast<double>(results.size()));
        out += buf;
    }
    return out;
}

} // namespace lod2rec
