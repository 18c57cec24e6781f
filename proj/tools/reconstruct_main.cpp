#include "lod2rec/errors.hpp"
#include "lod2rec/io.hpp"
#include "lod2rec/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace lod2rec;

namespace {

int verbosity() {
    const char* env = std::getenv("LOD2REC_LOG");
    if (!env) return 1;
    std::string v = env;
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LOD2 building reconstruction from aerial point clouds and footprints"};

    std::string points_path, footprints_path, out_dir, config_path;
    std::size_t jobs = 1;
    std::uint64_t seed = 1;
    double tau_h = -1.0, tau_v = -1.0, eps = -1.0;
    long min_inliers = -1;
    bool emit_svg = false;
    double watchdog = 0.0;
    std::vector<std::string> sets;

    app.add_option("--points", points_path, "Point cloud (.xyz / .ply)")->required();
    app.add_option("--footprints", footprints_path, "GeoJSON footprints")->required();
    app.add_option("--out", out_dir, "Output directory")->required();
    app.add_option("--config", config_path, "Key-value config file");
    app.add_option("--jobs", jobs, "Worker threads for the building batch");
    app.add_option("--seed", seed, "Seed for surface sampling");
    app.add_option("--tau-h", tau_h, "Short-edge collapse threshold [m]");
    app.add_option("--tau-v", tau_v, "Vertical vertex-merge threshold [m]");
    app.add_option("--eps", eps, "Plane detection fitting tolerance [m]");
    app.add_option("--min-inliers", min_inliers, "Minimum inliers per plane");
    app.add_option("--watchdog", watchdog, "Per-building time limit in seconds (0 = off)");
    app.add_flag("--emit-debug-svg", emit_svg, "Write per-stage SVG dumps");
    app.add_option("--set", sets, "Extra config overrides as key=value")->take_all();

    CLI11_PARSE(app, argc, argv);
    int log = verbosity();

    try {
        Config config = config_path.empty() ? Config{} : load_config(config_path);
        if (tau_h >= 0.0) config.regularize.tau_h = tau_h;
        if (tau_v >= 0.0) config.extrude.tau_v = tau_v;
        if (eps > 0.0) config.detection.fitting_tolerance = eps;
        if (min_inliers > 0) config.detection.min_inliers = static_cast<std::size_t>(min_inliers);
        config.seed = seed;
        config.emit_debug_svg = emit_svg;
        if (watchdog > 0.0) config.watchdog_seconds = watchdog;
        for (const auto& kv : sets) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw UnsupportedFormat("--set expects key=value");
            config.set(kv.substr(0, eq), kv.substr(eq + 1));
        }

        fs::create_directories(out_dir);
        PointCloud cloud = load_point_cloud(points_path);
        auto footprints = load_footprints(footprints_path);
        if (log >= 1)
            std::cout << "loaded " << cloud.size() << " points, " << footprints.size()
                      << " footprint(s)\n";

        std::vector<BuildingJob> batch;
        std::vector<std::string> ids;
        for (const auto& [id, footprint] : footprints) {
            BuildingJob job;
            job.id = id;
            job.footprint = footprint;
            job.cloud = clip_to_footprint(cloud, footprint);
            job.config = config;
            job.debug_dir = out_dir;
            if (job.cloud.points.empty()) {
                if (log >= 1) std::cout << id << ": no points inside footprint, skipped\n";
                continue;
            }
            ids.push_back(id);
            batch.push_back(std::move(job));
        }

        auto results = run_batch(batch, jobs);

        bool any_failed = false;
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            if (r.mesh) {
                export_mesh(*r.mesh, out_dir + "/" + ids[i] + ".obj", MeshFormat::obj,
                            ids[i], true);
                export_mesh(*r.mesh, out_dir + "/" + ids[i] + ".ply", MeshFormat::ply, ids[i]);
            }
            std::ofstream rep(out_dir + "/" + ids[i] + ".json");
            rep << report_json(ids[i], r).dump(2) << "\n";
            if (r.status == PipelineStatus::failed) {
                any_failed = true;
                if (log >= 1)
                    std::cout << ids[i] << ": failed at " << r.stage << " (" << r.reason
                              << ")\n";
            } else if (log >= 1) {
                std::cout << ids[i] << ": " << (r.status == PipelineStatus::ok ? "ok" : "degraded")
                          << "  V=" << r.complexity.vertices
                          << " F=" << r.complexity.polygon_facets << "  "
                          << r.total_seconds << " s\n";
            }
        }

        std::ofstream csv(out_dir + "/batch.csv");
        csv << batch_csv(ids, results);

        return any_failed ? 2 : 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
