#pragma once

#include "lod2rec/config.hpp"
#include "lod2rec/metrics.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>

namespace lod2rec {

struct BuildingJob {
    PointCloud cloud;  // points already associated to this building
    Polygon2 footprint;
    Config config;
    std::string id;
    const BuildingMesh* reference = nullptr;  // optional, for CD_rec->ref
    std::string debug_dir;                    // SVG dumps when emit_debug_svg
};

enum class PipelineStatus { ok, degraded, failed };

struct PipelineResult {
    std::optional<BuildingMesh> mesh;
    ComplexityReport complexity;
    AccuracyReport accuracy;
    std::vector<std::pair<std::string, double>> stage_seconds;
    PipelineStatus status = PipelineStatus::ok;
    std::string stage;   // stage that degraded or failed
    std::string reason;
    double total_seconds = 0.0;
};

// detect -> lines -> kinetic -> labeling -> merge -> regularize -> extrude ->
// assemble -> metrics, with graceful degradation. Deterministic per job.
PipelineResult run_pipeline(const BuildingJob& job);

// Points whose plan projection falls inside the footprint dilated by 1 m.
PointCloud clip_to_footprint(const PointCloud& cloud, const Polygon2& footprint,
                             double dilation = 1.0);

// Building-level worker pool; per-building work stays sequential.
std::vector<PipelineResult> run_batch(std::vector<BuildingJob>& jobs, std::size_t n_workers);

nlohmann::json report_json(const std::string& id, const PipelineResult& result);
std::string batch_csv(const std::vector<std::string>& ids,
                      const std::vector<PipelineResult>& results);

} // namespace lod2rec
