#pragma once

#include "lod2rec/extrude.hpp"
#include "lod2rec/kinetic.hpp"
#include "lod2rec/labeling.hpp"
#include "lod2rec/line_extract.hpp"
#include "lod2rec/plane_detect.hpp"
#include "lod2rec/regularize.hpp"

#include <map>
#include <string>

namespace lod2rec {

// Full parameter set of the pipeline. Every key is settable from the config
// file and overridable from the CLI.
struct Config {
    DetectionParams detection;
    LineExtractionParams lines;
    KineticParams kinetic;
    EnergyWeights energy;
    Regularize2DParams regularize;
    ExtrudeParams extrude;

    bool regularize2d_enabled = true;
    std::size_t metric_samples = 100000;
    bool compute_accuracy = true;
    std::uint64_t seed = 1;
    bool emit_debug_svg = false;
    double watchdog_seconds = 0.0;  // 0 disables the per-building watchdog

    void set(const std::string& key, const std::string& value);
    std::map<std::string, std::string> dump() const;
};

// `key = value` lines, '#' comments.
Config load_config(const std::string& path);
void apply_overrides(Config& config, const std::map<std::string, std::string>& overrides);

} // namespace lod2rec
