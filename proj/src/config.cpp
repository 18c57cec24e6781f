#include "lod2rec/config.hpp"

#include "lod2rec/errors.hpp"

#include <fstream>
#include <sstream>

namespace lod2rec {

namespace {

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw UnsupportedFormat("boolean expected, got '" + v + "'");
}

} // namespace

void Config::set(const std::string& key, const std::string& value) {
    std::istringstream ss(value);
    auto num = [&]() {
        double d;
        std::istringstream s2(value);
        if (!(s2 >> d)) throw UnsupportedFormat("number expected for " + key);
        return d;
    };

    if (key == "detection.fitting_tolerance") detection.fitting_tolerance = num();
    else if (key == "detection.min_inliers") detection.min_inliers = static_cast<std::size_t>(num());
    else if (key == "detection.normal_angle_tol_deg") detection.normal_angle_tol_deg = num();
    else if (key == "detection.knn") detection.knn = static_cast<std::size_t>(num());
    else if (key == "detection.alpha") detection.alpha = num();
    else if (key == "lines.adjacency_dist") lines.adjacency_dist = num();
    else if (key == "lines.simplify_tol") lines.simplify_tol = num();
    else if (key == "lines.discontinuity_height") lines.discontinuity_height = num();
    else if (key == "lines.side_band") lines.side_band = num();
    else if (key == "kinetic.max_extensions") kinetic.max_extensions = static_cast<std::size_t>(num());
    else if (key == "kinetic.unbounded") kinetic.unbounded = parse_bool(value);
    else if (key == "kinetic.bbox_margin") kinetic.bbox_margin = num();
    else if (key == "energy.w_d") energy.w_d = num();
    else if (key == "energy.w_p") energy.w_p = num();
    else if (key == "energy.w_c") energy.w_c = num();
    else if (key == "energy.ridge_tol") energy.ridge_tol = num();
    else if (key == "regularize.tau_h") regularize.tau_h = num();
    else if (key == "regularize.parallel_tol_deg") regularize.parallel_tol_deg = num();
    else if (key == "regularize.ortho_tol_deg") regularize.ortho_tol_deg = num();
    else if (key == "regularize.enabled") regularize2d_enabled = parse_bool(value);
    else if (key == "extrude.tau_v") extrude.tau_v = num();
    else if (key == "extrude.merge_enabled") extrude.merge_enabled = parse_bool(value);
    else if (key == "metrics.samples") metric_samples = static_cast<std::size_t>(num());
    else if (key == "metrics.accuracy") compute_accuracy = parse_bool(value);
    else if (key == "seed") seed = static_cast<std::uint64_t>(num());
    else if (key == "emit_debug_svg") emit_debug_svg = parse_bool(value);
    else if (key == "watchdog_seconds") watchdog_seconds = num();
    else throw UnsupportedFormat("unknown config key: " + key);
}

std::map<std::string, std::string> Config::dump() const {
    std::map<std::string, std::string> out;
    auto put = [&](const std::string& k, auto v) { out[k] = std::to_string(v); };
    put("detection.fitting_tolerance", detection.fitting_tolerance);
    put("detection.min_inliers", detection.min_inliers);
    put("detection.normal_angle_tol_deg", detection.normal_angle_tol_deg);
    put("detection.knn", detection.knn);
    put("detection.alpha", detection.alpha);
    put("lines.adjacency_dist", lines.adjacency_dist);
    put("lines.simplify_tol", lines.simplify_tol);
    put("lines.discontinuity_height", lines.discontinuity_height);
    put("lines.side_band", lines.side_band);
    put("kinetic.max_extensions", kinetic.max_extensions);
    out["kinetic.unbounded"] = kinetic.unbounded ? "true" : "false";
    put("kinetic.bbox_margin", kinetic.bbox_margin);
    put("energy.w_d", energy.w_d);
    put("energy.w_p", energy.w_p);
    put("energy.w_c", energy.w_c);
    put("energy.ridge_tol", energy.ridge_tol);
    put("regularize.tau_h", regularize.tau_h);
    put("regularize.parallel_tol_deg", regularize.parallel_tol_deg);
    put("regularize.ortho_tol_deg", regularize.ortho_tol_deg);
    out["regularize.enabled"] = regularize2d_enabled ? "true" : "false";
    put("extrude.tau_v", extrude.tau_v);
    out["extrude.merge_enabled"] = extrude.merge_enabled ? "true" : "false";
    put("metrics.samples", metric_samples);
    out["metrics.accuracy"] = compute_accuracy ? "true" : "false";
    put("seed", seed);
    out["emit_debug_svg"] = emit_debug_svg ? "true" : "false";
    put("watchdog_seconds", watchdog_seconds);
    return out;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config " + path, 0);
    Config config;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            // Blank or comment-only line.
            bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
            if (!blank) throw ParseError("expected 'key = value'", lineno);
            continue;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        try {
            config.set(key, value);
        } catch (const UnsupportedFormat& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    return config;
}

void apply_overrides(Config& config, const std::map<std::string, std::string>& overrides) {
    for (const auto& [k, v] : overrides) config.set(k, v);
}

} // namespace lod2rec
