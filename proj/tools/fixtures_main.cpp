#include "lod2rec/fixtures.hpp"
#include "lod2rec/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace lod2rec;

int main(int argc, char** argv) {
    CLI::App app{"Synthetic building fixture generator"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "Generate a fixture triple");
    std::string archetype = "gable", out_dir = ".";
    FixtureSpec spec;
    gen->add_option("--archetype", archetype,
                    "flat | gable | hip | pyramid | step | l-gable | cross-gable | "
                    "flat-with-superstructure");
    gen->add_option("--out", out_dir, "Output directory")->required();
    gen->add_option("--width", spec.width, "Plan width [m]");
    gen->add_option("--depth", spec.depth, "Plan depth [m]");
    gen->add_option("--eave-height", spec.eave_height, "Eave height [m]");
    gen->add_option("--pitch", spec.pitch_deg, "Roof pitch [deg]");
    gen->add_option("--density", spec.density, "Sampling density [pts/m^2]");
    gen->add_option("--sigma", spec.sigma, "Noise sigma [m]");
    gen->add_option("--rotation", spec.rotation_deg, "Plan rotation [deg]");
    gen->add_option("--seed", spec.seed, "Random seed");

    CLI11_PARSE(app, argc, argv);

    try {
        spec.archetype = archetype_from_name(archetype);
        Fixture fix = generate_fixture(spec);
        fs::create_directories(out_dir);
        save_point_cloud_xyz(fix.cloud, out_dir + "/points.xyz");
        save_footprint_geojson(fix.footprint, archetype_name(spec.archetype),
                               out_dir + "/footprint.geojson");
        export_mesh(fix.truth, out_dir + "/truth.obj", MeshFormat::obj,
                    archetype_name(spec.archetype), true);
        std::cout << "wrote " << fix.cloud.size() << " points, truth mesh with "
                  << fix.truth.vertices.size() << " vertices / " << fix.truth.facets.size()
                  << " facets\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
