#pragma once

#include "lod2rec/mesh.hpp"
#include "lod2rec/plane_detect.hpp"

#include <string>
#include <vector>

namespace lod2rec {

// ASCII XYZ[C] (x y z [class] per line) or PLY (ascii / binary_little_endian)
// with x, y, z and optional classification properties. Dispatch on extension.
PointCloud load_point_cloud(const std::string& path);

// GeoJSON FeatureCollection of Polygon / MultiPolygon features; feature id
// (or property "id", or running index) becomes the building id.
std::vector<std::pair<std::string, Polygon2>> load_footprints(const std::string& path);

enum class MeshFormat { obj, ply };

// OBJ: polygon faces, one object per building, optional per-facet role
// comments. PLY: ascii, triangulated faces are NOT used - polygon faces kept.
void export_mesh(const BuildingMesh& mesh, const std::string& path, MeshFormat format,
                 const std::string& object_name = "building", bool role_comments = false);
std::string mesh_to_obj(const BuildingMesh& mesh, const std::string& object_name,
                        bool role_comments = false);

BuildingMesh load_mesh_obj(const std::string& path);
BuildingMesh load_mesh_ply(const std::string& path);

void save_point_cloud_xyz(const PointCloud& cloud, const std::string& path);
void save_footprint_geojson(const Polygon2& footprint, const std::string& id,
                            const std::string& path);

} // namespace lod2rec
