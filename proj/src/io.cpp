#include "lod2rec/io.hpp"

#include "lod2rec/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lod2rec {

namespace {

std::string lower_ext(const std::string& path) {
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

PointCloud load_xyz(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path, 0);
    PointCloud cloud;
    std::string line;
    std::size_t lineno = 0;
    bool any_class = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        double x, y, z;
        if (!(ss >> x >> y >> z))
            throw ParseError("expected 'x y z [class]' in " + path, lineno);
        int cls = -1;
        if (ss >> cls) any_class = true;
        cloud.points.push_back({x, y, z});
        cloud.classes.push_back(cls >= 0 ? static_cast<std::uint8_t>(cls) : 0);
    }
    if (!any_class) cloud.classes.clear();
    return cloud;
}

PointCloud load_ply_points(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path, 0);
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line) || line.substr(0, 3) != "ply")
        throw ParseError("not a PLY file: " + path, 1);

    bool binary = false;
    std::size_t n_vertices = 0;
    struct Prop {
        std::string name;
        std::string type;
    };
    std::vector<Prop> props;
    bool in_vertex_element = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt == "binary_little_endian") binary = true;
            else if (fmt != "ascii")
                throw UnsupportedFormat("PLY format " + fmt + " not supported");
        } else if (tok == "element") {
            std::string name;
            std::size_t count;
            ss >> name >> count;
            in_vertex_element = name == "vertex";
            if (in_vertex_element) n_vertices = count;
        } else if (tok == "property" && in_vertex_element) {
            Prop p;
            ss >> p.type >> p.name;
            if (p.type == "list") throw UnsupportedFormat("list property on PLY vertices");
            props.push_back(p);
        } else if (tok == "end_header") {
            break;
        }
    }

    auto type_size = [](const std::string& t) -> std::size_t {
        if (t == "float" || t == "float32" || t == "int" || t == "int32" || t == "uint" ||
            t == "uint32")
            return 4;
        if (t == "double" || t == "float64") return 8;
        if (t == "uchar" || t == "uint8" || t == "char" || t == "int8") return 1;
        if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
        throw UnsupportedFormat("PLY property type " + t);
    };

    PointCloud cloud;
    cloud.points.reserve(n_vertices);
    int ix = -1, iy = -1, iz = -1, icls = -1;
    for (std::size_t i = 0; i < props.size(); ++i) {
        if (props[i].name == "x") ix = static_cast<int>(i);
        if (props[i].name == "y") iy = static_cast<int>(i);
        if (props[i].name == "z") iz = static_cast<int>(i);
        if (props[i].name == "classification" || props[i].name == "class")
            icls = static_cast<int>(i);
    }
    if (ix < 0 || iy < 0 || iz < 0)
        throw ParseError("PLY vertex element lacks x/y/z in " + path, lineno);

    if (!binary) {
        for (std::size_t v = 0; v < n_vertices; ++v) {
            if (!std::getline(in, line))
                throw ParseError("unexpected end of PLY data", lineno + v + 1);
            std::istringstream ss(line);
            std::vector<double> vals(props.size());
            for (auto& val : vals)
                if (!(ss >> val)) throw ParseError("short PLY row", lineno + v + 1);
            cloud.points.push_back({vals[static_cast<std::size_t>(ix)],
                                    vals[static_cast<std::size_t>(iy)],
                                    vals[static_cast<std::size_t>(iz)]});
            cloud.classes.push_back(
                icls >= 0 ? static_cast<std::uint8_t>(vals[static_cast<std::size_t>(icls)]) : 0);
        }
    } else {
        std::size_t row = 0;
        std::vector<std::size_t> offsets(props.size());
        for (std::size_t i = 0; i < props.size(); ++i) {
            offsets[i] = row;
            row += type_size(props[i].type);
        }
        std::vector<char> buf(row);
        for (std::size_t v = 0; v < n_vertices; ++v) {
            in.read(buf.data(), static_cast<std::streamsize>(row));
            if (!in) throw ParseError("unexpected end of binary PLY data", 0);
            auto read_val = [&](int idx) -> double {
                const Prop& p = props[static_cast<std::size_t>(idx)];
                const char* at = buf.data() + offsets[static_cast<std::size_t>(idx)];
                if (p.type == "float" || p.type == "float32") {
                    float f;
                    std::memcpy(&f, at, 4);
                    return f;
                }
                if (p.type == "double" || p.type == "float64") {
                    double d;
                    std::memcpy(&d, at, 8);
                    return d;
                }
                if (p.type == "uchar" || p.type == "uint8") {
                    unsigned char c;
                    std::memcpy(&c, at, 1);
                    return c;
                }
                if (p.type == "int" || p.type == "int32") {
                    std::int32_t q;
                    std::memcpy(&q, at, 4);
                    return q;
                }
                if (p.type == "uint" || p.type == "uint32") {
                    std::uint32_t q;
                    std::memcpy(&q, at, 4);
                    return q;
                }
                if (p.type == "short" || p.type == "int16") {
                    std::int16_t q;
                    std::memcpy(&q, at, 2);
                    return q;
                }
                if (p.type == "ushort" || p.type == "uint16") {
                    std::uint16_t q;
                    std::memcpy(&q, at, 2);
                    return q;
                }
                std::int8_t c;
                std::memcpy(&c, at, 1);
                return c;
            };
            cloud.points.push_back({read_val(ix), read_val(iy), read_val(iz)});
            cloud.classes.push_back(icls >= 0 ? static_cast<std::uint8_t>(read_val(icls)) : 0);
        }
    }
    if (icls < 0) cloud.classes.clear();
    return cloud;
}

} // namespace

PointCloud load_point_cloud(const std::string& path) {
    std::string ext = lower_ext(path);
    if (ext == "xyz" || ext == "txt" || ext == "pts") return load_xyz(path);
    if (ext == "ply") return load_ply_points(path);
    throw UnsupportedFormat("point cloud format ." + ext + " (use .xyz or .ply)");
}

std::vector<std::pair<std::string, Polygon2>> load_footprints(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path, 0);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("GeoJSON parse: ") + e.what(), 0);
    }

    std::vector<std::pair<std::string, Polygon2>> out;
    if (doc.value("type", "") != "FeatureCollection")
        throw UnsupportedFormat("expected a GeoJSON FeatureCollection");

    auto parse_ring = [](const nlohmann::json& ring) {
        std::vector<Point2> pts;
        for (const auto& c : ring) pts.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
        // GeoJSON rings repeat the first coordinate.
        if (pts.size() > 1 && (pts.front() - pts.back()).norm() < 1e-12) pts.pop_back();
        return pts;
    };
    auto parse_polygon = [&](const nlohmann::json& coords) {
        Polygon2 poly;
        poly.outer = parse_ring(coords.at(0));
        if (ring_signed_area(poly.outer) < 0.0)
            std::reverse(poly.outer.begin(), poly.outer.end());
        for (std::size_t r = 1; r < coords.size(); ++r) {
            auto hole = parse_ring(coords.at(r));
            if (ring_signed_area(hole) > 0.0) std::reverse(hole.begin(), hole.end());
            poly.holes.push_back(std::move(hole));
        }
        return poly;
    };

    std::size_t index = 0;
    for (const auto& feature : doc.at("features")) {
        std::string id;
        if (feature.contains("id")) {
            id = feature.at("id").is_string() ? feature.at("id").get<std::string>()
                                              : std::to_string(feature.at("id").get<long long>());
        } else if (feature.contains("properties") && feature.at("properties").is_object() &&
                   feature.at("properties").contains("id")) {
            const auto& pid = feature.at("properties").at("id");
            id = pid.is_string() ? pid.get<std::string>()
                                 : std::to_string(pid.get<long long>());
        } else {
            id = "building_" + std::to_string(index);
        }
        const auto& geom = feature.at("geometry");
        std::string type = geom.value("type", "");
        if (type == "Polygon") {
            out.push_back({id, parse_polygon(geom.at("coordinates"))});
        } else if (type == "MultiPolygon") {
            std::size_t part = 0;
            for (const auto& coords : geom.at("coordinates")) {
                std::string pid = part == 0 ? id : id + "_" + std::to_string(part);
                out.push_back({pid, parse_polygon(coords)});
                ++part;
            }
        } else {
            throw UnsupportedFormat("geometry type " + type + " in footprints");
        }
        ++index;
    }
    return out;
}

namespace {

void append_coord(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    out += buf;
}

const char* role_name(FacetRole role) {
    switch (role) {
        case FacetRole::roof: return "roof";
        case FacetRole::wall: return "wall";
        case FacetRole::ground: return "ground";
    }
    return "?";
}

} // namespace

std::string mesh_to_obj(const BuildingMesh& mesh, const std::string& object_name,
                        bool role_comments) {
    std::string out;
    out += "o " + object_name + "\n";
    for (const auto& v : mesh.vertices) {
        out += "v ";
        append_coord(out, v.x);
        out += " ";
        append_coord(out, v.y);
        out += " ";
        append_coord(out, v.z);
        out += "\n";
    }
    for (const auto& f : mesh.facets) {
        if (role_comments) out += std::string("# role ") + role_name(f.role) + "\n";
        // Polygons with holes are emitted as their CDT triangles so the OBJ
        // stays renderable everywhere; plain polygons keep one face line.
        if (f.holes.empty()) {
            out += "f";
            for (auto v : f.ring) out += " " + std::to_string(v + 1);
            out += "\n";
        } else {
            auto tris = triangulate_facet(mesh, f);
            for (const auto& t : tris) {
                out += "f";
                for (auto v : t) out += " " + std::to_string(v + 1);
                out += "\n";
            }
        }
    }
    return out;
}

void export_mesh(const BuildingMesh& mesh, const std::string& path, MeshFormat format,
                 const std::string& object_name, bool role_comments) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path, 0);
    if (format == MeshFormat::obj) {
        out << mesh_to_obj(mesh, object_name, role_comments);
        return;
    }
    // ASCII PLY with polygon faces (holes triangulated as in OBJ).
    std::vector<std::vector<std::size_t>> faces;
    for (const auto& f : mesh.facets) {
        if (f.holes.empty()) {
            faces.push_back(f.ring);
        } else {
            for (const auto& t : triangulate_facet(mesh, f))
                faces.push_back({t[0], t[1], t[2]});
        }
    }
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << mesh.vertices.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    out << "element face " << faces.size() << "\n";
    out << "property list uchar int vertex_indices\n";
    out << "end_header\n";
    for (const auto& v : mesh.vertices) {
        std::string line;
        append_coord(line, v.x);
        line += " ";
        append_coord(line, v.y);
        line += " ";
        append_coord(line, v.z);
        out << line << "\n";
    }
    for (const auto& f : faces) {
        out << f.size();
        for (auto v : f) out << " " << v;
        out << "\n";
    }
}

BuildingMesh load_mesh_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path, 0);
    BuildingMesh mesh;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z)) throw ParseError("bad OBJ vertex", lineno);
            mesh.vertices.push_back({x, y, z});
        } else if (tok == "f") {
            MeshFacet f;
            std::string ref;
            while (ss >> ref) {
                auto slash = ref.find('/');
                long idx = std::stol(slash == std::string::npos ? ref : ref.substr(0, slash));
                if (idx < 0) idx = static_cast<long>(mesh.vertices.size()) + idx + 1;
                if (idx <= 0 || static_cast<std::size_t>(idx) > mesh.vertices.size())
                    throw ParseError("OBJ face index out of range", lineno);
                f.ring.push_back(static_cast<std::size_t>(idx - 1));
            }
            if (f.ring.size() < 3) throw ParseError("OBJ face with fewer than 3 vertices", lineno);
            std::vector<Point3> pts;
            for (auto v : f.ring) pts.push_back(mesh.vertices[v]);
            try {
                f.plane = fit_plane(pts);
            } catch (const DegenerateInput&) {
            }
            mesh.facets.push_back(std::move(f));
        }
    }
    return mesh;
}

BuildingMesh load_mesh_ply(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path, 0);
    std::string line;
    std::size_t n_vertex = 0, n_face = 0;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt != "ascii") throw UnsupportedFormat("only ascii PLY meshes are read back");
        } else if (tok == "element") {
            std::string name;
            std::size_t n;
            ss >> name >> n;
            if (name == "vertex") n_vertex = n;
            if (name == "face") n_face = n;
        } else if (tok == "end_header") {
            break;
        }
    }
    BuildingMesh mesh;
    for (std::size_t i = 0; i < n_vertex; ++i) {
        std::getline(in, line);
        std::istringstream ss(line);
        double x, y, z;
        ss >> x >> y >> z;
        mesh.vertices.push_back({x, y, z});
    }
    for (std::size_t i = 0; i < n_face; ++i) {
        std::getline(in, line);
        std::istringstream ss(line);
        std::size_t n;
        ss >> n;
        MeshFacet f;
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t v;
            ss >> v;
            f.ring.push_back(v);
        }
        std::vector<Point3> pts;
        for (auto v : f.ring) pts.push_back(mesh.vertices[v]);
        try {
            f.plane = fit_plane(pts);
        } catch (const DegenerateInput&) {
        }
        mesh.facets.push_back(std::move(f));
    }
    return mesh;
}

void save_point_cloud_xyz(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path, 0);
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        std::string line;
        append_coord(line, cloud.points[i].x);
        line += " ";
        append_coord(line, cloud.points[i].y);
        line += " ";
        append_coord(line, cloud.points[i].z);
        if (cloud.has_classes()) line += " " + std::to_string(cloud.classes[i]);
        out << line << "\n";
    }
}

void save_footprint_geojson(const Polygon2& footprint, const std::string& id,
                            const std::string& path) {
    nlohmann::json ring = nlohmann::json::array();
    auto dump_ring = [](const std::vector<Point2>& r) {
        nlohmann::json ring_json = nlohmann::json::array();
        for (const auto& p : r) ring_json.push_back({p.x, p.y});
        ring_json.push_back({r.front().x, r.front().y});
        return ring_json;
    };
    ring.push_back(dump_ring(footprint.outer));
    for (const auto& h : footprint.holes) ring.push_back(dump_ring(h));

    nlohmann::json doc{
        {"type", "FeatureCollection"},
        {"features",
         {{{"type", "Feature"},
           {"id", id},
           {"properties", {{"id", id}}},
           {"geometry", {{"type", "Polygon"}, {"coordinates", ring}}}}}}};
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path, 0);
    out << doc.dump(2) << "\n";
}

} // namespace lod2rec
